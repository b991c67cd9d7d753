# Result output modules
