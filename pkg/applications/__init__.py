# Application entry points
