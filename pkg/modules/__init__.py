# Cavity Field Solver - Module Package
