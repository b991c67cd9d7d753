# Core physics modules
