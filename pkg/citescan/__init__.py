# Publication citation detection in source code comments
__version__ = "1.0.0"
