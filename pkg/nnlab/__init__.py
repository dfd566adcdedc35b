name = "nnlab"
__version__ = "0.1"
