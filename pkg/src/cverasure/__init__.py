"""Random-code decoupling bounds for the bosonic erasure channel."""

__version__ = "0.1.0"
