"""Ground states of the disordered attractive Bose-Hubbard chain."""

__version__ = "0.1.0"
