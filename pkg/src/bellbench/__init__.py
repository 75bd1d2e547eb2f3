"""Generalized CHSH inequality toolkit for N-qubit GHZ state certification."""

__version__ = "0.1.0"
