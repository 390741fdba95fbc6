"""
Ramiforge - Inertia prescription for specializations of Galois covers of the projective line over Q.
"""

__version__ = "0.1.0"
