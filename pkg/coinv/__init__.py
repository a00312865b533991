"""Torsion in coinvariants of skew products of Cantor minimal systems"""

__version__ = "1.0.0"
