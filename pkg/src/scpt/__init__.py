"""Scaffold-conditioned preference triplet curation for molecular optimization."""

__version__ = "0.1.0"
