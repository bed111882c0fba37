"""Fusion rules of Z2-orbifolds of lattice vertex operator algebras."""
