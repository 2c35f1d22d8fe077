"""Exact BV/equivariant verification and numerics for matrix integrals of graded algebras."""
