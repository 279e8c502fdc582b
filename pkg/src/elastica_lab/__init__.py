"""Numerical laboratory for singularly perturbed elastica energies on planar curves."""
