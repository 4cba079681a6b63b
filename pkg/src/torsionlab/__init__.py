"""Witten-deformation laboratory for analytic torsion on 1D model geometries."""
