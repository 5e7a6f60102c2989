"""
Numerical laboratory for the holonomy of parabolic projective structures on punctured spheres.
"""
