"""
Punctured spheres, paths, Mobius maps and parabolic quadratic differentials.
"""
