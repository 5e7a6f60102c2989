"""
Monodromy of the Schwarzian equation, the holonomy map and its local model.
"""
