"""
Command-line experiments, report writing and the scan cache.
"""
