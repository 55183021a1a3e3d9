"""
Command-line front end: ``matrixrl run | audit | gen``.
"""
