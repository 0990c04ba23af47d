"""
Generalized finite difference solver for a parabolic-elliptic chemotaxis
system with motility regulation.
"""
__version__ = '0.1'
