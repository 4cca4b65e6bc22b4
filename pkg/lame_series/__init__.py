"""
Lamé Series - Lamé functions in algebraic form.

Three-term recurrence (3TRF) series decomposition of the Lamé equation
about the singular point x = a, checked against a direct Frobenius
recurrence, with polynomial eigenvalue modes, convergence-domain
classification and the Gauss 2F1 kernel identity.
"""

__version__ = "0.1.0"
__author__ = "Scott Peterman"
