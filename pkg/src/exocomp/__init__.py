"""Desk-scale simulation lab for exotic models of computation.

Every module simulates one concrete machine model honestly enough to be
checked against brute force: dense statevectors with nonlinear gates,
black-box search, adiabatic optimization, hidden-variable sampling of a
graph-isomorphism state, closed-timelike-curve fixed points, postselected
branching, soap-film Steiner trees, and closed-form physical-limit
calculators. All randomness flows from a single 64-bit seed through
counter-based splitting (see :mod:`exocomp.rng`).
"""

__version__ = "0.1.0"
