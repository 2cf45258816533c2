"""Generalized Calabi-Yau structures: pointwise spinor algebra, Hamiltonian
reduction and Duistermaat-Heckman checks.

Modules
-------
multivector
    Complex exterior algebra on a bitmask basis, Clifford action, Mukai pairing.
spinor
    Annihilators, purity, type, the gCY condition and local normal forms.
reduction
    Pointwise reduction of moment-map data to the quotient.
scenarios
    Model spinors and Bergman-kernel structures on the polydisc and ball.
dh
    Natural volume density and the Monte Carlo Duistermaat-Heckman comparison.
cli
    The ``gcytools`` command-line harness.
"""

__version__ = "0.1.0"
