"""
bose_gibbs: effective theories and correlation inequalities for the
mean-field Bose gas.

Submodules are not imported here, so ``import bose_gibbs`` does not pull in
SciPy. Use ``from bose_gibbs import lattice, ideal_gas`` and so on.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
