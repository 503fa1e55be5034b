"""Stability laboratory for viscous regularizations of 2-D hyperbolic systems.

Subpackages cover small dense matrix algebra built on characteristic
polynomials (:mod:`~obliquestab.matkit`), first-order eigenvalue
perturbations (:mod:`~obliquestab.perturb`), plane-wave stability scans and
conjecture harnesses (:mod:`~obliquestab.stability`), the shallow-water model
definitions (:mod:`~obliquestab.swe`), a periodic 2-D WENO5/SSP-RK3 simulator
(:mod:`~obliquestab.solver`), and a command-line front end
(:mod:`~obliquestab.cli`).
"""

__version__ = "0.1.0"
