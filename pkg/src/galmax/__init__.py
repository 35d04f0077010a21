"""galmax: certify maximal Galois action on elliptic-curve torsion points.

An exact finite-group engine for GL2/SL2 over Z/mZ, elliptic-curve counting
over prime fields, a monogenic number-field layer with cyclotomic
certificates, a Frobenius-sampling certification pipeline, and a statistics
CLI for the associated counting results.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BadReductionError,
    GalmaxError,
    InvalidInputError,
    ResourceCapError,
    SingularCurveError,
)
from .verdict import CERTIFIED, INCONCLUSIVE, OBSTRUCTION, Verdict  # noqa: F401
