"""Exact symbolic computation for the Lie superalgebra E(1,6) and the
singular vectors of its finite Verma modules.

Subpackage map: ``exactnum`` (Gaussian-rational scalars), ``grassmann``
(Lambda(6) on bitmasks), ``contact`` (bracket, embedding, root system),
``gmodule`` (finite g0-modules), ``verma`` (induced modules and the
lambda-action), ``singular`` (singular-vector systems, the degree bound,
proof-step reproduction), ``cli`` (the ``e16verma`` command).
"""

__version__ = "0.1.0"
