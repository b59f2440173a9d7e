"""Parallel quantum query complexity workbench.

Subpackages and modules:

* ``boolfn``: truth-table Boolean functions, block sensitivity, certificate complexity, p-parallel bounds
* ``certstruct``: certificate structures, orthogonal arrays and the functions they induce
* ``learngraph``: the p-parallel learning-graph edge set, dual certificates, primal solver, witness vectors
* ``adversary``: difference masks, ratio bound, masked-norm checks, lifted adversary matrices
* ``walks``: Johnson walk spectra, marked fractions, walk cost model
* ``qsim``: parallel Grover and oracle interrogation simulators
* ``cli``: the ``parqq`` command
"""

from .errors import ParameterError, ParqqError, PropertyViolation, ResourceLimitError

__version__ = "0.1.0"

__all__ = ["ParameterError", "ParqqError", "PropertyViolation", "ResourceLimitError", "__version__"]
