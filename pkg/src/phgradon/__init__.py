"""Polyhomogeneous boundary asymptotics of the Radon transform and its adjoint.

The subpackages split along the lines of the computation:

* ``index_calculus``: exact index-set algebra and the predicted index maps;
* ``special_fn``: complex Gamma family and continued beta/Mellin functionals;
* ``coefficients``: boundary weights, fibre integrals and leading coefficients;
* ``transforms``: numerical R, R* and the normal operators on simple components;
* ``asymptotics``: expansion fits, presence probes and Mellin pole probes;
* ``cli``: the ``phgradon`` experiment runner.
"""

from .index_calculus import Index, IndexSet, IndexSetError, generate
from .special_fn import MeromorphicValue, SampledFunction01, beta_functional, gamma_fn, mellin_functional
from .coefficients import BoundaryWeight, weight_from_name
from .transforms import CutoffSpec, PhgComponentBall, PhgComponentCyl, backproject, radon
from .asymptotics import ExpansionModel, fit_expansion, mellin_probe

__all__ = [
    "Index",
    "IndexSet",
    "IndexSetError",
    "generate",
    "MeromorphicValue",
    "SampledFunction01",
    "beta_functional",
    "gamma_fn",
    "mellin_functional",
    "BoundaryWeight",
    "weight_from_name",
    "CutoffSpec",
    "PhgComponentBall",
    "PhgComponentCyl",
    "backproject",
    "radon",
    "ExpansionModel",
    "fit_expansion",
    "mellin_probe",
]

__version__ = "0.1.0"
