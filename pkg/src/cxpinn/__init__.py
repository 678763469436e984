"""Single-hidden-layer PINNs with a trainable Cauchy activation and closed-form derivatives."""

import os

# A reproducible thread pool that needs no TBB/OpenMP runtime.
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

__version__ = "0.1.0"

from .activation import CauchyParams, cauchy_eval, cauchy_param_sens  # noqa: E402
from .network import CauchyNet, InitConfig, forward_jet, init_net, parameter_count, predict  # noqa: E402
from .problems import LossWeights, PdeProblem, get_problem  # noqa: E402

__all__ = [
    "CauchyNet",
    "CauchyParams",
    "InitConfig",
    "LossWeights",
    "PdeProblem",
    "cauchy_eval",
    "cauchy_param_sens",
    "forward_jet",
    "get_problem",
    "init_net",
    "parameter_count",
    "predict",
]
