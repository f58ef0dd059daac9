"""Central-difference gradient checking."""

import logging
from typing import Callable, Optional

import numpy as np

from .optim import ParamSet
from .tensor import Tensor, no_grad

logger = logging.getLogger(__name__)


def finite_diff_gradcheck(f: Callable[[ParamSet], Tensor], params: ParamSet,
                          step: float = 1e-3, floor: float = 1e-8,
                          max_coords: Optional[int] = None, seed: int = 0) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``f`` maps a parameter set to a scalar tensor. The check runs on a float64
    copy of ``params``; the error per coordinate is
    ``|a - n| / max(|a|, |n|, floor)``. With ``max_coords`` only that many
    randomly chosen coordinates of each parameter are perturbed.
    """
    probe = params.astype(np.float64)
    probe.zero_grad()
    f(probe).backward()
    analytic = probe.grads()
    rng = np.random.default_rng(seed)

    worst = 0.0
    for name, tensor in probe.items():
        flat = tensor.data.reshape(-1)
        coords = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            coords = np.sort(rng.choice(flat.size, size=max_coords, replace=False))
        expected = analytic[name].reshape(-1)
        for i in coords:
            original = flat[i]
            with no_grad():
                flat[i] = original + step
                plus = float(f(probe).data)
                flat[i] = original - step
                minus = float(f(probe).data)
            flat[i] = original
            numeric = (plus - minus) / (2.0 * step)
            a = float(expected[i])
            error = abs(a - numeric) / max(abs(a), abs(numeric), floor)
            if error > worst:
                worst = error
                logger.debug(f"{name}[{i}]: analytic {a:.6g}, numeric {numeric:.6g}, "
                             f"relative error {error:.3g}")
    return worst
