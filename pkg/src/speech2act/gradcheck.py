"""Central finite-difference gradient checking.

The relative error uses max(|analytic|, |numeric|, 1e-6) as denominator: a
bare ratio is ill-conditioned where both sides sit at finite-difference noise
level (~1e-11 for float64 with step 1e-5).
"""

import numpy as np

from .autodiff import backward


def finite_difference_gradient(loss_fn, param, eps=1e-5) -> np.ndarray:
    """Central differences of loss_fn() w.r.t. one parameter, elementwise.

    loss_fn rebuilds the graph from current parameter values and returns the
    scalar loss as a float.
    """
    grad = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    gflat = grad.reshape(-1)
    for j in range(flat.size):
        orig = flat[j]
        flat[j] = orig + eps
        up = loss_fn()
        flat[j] = orig - eps
        down = loss_fn()
        flat[j] = orig
        gflat[j] = (up - down) / (2.0 * eps)
    return grad


def max_relative_error(analytic, numeric, floor=1e-6) -> float:
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def check_gradients(build_loss, params, eps=1e-5) -> float:
    """Compare analytic gradients against central differences.

    build_loss() constructs the graph from the parameters' current values and
    returns the scalar loss tensor. Returns the worst elementwise relative
    error over all parameters.
    """
    params = list(params)
    loss = build_loss()
    backward(loss, params=params)
    analytic = {p.name: p.grad.copy() for p in params}

    worst = 0.0
    for p in params:
        numeric = finite_difference_gradient(lambda: float(build_loss().data), p, eps=eps)
        worst = max(worst, max_relative_error(analytic[p.name], numeric))
    return worst
