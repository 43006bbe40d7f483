"""Finite-difference derivatives with respect to a scalar model parameter."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Derivative:
    value: Any
    step: float
    one_sided: bool = False


def parameter_step(x: float, h_rel: float) -> float:
    """Absolute step for a relative step ``h_rel`` (falls back to ``h_rel`` at 0)."""
    return h_rel * abs(x) if x != 0 else h_rel


def derivative(
    f: Callable[[float], Any],
    x: float,
    h_rel: float,
    admissible: Callable[[float], bool] = lambda v: True,
) -> Derivative:
    """Second-order finite difference of ``f`` at ``x``.

    Central where both stencil points are admissible, otherwise the
    three-point one-sided formula on whichever side is.  ``f`` may return
    ``None`` to mark a point where the quantity does not exist; that point
    is then treated as inadmissible.
    """
    h = parameter_step(x, h_rel)

    def probe(v):
        if not admissible(v):
            return None
        return f(v)

    plus, minus = probe(x + h), probe(x - h)
    if plus is not None and minus is not None:
        return Derivative((np.asarray(plus) - np.asarray(minus)) / (2 * h), h)
    f0 = f(x)
    if f0 is None:
        raise DomainError(f"quantity undefined at the expansion point {x}")
    if plus is not None:
        far = probe(x + 2 * h)
        if far is not None:
            value = (-3 * np.asarray(f0) + 4 * np.asarray(plus) - np.asarray(far)) / (2 * h)
            return Derivative(value, h, one_sided=True)
    if minus is not None:
        far = probe(x - 2 * h)
        if far is not None:
            value = (3 * np.asarray(f0) - 4 * np.asarray(minus) + np.asarray(far)) / (2 * h)
            return Derivative(value, h, one_sided=True)
    raise DomainError(f"no admissible finite-difference stencil around {x}")


def observed_order(
    f: Callable[[float], Any],
    x: float,
    h_rel: float,
    admissible: Callable[[float], bool] = lambda v: True,
) -> float:
    """Empirical convergence order of :func:`derivative` from steps h, h/2, h/4."""
    d = [np.asarray(derivative(f, x, h_rel / 2**k, admissible).value) for k in range(3)]
    e1 = np.max(np.abs(d[0] - d[1]))
    e2 = np.max(np.abs(d[1] - d[2]))
    if e2 == 0:
        return float("inf")
    return float(np.log2(e1 / e2))
