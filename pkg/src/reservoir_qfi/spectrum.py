"""Single-excitation spectrum of one qubit plus its reservoir.

Below the continuum (``E < 0``) the pole condition

    y(E) = omega0 - int J(w) / (w - E) dw = E

has at most one root, the bound state ``E_b``.  Its residue ``Z`` sets the
late-time plateau ``c(t) -> Z exp(-i E_b t)``.  The inverse Laplace
transform of the amplitude splits into that pole term plus a continuum
integral over ``E > 0``; :func:`reconstruct_amplitude` evaluates both and is
used as an oracle for the time-domain solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from . import finite_diff
from .dynamics import AmplitudeTrajectory, TimeGrid
from .errors import BracketError, DomainError, RangeError
from .spectral import (
    EstimandSelector,
    SpectralDensity,
    _require_ohmic,
    bound_state_exists,
    evaluate,
    inverse_moment,
    level_shift,
    residue_integral,
    resolvent_integral,
)

BISECTION_TOL = 1e-12
MAX_DOUBLINGS = 60
#: Continuum integral truncation, in units of omega_c.
CONTINUUM_CUTOFF = 40.0
#: Base panel width of the continuum integral, in units of omega_c.
CONTINUUM_PANEL = 1.0 / 50.0
MAX_CONTINUUM_PANELS = 10**6
_GAUSS_ORDER = 15


@dataclass(frozen=True)
class BoundState:
    E_b: float
    Z: float
    converged: bool
    bisection_width: float


@dataclass(frozen=True)
class DiscretizedSpectrum:
    eigenvalues: np.ndarray
    n_modes: int
    omega_max: float


@dataclass(frozen=True)
class BoundStateSensitivity:
    dE_b: float
    dZ: float
    one_sided: bool
    step: float


def pole_function(J: SpectralDensity, omega0: float, E):
    """``g(E) = y(E) - E``, strictly decreasing for ``E < 0``."""
    return omega0 - resolvent_integral(J, E) - E


def find_bound_state(J: SpectralDensity, omega0: float = 1.0) -> BoundState | None:
    """Locate the bound state by bisection, or return ``None`` if there is none."""
    _require_ohmic(J, "find_bound_state")
    if not bound_state_exists(J, omega0):
        return None
    lo, hi = -omega0, 0.0
    for _ in range(MAX_DOUBLINGS):
        if pole_function(J, omega0, lo) > 0:
            break
        hi, lo = lo, 2.0 * lo
    else:
        raise BracketError(f"no sign change of y(E) - E above E = {lo:g}")
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if pole_function(J, omega0, mid) > 0:
            lo = mid
        else:
            hi = mid
    width = hi - lo
    E_b = 0.5 * (lo + hi)
    if E_b >= 0:
        E_b = lo
    Z = 1.0 / (1.0 + residue_integral(J, E_b))
    return BoundState(E_b, Z, width <= BISECTION_TOL, width)


def locate_threshold(
    J: SpectralDensity,
    omega0: float = 1.0,
    parameter: str = "omega_c",
    lower: float = 1e-3,
    upper: float = 1e3,
    tol: float = 1e-9,
) -> float:
    """Value of ``parameter`` at which a bound state starts to form.

    Bisects the sign of ``omega0 - int J(w)/w dw`` (evaluated by quadrature,
    not by the closed-form Gamma-function criterion) between ``lower`` and
    ``upper``, which must bracket the threshold.
    """
    sel = EstimandSelector(parameter)

    def bound(v):
        return omega0 - inverse_moment(sel.with_value(J, v)) < 0

    if bound(lower) == bound(upper):
        raise BracketError(f"{parameter} in [{lower}, {upper}] does not bracket the threshold")
    lo_state = bound(lower)
    lo, hi = lower, upper
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bound(mid) == lo_state:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def discretized_spectrum(
    J: SpectralDensity,
    omega0: float = 1.0,
    n_modes: int = 4000,
    omega_max: float | None = None,
) -> DiscretizedSpectrum:
    """Eigenvalues of the qubit coupled to ``n_modes`` discrete bath modes.

    Modes sit at the midpoints of uniform bins on ``[0, omega_max]`` with
    couplings ``sqrt(J(w_k) dw)``; the Hamiltonian is an arrowhead matrix.
    """
    _require_ohmic(J, "discretized_spectrum")
    if n_modes < 1:
        raise DomainError("n_modes must be >= 1")
    if omega_max is None:
        omega_max = 30.0 * J.omega_c
    dw = omega_max / n_modes
    w = (np.arange(n_modes) + 0.5) * dw
    g = np.sqrt(evaluate(J, w) * dw)
    H = np.diag(np.concatenate([[omega0], w]))
    H[0, 1:] = g
    H[1:, 0] = g
    return DiscretizedSpectrum(linalg.eigvalsh(H), n_modes, omega_max)


@lru_cache(maxsize=None)
def _gauss01(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def _subpanel_interpolation(m: int, order: int = _GAUSS_ORDER) -> np.ndarray:
    """Lagrange matrix from the Gauss nodes of a panel to those of its m equal subpanels."""
    x, _ = _gauss01(order)
    target = ((np.arange(m)[:, None] + x[None, :]) / m).ravel()
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / diff.prod(axis=1)
    num = target[:, None] - x[None, :]
    exact = np.isclose(num, 0.0, atol=1e-15)
    num = np.where(exact, 1.0, num)
    L = bary / num
    L = L / L.sum(axis=1, keepdims=True)
    rows = exact.any(axis=1)
    L[rows] = exact[rows].astype(float)
    return L


class ContinuumIntegral:
    """Continuum part of the amplitude for one reservoir, reusable across times.

    The non-oscillatory spectral weight ``A(E) = J / ([E - omega0 - Delta]^2 +
    [pi J]^2)`` is sampled once on base panels (width ``omega_c/50``, graded
    geometrically towards the band edge, refined where the denominator is
    sharply peaked inside a panel).  For a time ``t`` each base panel is split into equal
    subpanels no wider than ``pi/(4t)`` and ``A`` is interpolated onto their
    Gauss nodes.
    """

    def __init__(self, J: SpectralDensity, omega0: float = 1.0, max_refine: int = 8):
        _require_ohmic(J, "continuum integral")
        self.J = J
        self.omega0 = omega0
        w0 = CONTINUUM_PANEL * J.omega_c
        top = CONTINUUM_CUTOFF * J.omega_c
        n_uniform = int(round((top - w0) / w0))
        edges = np.concatenate([[0.0], w0 * 2.0 ** np.arange(-40, 0), w0 + w0 * np.arange(n_uniform + 1)])
        a, b = edges[:-1], edges[1:]
        weight, denom = self._sample(a, b)
        for _ in range(max_refine):
            # a panel is under-resolved when the denominator dips well below
            # the bulk and also swings by more than 2x across the panel
            scale = np.median(denom)
            swing = denom.max(axis=1) / denom.min(axis=1)
            sharp = (denom.min(axis=1) < 0.01 * scale) & (swing > 2.0)
            if not sharp.any():
                break
            keep = ~sharp
            split = np.linspace(0.0, 1.0, 5)
            sa = (a[sharp, None] + (b - a)[sharp, None] * split[None, :-1]).ravel()
            sb = (a[sharp, None] + (b - a)[sharp, None] * split[None, 1:]).ravel()
            new_weight, new_denom = self._sample(sa, sb)
            a = np.concatenate([a[keep], sa])
            b = np.concatenate([b[keep], sb])
            weight = np.concatenate([weight[keep], new_weight])
            denom = np.concatenate([denom[keep], new_denom])
        order = np.argsort(a)
        self.a, self.b = a[order], b[order]
        self.weight = weight[order]

    def _sample(self, a, b):
        x, _ = _gauss01(_GAUSS_ORDER)
        E = a[:, None] + (b - a)[:, None] * x[None, :]
        J_E = evaluate(self.J, E)
        detuning = E - self.omega0 - level_shift(self.J, E)
        denom = detuning**2 + (math.pi * J_E) ** 2
        return J_E / denom, denom

    def spectral_weight_total(self) -> float:
        """``int A(E) dE``; equals ``1 - Z`` (or 1 without a bound state)."""
        _, w = _gauss01(_GAUSS_ORDER)
        return float(((self.b - self.a)[:, None] * w[None, :] * self.weight).sum())

    def _fine_rule(self, t_max: float):
        _, w = _gauss01(_GAUSS_ORDER)
        x, _ = _gauss01(_GAUSS_ORDER)
        width = self.b - self.a
        if t_max <= 0:
            E = self.a[:, None] + width[:, None] * x[None, :]
            return E.ravel(), (width[:, None] * w[None, :] * self.weight).ravel()
        h = math.pi / (4.0 * t_max)
        m = np.maximum(1, np.ceil(width / h - 1e-12)).astype(int)
        if m.sum() > MAX_CONTINUUM_PANELS:
            raise RangeError(f"t = {t_max:g} needs {m.sum()} continuum panels (max {MAX_CONTINUUM_PANELS})")
        nodes, weights = [], []
        for mm in np.unique(m):
            idx = np.flatnonzero(m == mm)
            fine = self.weight[idx] @ _subpanel_interpolation(int(mm)).T
            rel = ((np.arange(mm)[:, None] + x[None, :]) / mm).ravel()
            nodes.append((self.a[idx, None] + width[idx, None] * rel[None, :]).ravel())
            sub_w = np.tile(w, mm) / mm
            weights.append((fine * width[idx, None] * sub_w[None, :]).ravel())
        return np.concatenate(nodes), np.concatenate(weights)

    def __call__(self, t, chunk: int = 8):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < 0):
            raise DomainError("t must be >= 0")
        E, G = self._fine_rule(float(t_arr.max()))
        out = np.empty(t_arr.shape, dtype=complex)
        steps = np.diff(t_arr)
        if t_arr.size > 2 and np.allclose(steps, steps[0], rtol=1e-12, atol=0):
            # uniform times: advance the phases by a fixed factor, re-anchoring
            # every `resync` steps so rounding cannot accumulate
            resync = 64
            factor = np.exp(-1j * steps[0] * E)
            for k, tk in enumerate(t_arr):
                if k % resync == 0:
                    phase = np.exp(-1j * tk * E)
                else:
                    phase *= factor
                out[k] = phase @ G
        else:
            for start in range(0, t_arr.size, chunk):
                tc = t_arr[start:start + chunk]
                out[start:start + chunk] = np.exp(-1j * np.outer(tc, E)) @ G
        return out if np.ndim(t) else complex(out[0])


def continuum_amplitude(J: SpectralDensity, omega0, t):
    """Continuum contribution ``int_0^inf A(E) exp(-i E t) dE`` (scalar or array ``t``)."""
    return ContinuumIntegral(J, omega0)(t)


def reconstruct_amplitude(J: SpectralDensity, omega0: float, grid: TimeGrid) -> AmplitudeTrajectory:
    """Amplitude from the pole-plus-continuum decomposition, on ``grid``."""
    t = grid.times
    bs = find_bound_state(J, omega0)
    c = ContinuumIntegral(J, omega0)(t)
    if bs is not None:
        c = c + bs.Z * np.exp(-1j * bs.E_b * t)
    meta = {
        "spectral_density": J.to_dict(),
        "omega0": omega0,
        "method": "laplace",
        "E_b": None if bs is None else bs.E_b,
        "Z": None if bs is None else bs.Z,
    }
    return AmplitudeTrajectory(grid, c, meta)


def bound_state_sensitivity(
    J: SpectralDensity, omega0: float, sel: EstimandSelector
) -> BoundStateSensitivity:
    """Derivatives of ``E_b`` and ``Z`` with respect to the selected parameter.

    Falls back to a one-sided stencil (flagged) when the bound state is
    absent at one of the central stencil points.
    """
    theta = sel.value(J)

    def pole(v):
        bs = find_bound_state(sel.with_value(J, v), omega0)
        return None if bs is None else np.array([bs.E_b, bs.Z])

    d = finite_diff.derivative(pole, theta, sel.fd_step, sel.admissible)
    return BoundStateSensitivity(float(d.value[0]), float(d.value[1]), d.one_sided, d.step)
