"""Quantum Fisher information of the sensor state.

Each qubit evolves under the same amplitude-damping channel, so both probe
states are fixed functions of ``c(t)``:

* uncorrelated probe, ``[(|e> + |g>)/sqrt 2]^N``: a product of identical qubit
  states, whose QFI is ``N`` times the Bloch-vector formula;
* GHZ probe, ``(|e>^N + |g>^N)/sqrt 2``: a direct sum of a 2x2 coherence block
  ``rho_1`` in ``{|e>^N, |g>^N}`` and a diagonal block with binomial
  populations, whose QFIs add.

Derivatives with respect to the estimated parameter enter only through
``dc = d c / d theta``; every density-matrix derivative is assembled from
``(c, dc)`` analytically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DomainError, InvalidStateError, UnsupportedOperationError

PROBES = ("uncorrelated", "ghz")
METHODS = ("exact", "markovian", "asymptotic")

_PURE_GAP = 1e-12
_PURE_OVERLAP = 1e-9
_BLOCH_SLACK = 1e-9
_EIG_FLOOR = -1e-12
_PAIR_FLOOR = 1e-12
_BINOMIAL_SWITCH = 1e-8


@dataclass(frozen=True)
class TwoLevelBlock:
    """A (stack of) 2x2 Hermitian block(s), shape ``(..., 2, 2)``.

    ``basis_label`` is ``"single_qubit"`` for ``{|e>, |g>}`` or
    ``"ghz_coherence"`` for ``{|e>^N, |g>^N}``; the latter is sub-normalized.
    """

    m: np.ndarray
    basis_label: str = "single_qubit"


def _as_amplitudes(c, dc):
    c = np.asarray(c, dtype=complex)
    dc = np.asarray(dc, dtype=complex)
    return np.broadcast_arrays(c, dc)


def _population(c, tol=_BLOCH_SLACK):
    p = np.abs(c) ** 2
    if np.any(p > 1.0 + 2 * tol):
        raise InvalidStateError(f"|c|^2 = {p.max():.12g} exceeds 1")
    return np.minimum(p, 1.0)


def bloch_vector(c) -> np.ndarray:
    """``r = (Re c, -Im c, |c|^2 - 1)`` with the components on the last axis."""
    c = np.asarray(c, dtype=complex)
    return np.stack([c.real, -c.imag, np.abs(c) ** 2 - 1.0], axis=-1)


def single_qubit_state(c) -> TwoLevelBlock:
    c = np.asarray(c, dtype=complex)
    p = np.abs(c) ** 2
    m = np.empty(c.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = p / 2
    m[..., 0, 1] = c / 2
    m[..., 1, 0] = np.conj(c) / 2
    m[..., 1, 1] = 1 - p / 2
    return TwoLevelBlock(m, "single_qubit")


def single_qubit_derivative(c, dc) -> TwoLevelBlock:
    c, dc = _as_amplitudes(c, dc)
    dp = 2 * np.real(np.conj(c) * dc)
    m = np.empty(c.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = dp / 2
    m[..., 0, 1] = dc / 2
    m[..., 1, 0] = np.conj(dc) / 2
    m[..., 1, 1] = -dp / 2
    return TwoLevelBlock(m, "single_qubit")


def qfi_uncorrelated(c, dc, N: int = 1):
    """QFI of the N-qubit product probe: ``N [|r'|^2 + (r.r')^2 / (1 - |r|^2)]``.

    ``1 - |r|^2`` equals ``p (1 - p)`` and is evaluated in that form.  At the
    pure-state end ``p -> 1`` the second term is dropped when ``r.r'``
    vanishes and rejected otherwise; at ``p -> 0`` it tends to the finite
    limit ``[Re(c* dc)]^2 / |c|^2``, which is used instead.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    c, dc = _as_amplitudes(c, dc)
    r = bloch_vector(c)
    p = np.abs(c) ** 2
    dp = 2 * np.real(np.conj(c) * dc)
    if np.any(np.linalg.norm(r, axis=-1) > 1 + _BLOCH_SLACK):
        raise InvalidStateError("Bloch vector longer than 1")
    dr = np.stack([dc.real, -dc.imag, dp], axis=-1)
    overlap = np.sum(r * dr, axis=-1)
    mixedness = p * (1 - p)
    regular = mixedness >= _PURE_GAP
    near_excited = ~regular & (p >= 0.5)
    if np.any(near_excited & (np.abs(overlap) >= _PURE_OVERLAP)):
        raise InvalidStateError("pure state with a norm-changing derivative")
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(regular, overlap**2 / np.where(regular, mixedness, 1.0), 0.0)
        near_ground = ~regular & (p < 0.5) & (p > 0)
        limit = np.real(np.conj(c) * dc) ** 2 * (1 - 2 * p) ** 2 / np.where(near_ground, p * (1 - p), 1.0)
    term = np.where(near_ground, limit, term)
    F = N * (np.sum(dr**2, axis=-1) + term)
    return F if F.ndim else float(F)


def ghz_block(c, N: int) -> TwoLevelBlock:
    """Coherence block ``rho_1`` of the GHZ probe in ``{|e>^N, |g>^N}``."""
    if N < 1:
        raise DomainError("N must be >= 1")
    c = np.asarray(c, dtype=complex)
    p = _population(c)
    cN = c**N
    m = np.empty(c.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 0.5 * p**N
    m[..., 0, 1] = 0.5 * cN
    m[..., 1, 0] = 0.5 * np.conj(cN)
    m[..., 1, 1] = 0.5 * (1 + (1 - p) ** N)
    return TwoLevelBlock(m, "ghz_coherence")


def ghz_block_derivative(c, dc, N: int) -> TwoLevelBlock:
    c, dc = _as_amplitudes(c, dc)
    p = _population(c)
    dp = 2 * np.real(np.conj(c) * dc)
    dcN = N * c ** (N - 1) * dc
    m = np.empty(c.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 0.5 * N * p ** (N - 1) * dp
    m[..., 0, 1] = 0.5 * dcN
    m[..., 1, 0] = 0.5 * np.conj(dcN)
    m[..., 1, 1] = -0.5 * N * (1 - p) ** (N - 1) * dp
    return TwoLevelBlock(m, "ghz_coherence")


def qfi_block_sld(rho, drho):
    """QFI ``Tr(rho L^2)`` of a block through its symmetric logarithmic derivative.

    In the eigenbasis of ``rho``, ``L_ij = 2 drho_ij / (l_i + l_j)``, so the
    QFI is ``sum_ij 2 |drho_ij|^2 / (l_i + l_j)``.  Pairs with
    ``l_i + l_j < 1e-12`` lie outside the support and are skipped.
    Works on stacks of matrices (``(..., n, n)``).
    """
    rho = np.asarray(getattr(rho, "m", rho), dtype=complex)
    drho = np.asarray(getattr(drho, "m", drho), dtype=complex)
    scale = max(1.0, float(np.max(np.abs(rho)))) if rho.size else 1.0
    if np.max(np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))), initial=0.0) > 1e-12 * scale:
        raise InvalidStateError("rho is not Hermitian")
    lam, vec = np.linalg.eigh(rho)
    if np.any(lam < _EIG_FLOOR):
        raise InvalidStateError(f"negative eigenvalue {lam.min():.3g}")
    lam = np.clip(lam, 0.0, None)
    d = np.conj(np.swapaxes(vec, -1, -2)) @ drho @ vec
    pair = lam[..., :, None] + lam[..., None, :]
    keep = pair >= _PAIR_FLOOR
    F = np.sum(np.where(keep, 2 * np.abs(d) ** 2 / np.where(keep, pair, 1.0), 0.0), axis=(-1, -2))
    return F if F.ndim else float(F)


def _binomial_qfi(p: np.ndarray, dp: np.ndarray, N: int) -> np.ndarray:
    """``(dp^2/2) sum_{m=1}^{N-1} C(N,m) p^(m-2) (1-p)^(N-m-2) (m - N p)^2`` in log space."""
    out = np.zeros(p.shape)
    if N < 2:
        return out
    m = np.arange(1, N)
    log_binom = gammaln(N + 1) - gammaln(m + 1) - gammaln(N - m + 1)
    for idx in np.ndindex(p.shape):
        pi, dpi = p[idx], dp[idx]
        if dpi == 0:
            continue
        if pi <= 0 or pi >= 1:
            raise InvalidStateError(f"p = {pi} is on the boundary with nonzero dp; QFI diverges")
        with np.errstate(divide="ignore"):
            logs = (log_binom + (m - 2) * np.log(pi) + (N - m - 2) * np.log1p(-pi)
                    + 2 * np.log(np.abs(m - N * pi)))
        out[idx] = 0.5 * dpi**2 * np.exp(logsumexp(logs))
    return out


def qfi_ghz_diagonal(p, dp, N: int):
    """QFI of the GHZ diagonal block (binomial populations, ``m = 1..N-1``).

    Closed form ``(dp^2/2) [N/(p(1-p)) - N^2 (1-p)^(N-2) - N^2 p^(N-2)]``; within
    ``1e-8`` of either end of ``[0, 1]`` the binomial sum is used instead.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    p, dp = np.broadcast_arrays(p, dp)
    if np.any(p < -_BLOCH_SLACK) or np.any(p > 1 + _BLOCH_SLACK):
        raise InvalidStateError("population outside [0, 1]")
    p = np.clip(p, 0.0, 1.0)
    if N == 1:
        F = np.zeros(p.shape)
        return F if F.ndim else float(F)
    edge = (p < _BINOMIAL_SWITCH) | (1 - p < _BINOMIAL_SWITCH)
    ps = np.where(edge, 0.5, p)
    with np.errstate(over="ignore", under="ignore"):
        closed = 0.5 * dp**2 * (N / (ps * (1 - ps)) - N**2 * (1 - ps) ** (N - 2) - N**2 * ps ** (N - 2))
    F = np.where(edge, 0.0, closed)
    if edge.any():
        F = np.where(edge, _binomial_qfi(p, np.where(edge, dp, 0.0), N), F)
    return F if F.ndim else float(F)


def qfi_ghz(c, dc, N: int):
    """QFI of the GHZ probe: coherence block (via SLD) plus diagonal block."""
    c, dc = _as_amplitudes(c, dc)
    p = _population(c)
    dp = 2 * np.real(np.conj(c) * dc)
    F1 = qfi_block_sld(ghz_block(c, N), ghz_block_derivative(c, dc, N))
    F2 = qfi_ghz_diagonal(p, dp, N)
    F = np.asarray(F1 + F2)
    return F if F.ndim else float(F)


def asymptote_uncorrelated(bs, sens, N: int, t):
    """Late-time QFI of the product probe once ``c -> Z exp(-i E_b t)``.

    ``N [Z'^2 (2 - Z^2) / (1 - Z^2) + Z^2 E_b'^2 t^2]``; at large ``t`` the
    quadratic term dominates and this reduces to ``N Z^2 E_b'^2 t^2``.
    """
    Z, dZ, dE = bs.Z, sens.dZ, sens.dE_b
    t = np.asarray(t, dtype=float)
    F = N * (dZ**2 * (2 - Z**2) / (1 - Z**2) + Z**2 * dE**2 * t**2)
    return F if F.ndim else float(F)


def asymptote_ghz(bs, dZ: float, N: int) -> float:
    """Late-time QFI of the GHZ diagonal block at finite ``N``.

    ``2 Z^2 Z'^2 [N/(Z^2 - Z^4) - N^2 Z^(2N-4) - N^2 (1 - Z^2)^(N-2)]``; for
    large ``N`` only the first term survives, giving ``2 N Z'^2 / (1 - Z^2)``.
    """
    Z = bs.Z
    z2 = Z * Z
    return float(2 * z2 * dZ**2 * (N / (z2 - z2 * z2) - N**2 * Z ** (2 * N - 4) - N**2 * (1 - z2) ** (N - 2)))


@dataclass(frozen=True)
class QfiSeries:
    theta: Any
    probe: str
    N: int
    grid: Any
    F: np.ndarray
    method: str
    metadata: dict[str, Any] = field(default_factory=dict)


def qfi_from_amplitude(c, dc, probe: str, N: int):
    if probe == "uncorrelated":
        return qfi_uncorrelated(c, dc, N)
    if probe == "ghz":
        return qfi_ghz(c, dc, N)
    raise DomainError(f"probe must be one of {PROBES}, got {probe!r}")


def qfi_series(J, omega0, grid, sel, probe: str = "uncorrelated", N: int = 1,
               method: str = "exact") -> QfiSeries:
    """QFI over ``grid`` for the selected parameter, probe and method.

    ``exact`` uses the Volterra solution, ``markovian`` the memoryless
    exponential, ``asymptotic`` the late-time bound-state formulas (requires
    a bound state).
    """
    from .dynamics import amplitude_sensitivity, markovian_amplitude, solve_amplitude
    from .spectrum import bound_state_sensitivity, find_bound_state

    if not J.is_ohmic:
        raise UnsupportedOperationError("QFI of the reservoir needs an Ohmic-family spectral density")
    if probe not in PROBES:
        raise DomainError(f"probe must be one of {PROBES}, got {probe!r}")
    meta: dict[str, Any] = {"spectral_density": J.to_dict(), "omega0": omega0}
    if method in ("exact", "markovian"):
        solver = solve_amplitude if method == "exact" else markovian_amplitude
        c = solver(J, omega0, grid).c
        dc = amplitude_sensitivity(J, omega0, grid, sel, solver=solver)
        F = qfi_from_amplitude(c, dc, probe, N)
    elif method == "asymptotic":
        bs = find_bound_state(J, omega0)
        if bs is None:
            raise DomainError("asymptotic QFI needs a bound state")
        sens = bound_state_sensitivity(J, omega0, sel)
        if probe == "uncorrelated":
            F = asymptote_uncorrelated(bs, sens, N, grid.times)
        else:
            F = np.full(grid.n_steps + 1, asymptote_ghz(bs, sens.dZ, N))
        meta.update(E_b=bs.E_b, Z=bs.Z, dE_b=sens.dE_b, dZ=sens.dZ, one_sided=sens.one_sided)
    else:
        raise DomainError(f"method must be one of {METHODS}, got {method!r}")
    return QfiSeries(sel, probe, N, grid, np.asarray(F, dtype=float), method, meta)
