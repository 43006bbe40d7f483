"""Reservoir spectral densities and the frequency integrals built from them.

All frequencies are measured in units of the qubit frequency ``omega0`` and
all times in units of ``1/omega0``.  The Ohmic family

    J(w) = eta * w**s * omega_c**(1 - s) * exp(-w / omega_c)

is the only physical model; the ``direct_kernel`` variant hands the memory
kernel to the dynamics solver directly and exists for solver validation.

Frequency integrals are evaluated with a fixed composite Gauss-Legendre rule
in the scaled variable ``u = w / omega_c``.  Panels are graded geometrically
towards ``u = 0`` (where ``J ~ u**s``) and the rule extends to ``u = 80`` so
that a principal-value pole anywhere in the continuum used downstream
(``E <= 40 omega_c``) stays far from the upper limit.  A fixed rule makes
every integral a smooth function of the reservoir parameters, which the
finite-difference sensitivities rely on.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Any, Mapping

import numpy as np
from scipy import integrate, special

from .errors import DomainError, QuadratureError, UnsupportedOperationError

OHMIC = "ohmic"
DIRECT_KERNEL = "direct_kernel"
KINDS = (OHMIC, DIRECT_KERNEL)

#: Upper limit of the principal-value integrals, in units of omega_c.
PV_CUTOFF = 80.0

_CHUNK = 512


@dataclass(frozen=True)
class SpectralDensity:
    """Reservoir model.

    Use :meth:`ohmic` or :meth:`direct_kernel` rather than the raw constructor.
    ``kernel_gamma``, ``kernel_lambda`` and ``kernel_omega`` parametrize the
    exponential kernel ``(gamma * lambda / 2) exp(-(lambda + i omega) x)``.
    """

    kind: str = OHMIC
    eta: float = 0.0
    s: float = 1.0
    omega_c: float = 1.0
    kernel_gamma: float | None = None
    kernel_lambda: float | None = None
    kernel_omega: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown spectral density kind {self.kind!r}")
        if self.kind == OHMIC:
            if not self.eta >= 0:
                raise DomainError(f"eta must be >= 0, got {self.eta}")
            if not self.s > 0:
                raise DomainError(f"s must be > 0, got {self.s}")
            if not self.omega_c > 0:
                raise DomainError(f"omega_c must be > 0, got {self.omega_c}")
        else:
            if self.kernel_gamma is None or self.kernel_lambda is None or self.kernel_omega is None:
                raise DomainError("direct kernel needs gamma, lambda and omega")
            if not self.kernel_lambda > 0:
                raise DomainError("kernel lambda must be > 0")
            if not self.kernel_gamma >= 0:
                raise DomainError("kernel gamma must be >= 0")

    @classmethod
    def ohmic(cls, eta: float, s: float, omega_c: float) -> "SpectralDensity":
        return cls(OHMIC, float(eta), float(s), float(omega_c))

    @classmethod
    def direct_kernel(cls, gamma: float, lam: float, omega: float) -> "SpectralDensity":
        return cls(DIRECT_KERNEL, kernel_gamma=float(gamma), kernel_lambda=float(lam),
                   kernel_omega=float(omega))

    @property
    def is_ohmic(self) -> bool:
        return self.kind == OHMIC

    def replace(self, **changes) -> "SpectralDensity":
        return replace(self, **changes)

    def kernel_rate(self) -> float:
        """Inverse decay time of the memory kernel (``omega_c`` or ``lambda``)."""
        return self.omega_c if self.is_ohmic else self.kernel_lambda

    def to_dict(self) -> dict[str, Any]:
        if self.is_ohmic:
            return {"kind": OHMIC, "eta": self.eta, "s": self.s, "omega_c": self.omega_c}
        return {
            "kind": DIRECT_KERNEL,
            "kernel": {
                "gamma": self.kernel_gamma,
                "lambda": self.kernel_lambda,
                "omega": self.kernel_omega,
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SpectralDensity":
        """Build from a config mapping.

        Accepts kernel parameters either nested (``kernel: {gamma: ...}``)
        or as dotted keys (``kernel.gamma``).
        """
        kind = data.get("kind", OHMIC)
        if kind == OHMIC:
            return cls.ohmic(data.get("eta", 0.0), data.get("s", 1.0), data.get("omega_c", 1.0))
        kernel = dict(data.get("kernel") or {})
        for key in ("gamma", "lambda", "omega"):
            if f"kernel.{key}" in data:
                kernel[key] = data[f"kernel.{key}"]
        try:
            return cls.direct_kernel(kernel["gamma"], kernel["lambda"], kernel["omega"])
        except KeyError as exc:
            raise DomainError(f"direct kernel config is missing {exc.args[0]!r}") from None


THETAS = ("s", "omega_c", "eta")


@dataclass(frozen=True)
class EstimandSelector:
    """Which reservoir parameter is estimated, plus the relative step used
    to differentiate with respect to it."""

    theta: str
    fd_step: float = 1e-4

    def __post_init__(self):
        if self.theta not in THETAS:
            raise DomainError(f"theta must be one of {THETAS}, got {self.theta!r}")
        if not self.fd_step > 0:
            raise DomainError("fd_step must be > 0")

    def value(self, J: SpectralDensity) -> float:
        _require_ohmic(J, "parameter selection")
        return getattr(J, self.theta)

    def with_value(self, J: SpectralDensity, value: float) -> SpectralDensity:
        return J.replace(**{self.theta: float(value)})

    def admissible(self, value: float) -> bool:
        return value >= 0 if self.theta == "eta" else value > 0


def _require_ohmic(J: SpectralDensity, what: str):
    if not J.is_ohmic:
        raise UnsupportedOperationError(f"{what} is only defined for the Ohmic family")


def evaluate(J: SpectralDensity, omega):
    """Spectral density ``J(omega)`` for ``omega >= 0`` (scalar or array)."""
    _require_ohmic(J, "evaluate")
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("spectral density is only defined for omega >= 0")
    out = J.eta * w**J.s * J.omega_c ** (1.0 - J.s) * np.exp(-w / J.omega_c)
    return out if out.ndim else float(out)


def _ohmic_derivative(J: SpectralDensity, w):
    # dJ/dw, used where the subtracted PV integrand is 0/0
    return evaluate(J, w) * (J.s / w - 1.0 / J.omega_c)


def memory_kernel(J: SpectralDensity, x):
    """Memory kernel ``nu(x) = int_0^inf J(w) exp(-i w x) dw`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("memory kernel is only defined for x >= 0")
    if J.is_ohmic:
        base = 1.0 / J.omega_c + 1j * x
        out = J.eta * J.omega_c ** (1.0 - J.s) * special.gamma(J.s + 1.0) * base ** (-(J.s + 1.0))
    else:
        lam = J.kernel_lambda
        out = 0.5 * J.kernel_gamma * lam * np.exp(-(lam + 1j * J.kernel_omega) * x)
    return out if out.ndim else complex(out)


@lru_cache(maxsize=None)
def _scaled_rule(order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    edges = np.concatenate([
        [0.0],
        2.0 ** np.arange(-48, -3),
        np.arange(0.125, 4.0, 0.125),
        np.arange(4.0, PV_CUTOFF + 0.5, 1.0),
    ])
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


def _frequency_rule(J: SpectralDensity):
    """Nodes, weights and ``J`` at the nodes, in physical frequency units."""
    u, w = _scaled_rule()
    omega = J.omega_c * u
    return omega, J.omega_c * w, evaluate(J, omega)


def _reduce_rows(E: np.ndarray, row) -> np.ndarray:
    out = np.empty(E.shape, dtype=float)
    flat_in, flat_out = E.ravel(), out.reshape(-1)
    for start in range(0, flat_in.size, _CHUNK):
        flat_out[start:start + _CHUNK] = row(flat_in[start:start + _CHUNK, None])
    if not np.all(np.isfinite(out)):
        raise QuadratureError("non-finite value in spectral integral")
    return out


def _scalar_or_array(out: np.ndarray, like):
    return out if np.ndim(like) else float(out)


def inverse_moment(J: SpectralDensity) -> float:
    """``int_0^inf J(w)/w dw`` by adaptive quadrature (generic bound-state check).

    For the Ohmic family this equals ``eta * omega_c * Gamma(s)``; the
    quadrature route exists so the analytic criterion can be cross-checked.
    """
    _require_ohmic(J, "inverse_moment")
    if J.eta == 0:
        return 0.0
    # int u^(s-1) e^-u du on [0, 40] with the algebraic endpoint weight, plus tail
    head = integrate.quad(lambda u: np.exp(-u), 0.0, 40.0, weight="alg",
                          wvar=(J.s - 1.0, 0.0), epsabs=0.0, epsrel=1e-13, limit=200)[0]
    tail = integrate.quad(lambda u: u ** (J.s - 1.0) * np.exp(-u), 40.0, np.inf,
                          epsabs=0.0, epsrel=1e-10)[0]
    value = J.eta * J.omega_c * (head + tail)
    if not np.isfinite(value):
        raise QuadratureError("inverse moment did not converge")
    return float(value)


def bound_state_threshold(J: SpectralDensity) -> float:
    """Right-hand side of the bound-state criterion, ``eta * omega_c * Gamma(s)``."""
    _require_ohmic(J, "bound_state_threshold")
    return J.eta * J.omega_c * float(special.gamma(J.s))


def bound_state_exists(J: SpectralDensity, omega0: float = 1.0) -> bool:
    """True iff a bound state forms, i.e. ``omega0 < eta * omega_c * Gamma(s)``."""
    if not omega0 > 0:
        raise DomainError("omega0 must be > 0")
    return bool(omega0 < bound_state_threshold(J))


def resolvent_integral(J: SpectralDensity, E):
    """``int_0^inf J(w) / (w - E) dw`` for ``E <= 0``."""
    _require_ohmic(J, "resolvent_integral")
    E_arr = np.asarray(E, dtype=float)
    if np.any(E_arr > 0):
        raise DomainError("resolvent integral needs E <= 0; use level_shift above the band edge")
    omega, w, J_w = _frequency_rule(J)
    wJ = w * J_w

    def row(e):
        regular = (wJ / (omega - np.where(e == 0, -1.0, e))).sum(axis=1)
        return np.where(e.ravel() == 0, bound_state_threshold(J), regular)

    out = _reduce_rows(E_arr, row)
    return _scalar_or_array(out, E)


def residue_integral(J: SpectralDensity, E):
    """``int_0^inf J(w) / (w - E)**2 dw`` for ``E < 0``."""
    _require_ohmic(J, "residue_integral")
    E_arr = np.asarray(E, dtype=float)
    if np.any(E_arr >= 0):
        raise DomainError("residue integral needs E < 0")
    omega, w, J_w = _frequency_rule(J)
    wJ = w * J_w
    out = _reduce_rows(E_arr, lambda e: (wJ / (omega - e) ** 2).sum(axis=1))
    return _scalar_or_array(out, E)


def level_shift(J: SpectralDensity, E):
    """Reservoir-induced shift ``Delta(E) = P int_0^inf J(w) / (E - w) dw``.

    Below the band edge the integral is regular.  Above it the Cauchy
    principal value is taken by subtracting ``J(E)`` from the numerator and
    adding back the analytic PV of ``1/(E - w)`` on ``[0, Wmax]``.
    """
    _require_ohmic(J, "level_shift")
    E_arr = np.asarray(E, dtype=float)
    w_max = PV_CUTOFF * J.omega_c
    if np.any(E_arr >= 0.5 * w_max):
        raise DomainError(f"level shift supported for E < {0.5 * w_max:g}")
    out = np.zeros(E_arr.shape)
    if J.eta == 0:
        return _scalar_or_array(out, E)
    omega, w, J_w = _frequency_rule(J)
    flat, res = E_arr.ravel(), out.reshape(-1)

    neg = flat < 0
    if neg.any():
        res[neg] = -_reduce_rows(flat[neg], lambda e: (w * J_w / (omega - e)).sum(axis=1))
    res[flat == 0] = -bound_state_threshold(J)
    pos = flat > 0
    if pos.any():
        gap = 1e-9 * J.omega_c

        def principal_value(e):
            e = e.ravel()
            J_e = evaluate(J, e)
            num = J_w[None, :] - J_e[:, None]
            den = e[:, None] - omega[None, :]
            close = np.abs(den) < gap
            if close.any():
                rows, cols = np.nonzero(close)
                num[rows, cols] = -_ohmic_derivative(J, e[rows])
                den[rows, cols] = 1.0
            num /= den
            return num @ w + J_e * np.log(e / (w_max - e))

        res[pos] = _reduce_rows(flat[pos], principal_value)
    if not np.all(np.isfinite(out)):
        raise QuadratureError("non-finite level shift")
    return _scalar_or_array(out, E)
