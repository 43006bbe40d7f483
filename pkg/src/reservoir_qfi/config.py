"""Run configuration and named parameter presets."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Mapping

from .dynamics import TimeGrid
from .errors import ConfigurationError, DomainError
from .qfi import PROBES
from .spectral import THETAS, EstimandSelector, SpectralDensity

RUN_METHODS = ("exact", "markovian", "asymptotic", "laplace_oracle")
SWEEP_AXES = ("omega_c", "eta", "s", "N", "t_max")


@dataclass(frozen=True)
class RunConfig:
    kind: str = "ohmic"
    eta: float = 0.1
    s: float = 1.0
    omega_c: float = 30.0
    kernel_gamma: float | None = None
    kernel_lambda: float | None = None
    kernel_omega: float | None = None
    omega0: float = 1.0
    probe: str = "uncorrelated"
    N: int = 1
    theta: str = "eta"
    t_max: float = 200.0
    n_steps: int | None = None
    methods: tuple[str, ...] = ("exact",)
    fd_step: float = 1e-4
    n_modes: int = 1000
    omega_max: float | None = None
    sweep_axis: str | None = None
    sweep_values: tuple[float, ...] = ()
    out: str | None = None

    def __post_init__(self):
        try:
            self.spectral_density()
            if self.probe not in PROBES:
                raise DomainError(f"probe must be one of {PROBES}")
            if int(self.N) != self.N or self.N < 1:
                raise DomainError("N must be a positive integer")
            if self.theta not in THETAS:
                raise DomainError(f"theta must be one of {THETAS}")
            if not self.omega0 > 0:
                raise DomainError("omega0 must be > 0")
            if not self.methods or any(m not in RUN_METHODS for m in self.methods):
                raise DomainError(f"methods must be a nonempty subset of {RUN_METHODS}")
            if not self.fd_step > 0:
                raise DomainError("fd_step must be > 0")
            if self.n_modes < 1:
                raise DomainError("n_modes must be >= 1")
            if self.sweep_axis is not None and self.sweep_axis not in SWEEP_AXES:
                raise DomainError(f"sweep axis must be one of {SWEEP_AXES}")
            self.grid()
        except (DomainError, TypeError) as exc:
            raise ConfigurationError(str(exc)) from exc

    def spectral_density(self) -> SpectralDensity:
        if self.kind == "direct_kernel":
            return SpectralDensity.direct_kernel(self.kernel_gamma, self.kernel_lambda, self.kernel_omega)
        return SpectralDensity.ohmic(self.eta, self.s, self.omega_c)

    def selector(self) -> EstimandSelector:
        return EstimandSelector(self.theta, self.fd_step)

    def grid(self) -> TimeGrid:
        if self.n_steps is None:
            return TimeGrid.default(self.spectral_density(), self.t_max, self.omega0)
        return TimeGrid(float(self.t_max), int(self.n_steps))

    def with_axis(self, axis: str, value) -> "RunConfig":
        """Copy with one sweep axis set; a default-resolution grid is re-derived."""
        if axis == "N":
            return replace(self, N=int(value))
        return replace(self, **{axis: float(value)})

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["methods"] = list(self.methods)
        d["sweep_values"] = list(self.sweep_values)
        return d


_FIELDS = {f.name for f in fields(RunConfig)}
_ALIASES = {
    "kernel.gamma": "kernel_gamma",
    "kernel.lambda": "kernel_lambda",
    "kernel.omega": "kernel_omega",
    "n": "N",
}


def flatten(data: Mapping[str, Any]) -> dict[str, Any]:
    """Map config-file keys (nested ``kernel``/``grid``/``sweep`` sections allowed) onto fields."""
    out: dict[str, Any] = {}
    for key, value in data.items():
        if key == "kernel" and isinstance(value, Mapping):
            for k, v in value.items():
                out[_ALIASES.get(f"kernel.{k}", f"kernel_{k}")] = v
        elif key == "grid" and isinstance(value, Mapping):
            out.update(value)
        elif key == "sweep" and isinstance(value, Mapping):
            if "axis" in value:
                out["sweep_axis"] = value["axis"]
            if "values" in value:
                out["sweep_values"] = value["values"]
        else:
            out[_ALIASES.get(key, key)] = value
    unknown = set(out) - _FIELDS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    if "methods" in out:
        m = out["methods"]
        out["methods"] = (m,) if isinstance(m, str) else tuple(m)
    if "sweep_values" in out:
        out["sweep_values"] = tuple(float(v) for v in out["sweep_values"])
    return out


def build_config(*layers: Mapping[str, Any]) -> RunConfig:
    """Merge flattened layers left to right (later layers win)."""
    merged: dict[str, Any] = {}
    for layer in layers:
        merged.update(flatten(layer))
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


_ALL = ("exact", "markovian", "asymptotic")


def _fig1(theta):
    return dict(eta=0.1, s=0.5, omega_c=20.0, N=100, probe="uncorrelated", theta=theta,
                methods=_ALL, sweep={"axis": "omega_c", "values": [3.0, 5.0, 20.0]})


def _fig2(theta, omega_c, values):
    return dict(eta=0.1, s=1.0, omega_c=omega_c, N=200, probe="ghz", theta=theta,
                methods=_ALL, sweep={"axis": "omega_c", "values": values})


def _fig3(N):
    return dict(eta=0.1, s=1.0, omega_c=30.0, N=N, probe="ghz", theta="eta",
                methods=_ALL, sweep={"axis": "omega_c", "values": [6.0, 30.0]})


PRESETS: dict[str, dict[str, Any]] = {
    "fig1a": _fig1("s"),
    "fig1b": _fig1("omega_c"),
    "fig1c": _fig1("eta"),
    "fig2a": _fig2("s", 8.0, [7.0, 7.5, 8.0]),
    "fig2b": _fig2("omega_c", 8.0, [7.0, 7.5, 8.0]),
    "fig2c": _fig2("eta", 8.0, [7.0, 7.5, 8.0]),
    "fig2d": _fig2("s", 30.0, [20.0, 25.0, 30.0]),
    "fig2e": _fig2("omega_c", 30.0, [20.0, 25.0, 30.0]),
    "fig2f": _fig2("eta", 30.0, [20.0, 25.0, 30.0]),
    "fig3a": _fig3(5),
    "fig3b": _fig3(50),
    "fig3c": _fig3(60),
    "fig3d": _fig3(100),
    # resonant, overdamped Jaynes-Cummings kernel (no zeros of c), checked against the closed form
    "direct-kernel": dict(kind="direct_kernel", kernel={"gamma": 0.1, "lambda": 1.0, "omega": 1.0},
                          t_max=20.0, methods=["exact"]),
    "uncoupled": dict(eta=0.0, s=1.0, omega_c=10.0, t_max=20.0),
}


def preset(name: str) -> dict[str, Any]:
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
