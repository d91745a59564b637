"""Flat ``section.key = value`` run configuration.

Lengths with an ``_a0`` suffix are in units of the lattice spacing a0.
Lines starting with ``#`` and trailing ``# ...`` comments are ignored.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .dynamics import SolverConfig
from .fields import Grid2D, InclusionSpec, default_grid_for
from .model import InvalidParameterError, ModelParams, triangular_mode_set


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams)
    box_a0: float = 64.0
    points_per_a0: int = 4
    radius_a0: float = 6.0
    width_a0: float = 1.0
    eigenstrain: float = 0.01
    solver: SolverConfig = field(
        default_factory=lambda: SolverConfig(dt=100.0, tol=1e-9, max_steps=5000, scheme="linearized")
    )
    # When set, the steady-state tolerance is this value times |eigenstrain|.
    tol_per_eigenstrain: float | None = 1e-7
    out_dir: str = "out"
    dump_every: int = 0
    dump_fields: bool = True
    figures: bool = True
    profile_axes: tuple[str, ...] = ("x",)
    noise: float = 0.0
    seed: int = 0
    sweep_parameter: str | None = None
    sweep_values: tuple[float, ...] = ()

    @property
    def a0(self) -> float:
        return triangular_mode_set(self.params.q0).a0

    def grid(self) -> Grid2D:
        return default_grid_for(self.box_a0, self.a0, self.points_per_a0)

    def inclusion(self) -> InclusionSpec:
        g = self.grid()
        return InclusionSpec(
            center=(g.lx / 2, g.ly / 2),
            radius=self.radius_a0 * self.a0,
            width=self.width_a0 * self.a0,
            eigenstrain=self.eigenstrain,
        )

    def effective_solver(self) -> SolverConfig:
        if self.tol_per_eigenstrain is None or self.eigenstrain == 0:
            return self.solver
        return dataclasses.replace(self.solver, tol=self.tol_per_eigenstrain * abs(self.eigenstrain))

    def with_sweep_value(self, value: float) -> "RunConfig":
        if self.sweep_parameter == "width_a0":
            return dataclasses.replace(self, width_a0=value, sweep_parameter=None, sweep_values=())
        if self.sweep_parameter == "eigenstrain":
            return dataclasses.replace(self, eigenstrain=value, sweep_parameter=None, sweep_values=())
        raise ConfigError(f"unknown sweep parameter {self.sweep_parameter!r}")

    def validate(self) -> "RunConfig":
        try:
            self.grid()
            self.inclusion()
            self.effective_solver()
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from exc
        for ax in self.profile_axes:
            if ax not in ("x", "y"):
                raise ConfigError(f"profile axis must be x or y, got {ax!r}")
        return self

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["a0"] = self.a0
        return d


def _as_bool(s: str) -> bool:
    low = s.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(t) for t in s.replace(",", " ").split())


_PARAM_KEYS = {f.name: float for f in dataclasses.fields(ModelParams)}
_SOLVER_KEYS = {
    "dt": float, "tol": float, "max_steps": int, "energy_check_every": int,
    "stabilization": float, "dealias": _as_bool, "scheme": str,
}
_TOP_KEYS = {
    "grid.box_a0": ("box_a0", float),
    "grid.points_per_a0": ("points_per_a0", int),
    "inclusion.radius_a0": ("radius_a0", float),
    "inclusion.width_a0": ("width_a0", float),
    "inclusion.eigenstrain": ("eigenstrain", float),
    "solver.tol_per_eigenstrain": ("tol_per_eigenstrain", lambda s: None if s.lower() == "none" else float(s)),
    "output.dir": ("out_dir", str),
    "output.dump_every": ("dump_every", int),
    "output.dump_fields": ("dump_fields", _as_bool),
    "output.figures": ("figures", _as_bool),
    "output.profile_axes": ("profile_axes", lambda s: tuple(s.replace(",", " ").split())),
    "init.noise": ("noise", float),
    "init.seed": ("seed", int),
    "sweep.parameter": ("sweep_parameter", str),
    "sweep.values": ("sweep_values", _floats),
}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base if base is not None else RunConfig()
    params = {}
    solver = {}
    top = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, value = (t.strip() for t in line.split("=", 1))
        try:
            if key.startswith("params.") and key[7:] in _PARAM_KEYS:
                params[key[7:]] = _PARAM_KEYS[key[7:]](value)
            elif key.startswith("solver.") and key[7:] in _SOLVER_KEYS:
                solver[key[7:]] = _SOLVER_KEYS[key[7:]](value)
            elif key in _TOP_KEYS:
                name, conv = _TOP_KEYS[key]
                top[name] = conv(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    try:
        cfg = dataclasses.replace(
            cfg,
            params=dataclasses.replace(cfg.params, **params),
            solver=dataclasses.replace(cfg.solver, **solver),
            **top,
        )
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def dump_config(cfg: RunConfig) -> str:
    """Inverse of :func:`parse_config` for the keys it understands."""
    lines = [f"params.{k} = {getattr(cfg.params, k)!r}" for k in _PARAM_KEYS]
    lines += [f"solver.{k} = {getattr(cfg.solver, k)}" for k in _SOLVER_KEYS]
    for key, (name, _) in _TOP_KEYS.items():
        val = getattr(cfg, name)
        if val is None and name != "tol_per_eigenstrain":
            continue
        if isinstance(val, tuple):
            val = ", ".join(str(v) for v in val)
            if not val:
                continue
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"
