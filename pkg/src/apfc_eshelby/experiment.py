"""Inclusion experiments: single runs, sweeps and APFC-vs-analytic metrics."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, dump_config
from .dumps import write_field, write_profile_csv
from .dynamics import DivergenceError, RelaxationReport, relax
from .eshelby import EshelbyProblem, IsotropicElasticity, sample_stress_field
from .fields import AmplitudeState, Grid2D, beta_field, signed_distance_circle
from .model import equilibrium_amplitude, lame_constants, triangular_mode_set
from .stress import CONJUGATE_MODE_FACTOR, StressField, line_profile, stress_from_amplitudes

log = logging.getLogger(__name__)


@dataclass
class Comparison:
    value: float
    exact_zero: bool = False


def compare_fields(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> Comparison:
    """Relative L2 error ``|(a-b) mask| / |b mask|``.

    When the reference vanishes on the mask the absolute norm of ``a`` is
    returned with ``exact_zero`` set.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    m = np.ones(a.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    ref = float(np.linalg.norm(b[m]))
    diff = float(np.linalg.norm((a - b)[m]))
    if ref == 0.0:
        return Comparison(diff, exact_zero=True)
    return Comparison(diff / ref)


def decay_exponent(r: np.ndarray, values: np.ndarray) -> float:
    """Least-squares slope of ``log|values|`` against ``log r``."""
    ok = (r > 0) & (np.abs(values) > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(r[ok]), np.log(np.abs(values[ok])), 1)[0])


def transition_width(r: np.ndarray, values: np.ndarray) -> float:
    """10-90 % rise distance of a profile from its value at r=0 to its exterior maximum.

    ``r`` must start at the inclusion centre and increase.
    """
    lo = values[0]
    ipk = int(np.argmax(values))
    hi = values[ipk]
    if ipk == 0 or hi <= lo:
        return float("nan")
    seg_r, seg_v = r[: ipk + 1], values[: ipk + 1]

    def crossing(level):
        k = int(np.argmax(seg_v >= level))
        if k == 0:
            return seg_r[0]
        v0, v1 = seg_v[k - 1], seg_v[k]
        return seg_r[k - 1] + (level - v0) / (v1 - v0) * (seg_r[k] - seg_r[k - 1])

    return float(crossing(lo + 0.9 * (hi - lo)) - crossing(lo + 0.1 * (hi - lo)))


@dataclass
class ComparisonReport:
    label: str
    eigenstrain: float
    width: float
    converged: bool
    steps: int
    final_residual: float
    rel_l2_bulk: dict = field(default_factory=dict)
    interior_plateau: float = float("nan")
    analytic_interior: float = float("nan")
    exterior_decay_exponent: float = float("nan")
    exterior_decay_exponent_mean_removed: float = float("nan")
    transition_width: float = float("nan")
    syy_min: float = float("nan")
    syy_max: float = float("nan")
    divergence_ratio: float = float("nan")
    final_energy: float = float("nan")
    runtime_s: float = 0.0
    error: str | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class RunResult:
    """Everything a single run produced, kept in memory for callers and tests."""

    config: RunConfig
    state: AmplitudeState
    relaxation: RelaxationReport
    stress: StressField
    analytic: StressField
    report: ComparisonReport
    profile_r: np.ndarray
    profile_apfc: np.ndarray
    profile_analytic: np.ndarray


def build_state(cfg: RunConfig) -> AmplitudeState:
    """Amplitudes at phi_+ (beta = 1) everywhere, optionally with seeded noise."""
    grid = cfg.grid()
    modes = triangular_mode_set(cfg.params.q0)
    phi = equilibrium_amplitude(cfg.params, 1.0)
    beta = beta_field(grid, cfg.inclusion())
    state = AmplitudeState.uniform(grid, phi, cfg.params, modes, beta)
    if cfg.noise:
        rng = np.random.default_rng(cfg.seed)
        state = state.with_etas(state.etas * (1.0 + cfg.noise * rng.standard_normal(state.etas.shape)))
    return state


def eshelby_problem(cfg: RunConfig) -> EshelbyProblem:
    phi = equilibrium_amplitude(cfg.params, 1.0)
    inc = cfg.inclusion()
    return EshelbyProblem(inc.radius, inc.eigenstrain, IsotropicElasticity.from_amplitude(phi), inc.center)


def bulk_mask(cfg: RunConfig, grid: Grid2D) -> np.ndarray:
    inc = cfg.inclusion()
    return np.abs(signed_distance_circle(grid.coords, inc, grid)) > 3.0 * inc.width


def analyse(cfg: RunConfig, state: AmplitudeState, relaxation: RelaxationReport, label: str = "run") -> RunResult:
    grid = state.grid
    inc = cfg.inclusion()
    sigma = stress_from_amplitudes(state)
    prob = eshelby_problem(cfg)
    exact = sample_stress_field(prob, grid)
    d = signed_distance_circle(grid.coords, inc, grid)
    bulk = np.abs(d) > 3.0 * inc.width

    rel = {}
    for name, arr in sigma.components().items():
        c = compare_fields(arr, exact.components()[name], bulk)
        rel[name] = {"value": c.value, "exact_zero": c.exact_zero}

    interior = d < -3.0 * inc.width
    ic = int(round(inc.center[0] / grid.dx)), int(round(inc.center[1] / grid.dy))
    plateau = float(sigma.syy[interior].mean()) if interior.any() else float(sigma.syy[ic])

    prof = line_profile(sigma.syy, grid, "x", inc.center[1])
    prof_exact = line_profile(exact.syy, grid, "x", inc.center[1])
    r = prof.coordinates - inc.center[0]
    right = r >= 0
    ext = right & (r >= 1.5 * inc.radius) & (r <= 4.0 * inc.radius)

    div_x, div_y = sigma.divergence(grid)
    s_norm = np.sqrt(sum(np.sum(c[bulk] ** 2) for c in sigma.components().values()))
    div_norm = np.sqrt(np.sum(div_x[bulk] ** 2) + np.sum(div_y[bulk] ** 2))
    # divergence carries an extra inverse length; measure it against sigma / R
    divergence_ratio = float(div_norm * inc.radius / s_norm) if s_norm > 0 else 0.0

    lam, mu = lame_constants(equilibrium_amplitude(cfg.params, 1.0))
    report = ComparisonReport(
        label=label,
        eigenstrain=inc.eigenstrain,
        width=inc.width,
        converged=relaxation.converged,
        steps=relaxation.steps_taken,
        final_residual=relaxation.final_residual,
        rel_l2_bulk=rel,
        interior_plateau=plateau,
        analytic_interior=-(2.0 / 3.0) * (lam + mu) * inc.eigenstrain,
        exterior_decay_exponent=decay_exponent(r[ext], prof.values[ext]),
        exterior_decay_exponent_mean_removed=decay_exponent(r[ext], prof.values[ext] - sigma.syy.mean()),
        transition_width=transition_width(r[right], prof.values[right]),
        syy_min=float(prof.values.min()),
        syy_max=float(prof.values.max()),
        divergence_ratio=divergence_ratio,
        final_energy=relaxation.energy_history[-1][1] if relaxation.energy_history else float("nan"),
    )
    return RunResult(cfg, state, relaxation, sigma, exact, report, r, prof.values, prof_exact.values)


def metadata(cfg: RunConfig, result: RunResult | None = None) -> dict:
    grid = cfg.grid()
    meta = {
        "code_version": __version__,
        "config": cfg.as_dict(),
        "grid": {"lx": grid.lx, "ly": grid.ly, "nx": grid.nx, "ny": grid.ny},
        "stress_conjugate_mode_factor": CONJUGATE_MODE_FACTOR,
        "effective_tol": cfg.effective_solver().tol,
    }
    if result is not None:
        meta["converged"] = result.relaxation.converged
        meta["steps"] = result.relaxation.steps_taken
        meta["final_residual"] = result.relaxation.final_residual
    return meta


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(type(o))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, default=_json_default, allow_nan=True) + "\n")


def write_outputs(result: RunResult, out: Path) -> None:
    cfg = result.config
    out.mkdir(parents=True, exist_ok=True)
    grid = result.state.grid
    (out / "config.txt").write_text(dump_config(cfg))
    write_json(out / "metadata.json", metadata(cfg, result))
    write_json(out / "report.json", result.report.to_dict())
    write_profile_csv(out / "profile_x.csv", result.profile_r, result.profile_apfc, result.profile_analytic)
    if "y" in cfg.profile_axes:
        inc = cfg.inclusion()
        py = line_profile(result.stress.syy, grid, "y", inc.center[0])
        pye = line_profile(result.analytic.syy, grid, "y", inc.center[0])
        write_profile_csv(out / "profile_y.csv", py.coordinates - inc.center[1], py.values, pye.values)
    with open(out / "energy.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "energy"])
        w.writerows(result.relaxation.energy_history)
    if cfg.dump_fields:
        for j, eta in enumerate(result.state.etas, 1):
            write_field(out / f"eta{j}.bin", f"eta{j}", grid, eta)
        write_field(out / "beta.bin", "beta", grid, result.state.beta)
        for name, arr in result.stress.components().items():
            write_field(out / f"{name}_apfc.bin", f"{name}_apfc", grid, arr)
        for name, arr in result.analytic.components().items():
            write_field(out / f"{name}_analytic.bin", f"{name}_analytic", grid, arr)
    if cfg.figures:
        from . import plots

        plots.stress_maps(result, out / "stress_maps.png")
        plots.profile_plot(result, out / "profile_x.png")


def run_single(cfg: RunConfig, out_dir=None, label: str = "run", write: bool = True) -> RunResult:
    """Relax the inclusion state, compute APFC and analytic stress, write artifacts."""
    t0 = time.perf_counter()
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    state = build_state(cfg)
    ckpt = out / "checkpoints"

    def dump_checkpoint(step, st):
        if step % cfg.dump_every == 0:
            for j, eta in enumerate(st.etas, 1):
                write_field(ckpt / f"eta{j}_{step:07d}.bin", f"eta{j}", st.grid, eta)

    checkpointing = write and cfg.dump_every > 0
    if checkpointing:
        ckpt.mkdir(parents=True, exist_ok=True)
    state, relaxation = relax(state, cfg.effective_solver(), dump_checkpoint if checkpointing else None)
    result = analyse(cfg, state, relaxation, label)
    result.report.runtime_s = time.perf_counter() - t0
    if write:
        write_outputs(result, out)
    log.info("%s: converged=%s steps=%d plateau=%.4g", label, relaxation.converged,
             relaxation.steps_taken, result.report.interior_plateau)
    return result


def _failed_report(label: str, sub: RunConfig, exc: Exception) -> ComparisonReport:
    return ComparisonReport(
        label=label, eigenstrain=sub.eigenstrain, width=sub.width_a0 * sub.a0,
        converged=False, steps=0, final_residual=float("nan"), error=f"{type(exc).__name__}: {exc}",
    )


def run_sweep(cfg: RunConfig, out_dir=None, write: bool = True) -> list[RunResult | ComparisonReport]:
    """One run per sweep value; failures are recorded and the sweep continues.

    Writes per-run directories, ``sweep_profiles.csv`` and ``sweep_extrema.csv``.
    """
    if not cfg.sweep_values:
        raise ConfigError("sweep requires a non-empty sweep.values list")
    if cfg.sweep_parameter not in ("width_a0", "eigenstrain"):
        raise ConfigError("sweep.parameter must be width_a0 or eigenstrain")
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    results: list[RunResult | ComparisonReport] = []
    for value in cfg.sweep_values:
        label = f"{cfg.sweep_parameter}={value:g}"
        sub = cfg.with_sweep_value(value)
        try:
            results.append(run_single(sub, out / label, label, write))
        except (DivergenceError, ValueError, FloatingPointError) as exc:
            log.error("%s failed: %s", label, exc)
            results.append(_failed_report(label, sub, exc))
    if write:
        out.mkdir(parents=True, exist_ok=True)
        write_sweep_tables(cfg, results, out)
        write_json(out / "sweep_report.json", [sweep_report(r).to_dict() for r in results])
        if cfg.figures:
            from . import plots

            plots.sweep_plot(cfg, results, out / "sweep_profiles.png")
    return results


def sweep_report(item) -> ComparisonReport:
    return item.report if isinstance(item, RunResult) else item


def normalized_extrema(results) -> list[dict]:
    """Extrema of sigma_yy(x, 0) divided by the eigenstrain, with deviations.

    The deviation is ``(m - m_ref) / |m_ref|`` where ``m = min sigma_yy / eps*``
    and the reference is the smallest eigenstrain of the sweep.
    """
    rows = []
    ok = [r for r in results if isinstance(r, RunResult) and r.report.eigenstrain != 0]
    if not ok:
        return rows
    ref = min(ok, key=lambda r: abs(r.report.eigenstrain)).report
    ref_min = ref.syy_min / ref.eigenstrain
    ref_max = ref.syy_max / ref.eigenstrain
    for r in ok:
        rep = r.report
        nmin = rep.syy_min / rep.eigenstrain
        nmax = rep.syy_max / rep.eigenstrain
        rows.append({
            "label": rep.label,
            "eigenstrain": rep.eigenstrain,
            "width": rep.width,
            "syy_min": rep.syy_min,
            "syy_max": rep.syy_max,
            "normalized_min": nmin,
            "normalized_max": nmax,
            "min_deviation": (nmin - ref_min) / abs(ref_min),
            "max_deviation": (nmax - ref_max) / abs(ref_max),
            "transition_width": rep.transition_width,
            "interior_plateau": rep.interior_plateau,
        })
    return rows


def write_sweep_tables(cfg: RunConfig, results, out: Path) -> None:
    ok = [r for r in results if isinstance(r, RunResult)]
    if ok:
        with open(out / "sweep_profiles.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x"] + [f"sigma_yy_apfc[{r.report.label}]" for r in ok] + ["sigma_yy_analytic"])
            cols = [ok[0].profile_r] + [r.profile_apfc for r in ok] + [ok[0].profile_analytic]
            for row in zip(*cols):
                w.writerow([repr(float(v)) for v in row])
    rows = normalized_extrema(results)
    if rows:
        with open(out / "sweep_extrema.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
