"""Scenario runs and convergence studies with file output.

Every run writes, into its output directory:

* ``<solver>_snapshots.csv``  columns ``t, x, u, phi, phi_x, v`` at each sample,
* ``<solver>_diagnostics.csv``  the diagnostics record per sample,
* ``<solver>_slope.csv``  ``t, min_slope`` after every step,
* ``cross_difference.csv``  ``t, sup_diff`` (mode ``both`` only),
* ``manifest.json``.

Guarded terminations (wave breaking, blow-up) still write everything that was
computed before the guard fired.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .config import SolverConfig
from .diagnostics import CSV_HEADER
from .diffeo import compose_field
from .errors import BlowUpError, MonotonicityLostError
from .euler import integrate_eulerian
from .geodesic import integrate_geodesic
from .output import write_csv, write_json

MODES = ("eulerian", "lagrangian", "both")
AXES = ("dt", "N")
STATUS_EXIT = {"completed": 0, "breaking-detected": 3, "blow-up": 4}
SNAPSHOT_HEADER = ("t", "x", "u", "phi", "phi_x", "v")
CONVERGENCE_HEADER = ("level", "axis_value", "dt", "N", "error", "successive_diff", "order")


@dataclass
class RunManifest:
    config: dict
    config_hash: str
    mode: str
    files: dict = field(default_factory=dict)
    status: str = "completed"
    message: str = ""
    wall_time: float = 0.0

    @property
    def exit_code(self):
        return STATUS_EXIT[self.status]

    def as_dict(self):
        return {
            "config": self.config,
            "config_hash": self.config_hash,
            "mode": self.mode,
            "files": dict(sorted(self.files.items())),
            "status": self.status,
            "message": self.message,
            "wall_time": self.wall_time,
        }


def _guarded(fn, *args, **kwargs):
    """Run an integrator; return ``(run, status, message)`` instead of raising on guards."""
    try:
        return fn(*args, **kwargs), "completed", ""
    except MonotonicityLostError as exc:
        return exc.partial, "breaking-detected", str(exc)
    except BlowUpError as exc:
        return exc.partial, "blow-up", str(exc)


def _snapshot_rows(t, x, u, phi, v):
    phi_x = 1.0 + spectral.derivative(phi.displacement, 1)
    lift = phi.lift_values()
    return [(t, *vals) for vals in zip(x, u, lift, phi_x, v)]


def eulerian_outputs(run):
    """Snapshot rows, diagnostics rows and slope trace of an Eulerian run."""
    rows = []
    for state, phi in zip(run.states, run.flows):
        x = spectral.grid(state.u.shape[0])
        rows.extend(_snapshot_rows(state.t, x, state.u, phi, compose_field(state.u, phi)))
    return rows, [r.as_row() for r in run.records], list(run.slope_trace)


def lagrangian_outputs(run):
    rows = []
    for state, u in zip(run.states, run.eulerian):
        x = spectral.grid(u.shape[0])
        rows.extend(_snapshot_rows(state.t, x, u, state.phi, state.v))
    return rows, [r.as_row() for r in run.records], list(run.slope_trace)


def cross_difference(e_run, g_run):
    """``(t, sup|u_E - v o phi^{-1}|)`` at the sample times both runs reached."""
    out = []
    for se, sg, ug in zip(e_run.states, g_run.states, g_run.eulerian):
        if abs(se.t - sg.t) > 1e-12:
            raise ValueError("runs were sampled at different times")
        out.append((se.t, float(np.max(np.abs(se.u - ug)))))
    return out


_SEVERITY = ("completed", "breaking-detected", "blow-up")


def run_scenario(cfg, mode, out_dir):
    """Run the configured solver(s) and write all outputs; returns the manifest."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    start = time.perf_counter()
    manifest = RunManifest(cfg.as_dict(), cfg.content_hash(), mode)
    u0 = cfg.initial_field()
    runs, messages = {}, []
    if mode in ("eulerian", "both"):
        runs["eulerian"] = _guarded(integrate_eulerian, u0, cfg.b, cfg)
    if mode in ("lagrangian", "both"):
        runs["lagrangian"] = _guarded(integrate_geodesic, u0, cfg.b, cfg)
    for name, (run, status, message) in runs.items():
        rows, diag, trace = (eulerian_outputs if name == "eulerian" else lagrangian_outputs)(run)
        manifest.files[f"{name}_snapshots"] = write_csv(f"{out_dir}/{name}_snapshots.csv", SNAPSHOT_HEADER, rows)
        manifest.files[f"{name}_diagnostics"] = write_csv(f"{out_dir}/{name}_diagnostics.csv", CSV_HEADER, diag)
        manifest.files[f"{name}_slope"] = write_csv(f"{out_dir}/{name}_slope.csv", ("t", "min_slope"), trace)
        if _SEVERITY.index(status) > _SEVERITY.index(manifest.status):
            manifest.status = status
        if message:
            messages.append(f"{name}: {message}")
    if mode == "both":
        diff = cross_difference(runs["eulerian"][0], runs["lagrangian"][0])
        manifest.files["cross_difference"] = write_csv(f"{out_dir}/cross_difference.csv", ("t", "sup_diff"), diff)
    manifest.message = "; ".join(messages)
    manifest.wall_time = time.perf_counter() - start
    manifest.files["manifest"] = f"{out_dir}/manifest.json"
    write_json(manifest.files["manifest"], manifest.as_dict())
    return manifest


def _final_field(cfg, mode):
    u0 = cfg.initial_field()
    if mode == "lagrangian":
        return integrate_geodesic(u0, cfg.b, cfg).eulerian[-1]
    return integrate_eulerian(u0, cfg.b, cfg).states[-1].u


@dataclass
class ConvergenceTable:
    axis: str
    levels: list  # SolverConfig per level
    errors: np.ndarray  # sup error against the finest level
    successive: np.ndarray  # sup difference to the next finer level
    orders: np.ndarray  # log2 of successive-difference ratios

    @property
    def exact(self):
        """True when every difference vanished, e.g. for constant data."""
        return bool(np.all(self.successive[np.isfinite(self.successive)] == 0.0))

    @property
    def fitted_order(self):
        """Order from the two finest successive differences (Richardson estimate)."""
        finite = self.orders[np.isfinite(self.orders)]
        return float(finite[-1]) if finite.size else float("nan")

    def rows(self):
        out = []
        for i, cfg in enumerate(self.levels):
            axis_value = cfg.dt if self.axis == "dt" else 1.0 / cfg.N
            out.append((i, axis_value, cfg.dt, cfg.N, self.errors[i], self.successive[i], self.orders[i]))
        return out


def _restrict(u, N):
    """Values of a finer grid field at the nodes of the ``N``-point grid."""
    step = u.shape[0] // N
    return u[::step]


def convergence_study(cfg, axis, levels, mode="eulerian"):
    """Halve ``dt`` (or double ``N``) ``levels - 1`` times and compare final fields.

    Errors are sup-norm differences on the coarsest grid's nodes. ``orders[i]``
    is ``log2(d_i / d_{i+1})`` for successive differences ``d_i = |u_i - u_{i+1}|``,
    which tends to the convergence order for algebraic convergence.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    if levels < 3:
        raise ValueError("a convergence study needs at least 3 levels")
    if mode not in ("eulerian", "lagrangian"):
        raise ValueError("convergence mode must be eulerian or lagrangian")
    if axis == "dt":
        cfgs = [cfg.replace(dt=cfg.dt / 2**i, sample_every=cfg.sample_every * 2**i) for i in range(levels)]
    else:
        cfgs = [cfg.replace(N=cfg.N * 2**i) for i in range(levels)]
    finals = [_restrict(_final_field(c, mode), cfg.N) for c in cfgs]
    errors = np.array([np.max(np.abs(f - finals[-1])) for f in finals])
    successive = np.array([np.max(np.abs(a - b)) for a, b in zip(finals[:-1], finals[1:])] + [np.nan])
    orders = np.full(levels, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(levels - 2):
            if successive[i] > 0 and successive[i + 1] > 0:
                orders[i + 1] = np.log2(successive[i] / successive[i + 1])
    return ConvergenceTable(axis, cfgs, errors, successive, orders)


def write_convergence(table, out_dir):
    path = write_csv(f"{out_dir}/convergence_{table.axis}.csv", CONVERGENCE_HEADER, table.rows())
    return path
