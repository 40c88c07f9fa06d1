"""Experiment drivers: single runs with file output and mesh-ladder studies."""
import dataclasses
import logging
import os
from pathlib import Path

from .config import RunConfig, preset_config, serialize_config
from .diagnostics import convergence_order, l2_error
from .io import h_label, write_convergence_report, write_diagnostics_csv, write_field_snapshot
from .solver import StepFailure, run

log = logging.getLogger(__name__)

OUTPUT_ENV = "DGCH_OUTPUT_DIR"


def default_output_dir():
    return Path(os.environ.get(OUTPUT_ENV, "dgch-output"))


def run_to_directory(cfg: RunConfig, out_dir=None):
    """Run ``cfg`` writing diagnostics.csv, snapshots and config.txt into ``out_dir``.

    On a step failure the partial diagnostics and an ``error.txt`` record are
    still written, then the failure is re-raised.
    """
    out = Path(out_dir or cfg.out_dir or default_output_dir())
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(serialize_config(cfg))

    def snap(t, space, xi):
        write_field_snapshot(space, xi, t, out / f"u_{t:.6e}.vtk")

    result = run(cfg, on_snapshot=snap, raise_on_failure=False)
    write_diagnostics_csv(result.series, out / "diagnostics.csv")
    if result.error is not None:
        (out / "error.txt").write_text(f"{result.error}\n")
        raise result.error
    return result


def convergence_study(cfg: RunConfig, levels: int):
    """Run ``cfg`` on ``levels`` uniformly refined meshes; returns report rows.

    Each row is ``(h_label, dof, l2_error, order)`` with the error at the
    final time against the preset's exact solution.
    """
    rows, errors = [], []
    for k in range(levels):
        level = cfg.refined(k)
        if level.dt is not None and cfg.preset is None:
            level = dataclasses.replace(level, dt=cfg.dt)
        result = run(level)
        space = level.space()
        err = l2_error(space, result.state.xi, level.problem().exact_solution, result.state.t)
        errors.append(err)
        order = None if k == 0 else float(convergence_order(errors[-2:])[0])
        log.info("level %d: nx=%d dof=%d error=%.4e order=%s", k, level.nx, space.ndof, err, order)
        rows.append((h_label(level.domain[1] - level.domain[0], level.nx), space.ndof, err, order))
    return rows


def run_preset(name, overrides=None, mode="run", levels=4, out_dir=None):
    """Run a named preset; returns a process exit status."""
    try:
        cfg = preset_config(name, **(overrides or {}))
        if mode == "converge":
            rows = convergence_study(cfg, levels)
            out = Path(out_dir or cfg.out_dir or default_output_dir())
            out.mkdir(parents=True, exist_ok=True)
            write_convergence_report(rows, out / "convergence.csv")
        else:
            run_to_directory(cfg, out_dir)
    except StepFailure as exc:
        log.error("step failure: %s", exc)
        return 3
    return 0
