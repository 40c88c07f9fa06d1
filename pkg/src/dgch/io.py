"""CSV, convergence-report and legacy VTK writers."""
import csv
from fractions import Fraction
import math
from pathlib import Path

import numpy as np

DIAGNOSTICS_HEADER = ("t", "energy", "mass", "newton_iters", "clamp_events")
REPORT_HEADER = ("h_label", "dof", "l2_error", "order")


def _fmt(x):
    return format(float(x), ".17g")


def write_diagnostics_csv(series, path):
    if len(series) == 0:
        raise ValueError("refusing to write an empty diagnostics series")
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(DIAGNOSTICS_HEADER)
            for t, e, m, it, cl in series.rows():
                w.writerow((_fmt(t), _fmt(e), _fmt(m), int(it), int(cl)))
    except OSError as exc:
        raise OSError(f"cannot write diagnostics to {path}: {exc}") from exc
    return path


def read_diagnostics_csv(path):
    from .diagnostics import DiagnosticsSeries

    series = DiagnosticsSeries()
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != DIAGNOSTICS_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for row in reader:
            series.append(float(row[0]), float(row[1]), float(row[2]), int(row[3]), int(row[4]))
    return series


def h_label(width, nx):
    """Table-style grid label for Δx = width / (2 nx), e.g. ``1/8`` or ``pi/8``."""
    dx = width / (2 * nx)
    ratio = dx / math.pi
    frac = Fraction(ratio).limit_denominator(4096)
    if abs(float(frac) - ratio) < 1e-12 * max(1.0, ratio):
        return "pi" if frac == 1 else (f"pi/{frac.denominator}" if frac.numerator == 1 else f"{frac.numerator}pi/{frac.denominator}")
    frac = Fraction(dx).limit_denominator(4096)
    if abs(float(frac) - dx) < 1e-12 * max(1.0, dx):
        return str(frac)
    return _fmt(dx)


def write_convergence_report(rows, path):
    """``rows``: iterable of (h_label, dof, l2_error, order or None)."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_HEADER)
            for label, dof, err, order in rows:
                w.writerow((label, int(dof), _fmt(err), "-" if order is None else _fmt(order)))
    except OSError as exc:
        raise OSError(f"cannot write convergence report to {path}: {exc}") from exc
    return path


def write_field_snapshot(space, xi, t, path, name="u"):
    """Legacy ASCII VTK unstructured grid; vertices are duplicated per triangle."""
    ref = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    phi = space.basis.values(ref)
    vals = space.local(xi) @ phi.T
    pts = space.mesh.vertices[space.mesh.triangles].reshape(-1, 2)
    N = space.N
    lines = [
        "# vtk DataFile Version 3.0",
        f"{name} at t={_fmt(t)}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {3 * N} double",
    ]
    lines += [f"{_fmt(x)} {_fmt(y)} 0" for x, y in pts]
    lines.append(f"CELLS {N} {4 * N}")
    lines += [f"3 {3 * k} {3 * k + 1} {3 * k + 2}" for k in range(N)]
    lines.append(f"CELL_TYPES {N}")
    lines += ["5"] * N
    lines += [f"POINT_DATA {3 * N}", f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
    lines += [_fmt(v) for v in vals.ravel()]
    path = Path(path)
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write snapshot to {path}: {exc}") from exc
    return path
