"""CSV artifacts and the stdout summary block."""

import csv
from pathlib import Path

from geoball.ballvolume import BallProfile
from geoball.errors import IoError
from geoball.verify import CheckResult, ComparisonCurve

PROFILE_COLUMNS = ("t", "A", "Aprime", "V", "ric_radial_int", "scal_int", "hess_sq_int", "trS_sq_int")
CHECK_COLUMNS = ("t", "lhs", "rhs", "residual", "tolerance", "pass")
BANNER = "=" * 60


def format_float(x):
    """17 significant digits: lossless for doubles."""
    return format(float(x), ".17g")


def rows_for(obj):
    """Header and rows for a BallProfile, CheckResult or ComparisonCurve."""
    if isinstance(obj, BallProfile):
        columns = (obj.t_grid, obj.A, obj.Aprime, obj.V, obj.ric_radial_integral, obj.scal_integral,
                   obj.hess_sq_integral, obj.trS_sq_integral)
        return PROFILE_COLUMNS, [[format_float(c[i]) for c in columns] for i in range(len(obj.t_grid))]
    if isinstance(obj, CheckResult):
        rows = []
        for i in range(len(obj.t_grid)):
            ok = abs(obj.residuals[i]) <= obj.tolerance[i]
            rows.append([format_float(obj.t_grid[i]), format_float(obj.lhs[i]), format_float(obj.rhs[i]),
                         format_float(obj.residuals[i]), format_float(obj.tolerance[i]),
                         "true" if ok else "false"])
        return CHECK_COLUMNS, rows
    if isinstance(obj, ComparisonCurve):
        extra = sorted(obj.extra)
        header = ("t", "lhs", "rhs", "margin") + tuple(extra)
        columns = [obj.t_grid, obj.lhs, obj.rhs, obj.margin] + [obj.extra[k] for k in extra]
        return header, [[format_float(c[i]) for c in columns] for i in range(len(obj.t_grid))]
    raise ValueError(f"cannot write {type(obj).__name__} as CSV")


def emit_csv(obj, path):
    """
    Write a profile, check result or comparison curve as CSV with '\\n' line ends.

    Raises:
        IoError: the file cannot be written
    """
    header, rows = rows_for(obj)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def summary_lines(title, config, results=(), artifacts=()):
    lines = [BANNER, title, BANNER, f"Family:     {config.family.describe()}",
             f"Base point: {config.base_point.coords} ({config.base_point.chart_id})",
             f"Rays:       t_max={config.ray.t_max:g} step={config.ray.step:g} level={config.level}"]
    if config.beyond_safe_radius:
        lines.append(f"WARNING: t_max beyond safe_radius={config.family.trusted_radius:.6g} (override set)")
    for result in results:
        verdict = "PASS" if result.passed else "FAIL"
        lines.append(f"  {result.name:<24} {verdict}  max|residual|={result.max_abs_residual:.3e}")
        for note in result.notes:
            lines.append(f"      note: {note}")
    for path in artifacts:
        lines.append(f"  wrote {path}")
    lines.append(BANNER)
    return lines


def print_summary(title, config, results=(), artifacts=()):
    for line in summary_lines(title, config, results, artifacts):
        print(line)
