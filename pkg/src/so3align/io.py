"""Pose CSV ingestion and JSON/CSV report emission."""

import csv
import json
import logging
import math
import re
from pathlib import Path

import numpy as np

from .align import GlobalAlignment
from .errors import EmptyFile, NonUnitQuaternion, ParseError
from .evaluation import ErrorReport, ScalingReport
from .matchers import MatchResult
from .permutations import SignedPermutation, to_mapping
from .rotation import RotationSet, as_matrices, quat_to_rotation, rotation_to_quat

log = logging.getLogger(__name__)

FIELDS = ("t", "x", "y", "z", "qx", "qy", "qz", "qw")
DEFAULT_COLUMNS = FIELDS
QUAT_NORM_TOL = 1e-3


def parse_columns(spec):
    """``"t,x,y,z,qx,qy,qz,qw"`` -> tuple; ``_`` or ``-`` marks a skipped column."""
    cols = tuple(c.strip().lower() for c in spec.split(",")) if isinstance(spec, str) else tuple(spec)
    named = [c for c in cols if c not in ("_", "-", "")]
    if sorted(named) != sorted(FIELDS):
        raise ParseError(f"column order must name each of {FIELDS} once, got {cols}")
    return cols


def _header_field(name):
    text = re.sub(r"\[.*?\]", "", name).strip().lower().lstrip("#").strip()
    tokens = [t for t in re.split(r"[^a-z0-9]+", text) if t]
    if not tokens:
        return None
    first, last = tokens[0], tokens[-1]
    if len(tokens) == 1 and tokens[0] in FIELDS:
        return tokens[0]
    if first in ("t", "time", "timestamp", "stamp", "sec", "secs"):
        return "t"
    if last in ("x", "y", "z", "w") and (first.startswith("q") or "quat" in text or "orientation" in text):
        return "q" + last
    if last in ("x", "y", "z") and (first.startswith("p") or "pos" in text or "trans" in text):
        return last
    return None


def _resolve_header(header):
    names = [_header_field(h) for h in header]
    if sorted(n for n in names if n) == sorted(FIELDS):
        return tuple(n or "_" for n in names)
    return None


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def ingest_pose_csv(path, columns=None, quat_convention="hamilton", time_scale=1.0):
    """Read a pose CSV into a timestamped :class:`RotationSet`.

    Column order comes from ``columns`` when given, else from a recognised
    header, else the default ``t,x,y,z,qx,qy,qz,qw``.  Quaternions are
    normalised after a norm check; JPL quaternions are conjugated.
    Translations are parsed and dropped.
    """
    if quat_convention not in ("hamilton", "jpl"):
        raise ValueError("quat_convention must be 'hamilton' or 'jpl'")
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(n, r) for n, r in enumerate(csv.reader(fh), start=1) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyFile(f"{path} has no rows")
    cols = parse_columns(columns) if columns is not None else None
    first_line, first = rows[0]
    if not all(_is_number(c) for c in first if c.strip()):
        rows = rows[1:]
        if cols is None:
            cols = _resolve_header(first)
    if cols is None:
        cols = DEFAULT_COLUMNS
    if not rows:
        raise EmptyFile(f"{path} has a header but no data rows")
    index = {name: k for k, name in enumerate(cols) if name in FIELDS}

    t = np.empty(len(rows))
    q = np.empty((len(rows), 4))
    for k, (line, row) in enumerate(rows):
        if len(row) < len(cols):
            raise ParseError(f"{path}:{line}: expected {len(cols)} columns, got {len(row)}", row=line)
        vals = {}
        for name, c in index.items():
            try:
                v = float(row[c])
            except ValueError:
                raise ParseError(f"{path}:{line}: column {name!r} is not a number: {row[c]!r}", row=line, column=name) from None
            if not math.isfinite(v):
                raise ParseError(f"{path}:{line}: column {name!r} is not finite", row=line, column=name)
            vals[name] = v
        t[k] = vals["t"] * time_scale
        q[k] = (vals["qw"], vals["qx"], vals["qy"], vals["qz"])
        norm = np.linalg.norm(q[k])
        if abs(norm - 1.0) > QUAT_NORM_TOL:
            raise NonUnitQuaternion(f"{path}:{line}: quaternion norm {norm:.6f} is not 1", row=line, column="q")
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    if quat_convention == "jpl":
        q[:, 1:] *= -1.0
    log.info("%s: %d poses read, translation columns ignored", path, len(rows))
    return RotationSet(quat_to_rotation(q), t)


def export_pose_csv(rs, path, header=True):
    """Write a RotationSet in the default column order (zero translation)."""
    m = as_matrices(rs)
    q = rotation_to_quat(m)
    t = rs.timestamps if isinstance(rs, RotationSet) and rs.timestamps is not None else np.arange(m.shape[0], dtype=float)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(FIELDS)
        for k in range(m.shape[0]):
            w.writerow([repr(float(t[k])), 0.0, 0.0, 0.0] + [repr(float(v)) for v in (q[k, 1], q[k, 2], q[k, 3], q[k, 0])])


# --------------------------------------------------------------------------
# reports


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def match_summary(res, axis):
    return {
        "axis": axis,
        "kind": res.kind,
        "rotation": np.asarray(res.rotation).tolist(),
        "score": _num(res.score),
        "shifts": [int(s) for s in res.shifts],
        "iterations": int(res.iterations),
        "converged": bool(res.converged),
    }


def alignment_to_dict(ga):
    return {
        "type": "global_alignment",
        "l_star": ga.l_star.matrix.tolist(),
        "l_star_mapping": to_mapping(ga.l_star),
        "r_bar": np.asarray(ga.r_bar).tolist(),
        "score": _num(ga.score),
        "converged": bool(ga.converged),
        "refined": bool(ga.refined),
        "hypothesis_scores": [_num(s) for s in ga.hypothesis_scores],
        "hypotheses": [to_mapping(h) for h in ga.hypotheses],
        "per_axis": [match_summary(r, "xyz"[i]) for i, r in enumerate(ga.per_axis)],
    }


def alignment_from_dict(d):
    """Rebuild a GlobalAlignment from :func:`alignment_to_dict` output.

    Per-axis aligned point sets are not serialised and come back empty.
    """
    per_axis = tuple(
        MatchResult(
            rotation=np.array(p["rotation"], dtype=np.float64),
            score=p["score"] if p["score"] is not None else float("nan"),
            aligned_source=np.empty((0, 3)),
            shifts=tuple(p["shifts"]),
            iterations=p["iterations"],
            converged=p["converged"],
            kind=p["kind"],
        )
        for p in d["per_axis"]
    )
    from .permutations import from_mapping

    return GlobalAlignment(
        l_star=SignedPermutation.from_matrix(np.array(d["l_star"])),
        r_bar=np.array(d["r_bar"], dtype=np.float64),
        per_axis=per_axis,
        score=d["score"],
        hypothesis_scores=np.array([s if s is not None else np.nan for s in d["hypothesis_scores"]]),
        hypotheses=[from_mapping(h) for h in d["hypotheses"]],
        converged=d["converged"],
        refined=d.get("refined", False),
    )


def load_alignment(path):
    with Path(path).open(encoding="utf-8") as fh:
        return alignment_from_dict(json.load(fh))


def error_report_to_dict(rep):
    return {
        "type": "error_report",
        "n_pairs": int(len(rep.per_pair_errors)),
        "mae_deg": _num(rep.mae),
        "rmse_deg": _num(rep.rmse),
        "median_deg": _num(rep.median),
        "success_rates": {f"{t:g}": _num(v) for t, v in rep.success_rates.items()},
        "runtime_s": _num(rep.runtime),
    }


def scaling_report_to_dict(rep):
    return {
        "type": "scaling_report",
        "sizes": [int(n) for n in rep.sizes],
        "times_s": [float(t) for t in rep.times],
        "loglog_slope": _num(rep.loglog_slope),
        "window_min": int(rep.window_min),
        "mode": rep.mode,
        "backend": rep.backend,
    }


def report_to_dict(report):
    if isinstance(report, GlobalAlignment):
        return alignment_to_dict(report)
    if isinstance(report, ErrorReport):
        return error_report_to_dict(report)
    if isinstance(report, ScalingReport):
        return scaling_report_to_dict(report)
    if isinstance(report, dict):
        return report
    raise TypeError(f"cannot serialise {type(report).__name__}")


def write_json(data, path):
    text = json.dumps(data, indent=2)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def emit_report(report, path, fmt="json"):
    """Write a report as JSON, or its tabular part as CSV.

    CSV layouts: error reports give ``index_a,index_b,error_deg`` rows,
    scaling reports ``n,time_s``.
    """
    if fmt == "json":
        write_json(report_to_dict(report), path)
        return
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if isinstance(report, ErrorReport):
            w.writerow(["index_a", "index_b", "error_deg"])
            for (i, j), e in zip(report.pairs, report.per_pair_errors):
                w.writerow([int(i), int(j), repr(float(e))])
        elif isinstance(report, ScalingReport):
            w.writerow(["n", "time_s"])
            for n, t in zip(report.sizes, report.times):
                w.writerow([int(n), repr(float(t))])
        else:
            raise TypeError(f"no CSV layout for {type(report).__name__}")


def write_histogram_csv(hist, path):
    """Azimuth histogram as ``bin_lo_deg,bin_hi_deg,count`` rows."""
    hist = np.asarray(hist, dtype=np.float64)
    width = 360.0 / hist.shape[0]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo_deg", "bin_hi_deg", "count"])
        for k, c in enumerate(hist):
            w.writerow([f"{k * width:g}", f"{(k + 1) * width:g}", int(c) if float(c).is_integer() else c])
