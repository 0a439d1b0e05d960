"""JSON/CSV serialisation of solution sets, traces and pseudospectrum grids.

JSON output is deterministic (sorted keys, fixed float repr) so two runs with
the same configuration produce identical files; only ``manifest.json``
carries a timestamp.
"""

import csv
import io
import json
import platform
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .polysys import DesignSpec
from .solver import DesignSolution, PathStats, SolutionSet


def provenance(spec: DesignSpec, seed=None):
    """Header embedded in every output file."""
    return {
        "tool": "marxgen",
        "version": __version__,
        "seed": seed,
        "spec": spec.to_dict(),
    }


def manifest(spec, seed, files, extra=None):
    out = provenance(spec, seed)
    out.update({
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "files": sorted(files),
    })
    if extra:
        out.update(extra)
    return out


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def read_json(path):
    return json.loads(Path(path).read_text())


# --------------------------------------------------------------------------
# solutions


def solution_set_to_dict(sset: SolutionSet):
    return {
        "provenance": provenance(sset.spec, sset.seed),
        "incomplete": sset.incomplete,
        "path_stats": sset.path_stats.to_dict(),
        "solutions": [dict(index=i + 1, **s.to_dict())
                      for i, s in enumerate(sset.solutions)],
    }


def solution_set_from_dict(d):
    prov = d.get("provenance", {})
    spec = DesignSpec.from_dict(prov.get("spec") or d["spec"])
    sols = tuple(DesignSolution.from_dict(s) for s in d["solutions"])
    return SolutionSet(spec=spec, solutions=sols,
                       path_stats=PathStats(**d.get("path_stats", {})),
                       incomplete=bool(d.get("incomplete", False)),
                       seed=prov.get("seed"))


def _comment_header(prov):
    spec = prov["spec"]
    return (f"# {prov['tool']} {prov['version']} seed={prov['seed']} n={spec['n']} "
            f"alpha={' '.join(map(str, spec['alpha']))} c={spec['c']} ell={spec['ell']}\n")


def solution_set_to_csv(sset: SolutionSet):
    n = sset.spec.n
    buf = io.StringIO()
    buf.write(_comment_header(provenance(sset.spec, sset.seed)))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index"] + [f"n2c{i}/c" for i in range(1, n + 1)]
               + ["condition", "regular", "residual"])
    for i, s in enumerate(sset.solutions, start=1):
        w.writerow([i] + [repr(float(x)) for x in s.scaled]
                   + [repr(float(s.condition)), int(s.regular), repr(float(s.residual_inf))])
    return buf.getvalue()


def read_solutions(path):
    """Load solutions from a JSON file written by this package.

    Accepts a full solution set, a single solution (``{"k": ...}``) or a
    ``regular.json`` document (``{"regular": [...]}``). Returns
    ``(spec_or_None, [DesignSolution, ...])``.
    """
    d = read_json(path)
    spec = None
    prov = d.get("provenance") or {}
    if prov.get("spec") or d.get("spec"):
        spec = DesignSpec.from_dict(prov.get("spec") or d["spec"])
    if "solutions" in d:
        sols = d["solutions"]
    elif "regular" in d:
        sols = d["regular"]
    elif "k" in d:
        sols = [d]
    else:
        raise ValueError(f"{path}: no solutions found")
    return spec, [DesignSolution.from_dict(s) for s in sols]


# --------------------------------------------------------------------------
# simulation traces


def trace_columns(n):
    return (["t"] + [f"v_c{i}" for i in range(1, n + 1)]
            + [f"v_{i}" for i in range(1, n + 2)]
            + [f"i_{i}" for i in range(1, n + 1)] + ["i_L", "v_L", "energy"])


def trace_to_csv(trace, spec, seed=None):
    buf = io.StringIO()
    buf.write(_comment_header(provenance(spec, seed)))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trace_columns(trace.n))
    for t, x, vl, e in zip(trace.times, trace.states, trace.v_L, trace.energy):
        w.writerow([repr(float(t))] + [repr(float(v)) for v in x]
                   + [repr(float(vl)), repr(float(e))])
    return buf.getvalue()


def trace_to_dict(trace, spec, seed=None):
    return {
        "provenance": provenance(spec, seed),
        "columns": trace_columns(trace.n),
        "v0": trace.v0,
        "times": trace.times.tolist(),
        "states": trace.states.tolist(),
        "v_L": trace.v_L.tolist(),
        "energy": trace.energy.tolist(),
    }


# --------------------------------------------------------------------------
# pseudospectra


def grid_to_csv(grid, spec=None, seed=None):
    buf = io.StringIO()
    if spec is not None:
        buf.write(_comment_header(provenance(spec, seed)))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "sigma_min"])
    for row, y in enumerate(grid.im):
        for col, x in enumerate(grid.re):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(grid.sigma_min[row, col]))])
    return buf.getvalue()


def grid_to_dict(grid, spec=None, seed=None):
    out = {
        "re": grid.re.tolist(),
        "im": grid.im.tolist(),
        "sigma_min": grid.sigma_min.tolist(),
        "levels": [{"epsilon": eps, "area": area}
                   for eps, area in grid.level_areas().items()],
    }
    if spec is not None:
        out["provenance"] = provenance(spec, seed)
    return out


def read_csv_rows(text):
    """Data rows of a CSV written here (comment header skipped)."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.reader(lines))
