"""Command-line front end: ``marxgen {design,simulate,analyze,netlist,verify}``.

Exit codes: 0 success, 1 validation/verification failure, 2 enumeration
budget exhausted, 3 bad input.
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from . import io as mio
from .analysis import condition_numbers, mark_regular, pseudospectrum
from .circuit import build_A0, modal_check, simulate, verify_transfer
from .config import Tolerances
from .netlist import to_spice
from .polysys import DesignSpec
from .solver import Budget, enumerate_solutions, validate

logger = logging.getLogger("marxgen")

EXIT_OK, EXIT_FAIL, EXIT_BUDGET, EXIT_BAD_INPUT = 0, 1, 2, 3


class BadInput(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    n: int = 2
    alpha: Optional[Tuple[int, ...]] = None
    c: float = 1.0
    ell: float = 1.0
    v0: float = 1.0
    seed: int = 0
    out: str = "."
    format: Optional[str] = None  # None: both json and csv
    paths_budget: Optional[int] = None
    max_iterations: int = 20000
    jobs: int = 1
    samples: int = 1000
    resolution: int = 201
    solution: Optional[str] = None
    index: Optional[int] = None
    tolerances: Tolerances = field(default_factory=Tolerances)

    def spec(self):
        alpha = self.alpha or tuple(2 * i for i in range(1, self.n + 1))
        try:
            return DesignSpec(n=self.n, alpha=tuple(alpha), c=self.c, ell=self.ell)
        except ValueError as exc:
            raise BadInput(str(exc)) from exc

    def wants(self, fmt):
        return self.format is None or self.format == fmt

    @property
    def outdir(self):
        path = Path(self.out)
        path.mkdir(parents=True, exist_ok=True)
        return path


_TOL_FIELDS = [f.name for f in fields(Tolerances)]


def _common(p):
    p.add_argument("--config", help="JSON file with default settings")
    p.add_argument("--n", type=int, help="number of stages")
    p.add_argument("--alpha", type=lambda s: tuple(int(x) for x in s.replace(",", " ").split()),
                   help="even harmonics, comma separated (default 2,4,...,2n)")
    p.add_argument("--c", type=float, help="storage capacitance [F]")
    p.add_argument("--ell", type=float, help="stage inductance [H]")
    p.add_argument("--v0", type=float, help="initial storage voltage [V]")
    p.add_argument("--seed", type=int, help="seed for the homotopy gamma")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=["json", "csv"], help="only write this format")
    p.add_argument("--paths-budget", type=int, dest="paths_budget",
                   help="track at most this many homotopy paths")
    p.add_argument("--max-iterations", type=int, dest="max_iterations",
                   help="predictor-corrector steps allowed per path")
    p.add_argument("--jobs", type=int, help="worker processes for path tracking")
    p.add_argument("--solution", help="solution JSON file (solutions.json, regular.json)")
    p.add_argument("--index", type=int, help="1-based solution index within --solution")
    p.add_argument("--samples", type=int, help="simulation samples over [0, T]")
    p.add_argument("--resolution", type=int, help="pseudospectrum grid points per axis")
    for name in _TOL_FIELDS:
        p.add_argument(f"--tol-{name.replace('_', '-')}", type=float, dest=f"tol_{name}",
                       help=argparse.SUPPRESS)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = _Parser(prog="marxgen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [
        ("design", "enumerate all real designs and pick the regular one"),
        ("simulate", "simulate a design and check the energy transfer"),
        ("analyze", "condition numbers and pseudospectra per design"),
        ("netlist", "write a SPICE netlist of a design"),
        ("verify", "validate an externally provided solution file"),
    ]:
        p = sub.add_parser(name, help=help_, argument_default=argparse.SUPPRESS)
        _common(p)
    return parser


def load_config(args) -> RunConfig:
    """Merge defaults < config file < command-line flags."""
    values = {}
    if getattr(args, "config", None):
        try:
            values.update(mio.read_json(args.config))
        except (OSError, ValueError) as exc:
            raise BadInput(f"cannot read config: {exc}") from exc
    tol_values = dict(values.pop("tolerances", {}))
    for key, val in vars(args).items():
        if key.startswith("tol_"):
            tol_values[key[4:]] = val
        elif key not in ("config", "command", "verbose"):
            values[key] = val
    known = {f.name for f in fields(RunConfig)} - {"tolerances"}
    unknown = set(values) - known
    if unknown:
        raise BadInput(f"unknown config keys: {sorted(unknown)}")
    if "alpha" in values and values["alpha"] is not None:
        values["alpha"] = tuple(values["alpha"])
        values.setdefault("n", len(values["alpha"]))
    try:
        tol = Tolerances().updated(**tol_values)
    except KeyError as exc:
        raise BadInput(str(exc)) from exc
    return RunConfig(tolerances=tol, **values)


# --------------------------------------------------------------------------


def _enumerate(cfg, spec):
    budget = Budget(max_paths=cfg.paths_budget, max_iterations=cfg.max_iterations)
    sset = enumerate_solutions(spec, budget=budget, seed=cfg.seed, n_jobs=cfg.jobs,
                               tol=cfg.tolerances, mark_regular=False)
    return mark_regular(sset, tol=cfg.tolerances)


def _load_solutions(cfg):
    """Solutions from --solution, or the regular design of a fresh run."""
    if cfg.solution:
        try:
            file_spec, sols = mio.read_solutions(cfg.solution)
        except (OSError, ValueError, KeyError) as exc:
            raise BadInput(f"cannot read {cfg.solution}: {exc}") from exc
        spec = file_spec or cfg.spec()
        if file_spec is not None:
            spec = DesignSpec(n=file_spec.n, alpha=file_spec.alpha, c=cfg.c, ell=cfg.ell)
        if any(len(s.k) != spec.n for s in sols):
            raise BadInput("solution length does not match the stage count")
        return spec, sols
    spec = cfg.spec()
    sset = _enumerate(cfg, spec)
    return spec, list(sset.solutions)


def _pick(cfg, sols):
    if cfg.index is not None:
        if not 1 <= cfg.index <= len(sols):
            raise BadInput(f"--index {cfg.index} out of range 1..{len(sols)}")
        return sols[cfg.index - 1]
    regular = [s for s in sols if s.regular]
    return (regular or sols)[0] if len(sols) != 1 else sols[0]


def cmd_design(cfg: RunConfig):
    spec = cfg.spec()
    sset = _enumerate(cfg, spec)
    out = cfg.outdir
    reports = [validate(s, spec, cfg.tolerances) for s in sset]
    doc = mio.solution_set_to_dict(sset)
    for entry, rep in zip(doc["solutions"], reports):
        entry["validation"] = rep.to_dict()
    written = []
    if cfg.wants("json"):
        mio.write_json(out / "solutions.json", doc)
        written.append("solutions.json")
    if cfg.wants("csv"):
        (out / "solutions.csv").write_text(mio.solution_set_to_csv(sset))
        written.append("solutions.csv")
    regular = [dict(index=i + 1, **s.to_dict()) for i, s in enumerate(sset) if s.regular]
    mio.write_json(out / "regular.json", {
        "provenance": mio.provenance(spec, cfg.seed),
        "incomplete": sset.incomplete,
        "regular": regular,
    })
    written.append("regular.json")
    mio.write_json(out / "manifest.json", mio.manifest(
        spec, cfg.seed, written, {"command": "design", "incomplete": sset.incomplete}))
    print(f"n={spec.n}: {len(sset)} real solution(s), regular: "
          f"{[r['index'] for r in regular]}, paths {sset.path_stats.to_dict()}")
    if sset.incomplete:
        return EXIT_BUDGET
    if not all(r.valid for r in reports) or not regular:
        return EXIT_FAIL
    return EXIT_OK


def cmd_simulate(cfg: RunConfig):
    spec, sols = _load_solutions(cfg)
    if not sols:
        raise BadInput("no solution to simulate")
    sol = _pick(cfg, sols)
    try:
        model = build_A0(spec, 1.0 / np.asarray(sol.k))
    except ValueError as exc:
        raise BadInput(str(exc)) from exc
    trace = simulate(model, v0=cfg.v0, samples=cfg.samples)
    report = verify_transfer(trace, cfg.tolerances)
    modal = modal_check(model, cfg.tolerances.modal)
    out = cfg.outdir
    written = []
    if cfg.wants("csv"):
        (out / "trace.csv").write_text(mio.trace_to_csv(trace, spec, cfg.seed))
        written.append("trace.csv")
    if cfg.wants("json"):
        mio.write_json(out / "trace.json", mio.trace_to_dict(trace, spec, cfg.seed))
        written.append("trace.json")
    mio.write_json(out / "transfer.json", {
        "provenance": mio.provenance(spec, cfg.seed),
        "k": [float(x) for x in sol.k],
        "v0": cfg.v0,
        "T": spec.T,
        "v_L_final": float(trace.v_L[-1]),
        "transfer": report.to_dict(),
        "modal": modal.to_dict(),
    })
    written.append("transfer.json")
    mio.write_json(out / "manifest.json", mio.manifest(
        spec, cfg.seed, written, {"command": "simulate", "passed": report.passed}))
    print(f"v_L(T) = {trace.v_L[-1]:.9f} (target {spec.n * cfg.v0:g}), endpoint residual "
          f"{report.endpoint_residual:.2e}, energy drift {report.energy_drift:.2e}: "
          f"{'PASS' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_analyze(cfg: RunConfig):
    spec, sols = _load_solutions(cfg)
    out = cfg.outdir
    rows, written = [], []
    for i, sol in enumerate(sols, start=1):
        sens = condition_numbers(spec, sol)
        model = build_A0(spec, 1.0 / np.asarray(sol.k))
        grid = pseudospectrum(model, resolution=cfg.resolution)
        rows.append({"index": i, "regular": bool(sol.regular), **sens.to_dict(),
                     "level_areas": [{"epsilon": e, "area": a}
                                     for e, a in grid.level_areas().items()]})
        if cfg.wants("csv"):
            name = f"pseudospectrum_{i}.csv"
            (out / name).write_text(mio.grid_to_csv(grid, spec, cfg.seed))
            written.append(name)
        if cfg.wants("json"):
            name = f"pseudospectrum_{i}.json"
            mio.write_json(out / name, mio.grid_to_dict(grid, spec, cfg.seed))
            written.append(name)
    mio.write_json(out / "conditions.json",
                   {"provenance": mio.provenance(spec, cfg.seed), "solutions": rows})
    written.append("conditions.json")
    if cfg.wants("csv"):
        lines = ["index,max_condition,regular"] + [
            f"{r['index']},{r['max_condition']!r},{int(r['regular'])}" for r in rows]
        (out / "conditions.csv").write_text("\n".join(lines) + "\n")
        written.append("conditions.csv")
    mio.write_json(out / "manifest.json", mio.manifest(spec, cfg.seed, written,
                                                       {"command": "analyze"}))
    for r in rows:
        print(f"#{r['index']}: max condition {r['max_condition']:.4f}"
              f"{'  (regular)' if r['regular'] else ''}")
    return EXIT_OK


def cmd_netlist(cfg: RunConfig):
    spec, sols = _load_solutions(cfg)
    if not sols:
        raise BadInput("no solution for the netlist")
    sol = _pick(cfg, sols)
    text = to_spice(spec, sol.k, v0=cfg.v0)
    path = cfg.outdir / f"marx_n{spec.n}.cir"
    path.write_text(text)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig):
    if not cfg.solution:
        raise BadInput("verify needs --solution FILE")
    spec, sols = _load_solutions(cfg)
    results, ok = [], True
    for i, sol in enumerate(sols, start=1):
        rep = validate(sol, spec, cfg.tolerances)
        entry = {"index": i, **rep.to_dict()}
        if rep.f_positive:
            entry["modal"] = modal_check(build_A0(spec, 1.0 / np.asarray(sol.k)),
                                         cfg.tolerances.modal).to_dict()
        ok &= rep.valid
        results.append(entry)
        print(f"#{i}: {'valid' if rep.valid else 'INVALID ' + ','.join(rep.failures)}")
    mio.write_json(cfg.outdir / "verify.json",
                   {"provenance": mio.provenance(spec, cfg.seed), "results": results})
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "design": cmd_design,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "netlist": cmd_netlist,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False)
                        else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except BadInput as exc:
        print(f"marxgen: error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
