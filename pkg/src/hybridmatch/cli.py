"""Command-line front end.

    hybridmatch classify|displacement|simulate|portrait|sweep SPEC [flags]

Spec files are YAML::

    B_plus: [[-2, -2], [1, 0]]
    B_minus: [[-2, -2], [1, 0]]
    rho: 0
    jump: {a: 1, b: 1, r: 3, s: 3}
    sim: {t_max: 500}        # optional SimConfig overrides

Exit codes are listed in ``EXIT_CODES``.  Log verbosity comes from the
``HYBRIDMATCH_LOG`` environment variable (a logging level name).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import sys
from dataclasses import dataclass

import numpy as np
import yaml

from .analysis import Case, StabilityVerdict, classify_normal_form, displacement, displacement_derivative
from .flow import NotFocusError, return_coefficients
from .model import CrossingError, HurwitzError, HybridSpecError, HybridSystemSpec
from .normal_form import NormalFormError, NormalFormSystem, eta, normalize
from .portrait import render_portrait
from .simulate import SimConfig, run, write_events_csv, write_trajectory_csv

log = logging.getLogger("hybridmatch")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_FOUND = 3
EXIT_PARSE = 4
EXIT_HURWITZ = 5
EXIT_CROSSING = 6
EXIT_NORMAL_FORM = 7
EXIT_NOT_FOCUS = 8

EXIT_CODES = {
    EXIT_OK: "success",
    EXIT_USAGE: "bad command-line usage",
    EXIT_NOT_FOUND: "spec file not found",
    EXIT_PARSE: "spec file could not be parsed or has invalid fields",
    EXIT_HURWITZ: "H1 violated (a matrix is not Hurwitz)",
    EXIT_CROSSING: "crossing property violated",
    EXIT_NORMAL_FORM: "companion reduction not available for this system",
    EXIT_NOT_FOCUS: "command needs focus dynamics on both sides",
}

SWEEP_PARAMS = ("rho", "a", "b", "r", "s")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class SpecFile:
    spec: HybridSystemSpec
    sim: dict


def _matrix_field(raw: dict, name: str):
    if name not in raw:
        raise CliError(f"{name}: missing field", EXIT_PARSE)
    value = raw[name]
    ok = (isinstance(value, list) and len(value) == 2
          and all(isinstance(row, list) and len(row) == 2 for row in value))
    if not ok:
        raise CliError(f"{name}: expected a 2x2 row-major array", EXIT_PARSE)
    try:
        return [[float(v) for v in row] for row in value]
    except (TypeError, ValueError):
        raise CliError(f"{name}: entries must be numbers", EXIT_PARSE) from None


def _number(value, name: str) -> float:
    if isinstance(value, bool):
        raise CliError(f"{name}: expected a number", EXIT_PARSE)
    try:
        return float(value)
    except (TypeError, ValueError):
        raise CliError(f"{name}: expected a number, got {value!r}", EXIT_PARSE) from None


def parse_spec(text: str) -> SpecFile:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise CliError(f"YAML error: {exc}", EXIT_PARSE) from None
    if not isinstance(raw, dict):
        raise CliError("spec must be a mapping", EXIT_PARSE)
    known = {"B_plus", "B_minus", "rho", "jump", "sim"}
    extra = sorted(set(raw) - known)
    if extra:
        raise CliError(f"{extra[0]}: unknown field", EXIT_PARSE)
    b_plus = _matrix_field(raw, "B_plus")
    b_minus = _matrix_field(raw, "B_minus")
    rho = _number(raw.get("rho", 0.0), "rho")
    jump = raw.get("jump", {}) or {}
    if not isinstance(jump, dict):
        raise CliError("jump: expected a mapping with keys a, b, r, s", EXIT_PARSE)
    bad = sorted(set(jump) - {"a", "b", "r", "s"})
    if bad:
        raise CliError(f"jump.{bad[0]}: unknown field", EXIT_PARSE)
    params = {k: _number(jump.get(k, 1.0), f"jump.{k}") for k in ("a", "b", "r", "s")}
    sim = raw.get("sim", {}) or {}
    if not isinstance(sim, dict):
        raise CliError("sim: expected a mapping", EXIT_PARSE)
    fields = {f.name for f in dataclasses.fields(SimConfig)}
    for key in sim:
        if key not in fields:
            raise CliError(f"sim.{key}: unknown field", EXIT_PARSE)
    try:
        SimConfig(**sim)
    except (TypeError, ValueError) as exc:
        raise CliError(f"sim: {exc}", EXIT_PARSE) from None
    spec = build_spec(b_plus, b_minus, rho, params)
    return SpecFile(spec, dict(sim))


def build_spec(b_plus, b_minus, rho: float, params: dict) -> HybridSystemSpec:
    """Validate and build; hypothesis failures become CliErrors with their own codes."""
    try:
        return HybridSystemSpec.build(b_plus, b_minus, rho, **params)
    except HurwitzError as exc:
        raise CliError(str(exc), EXIT_HURWITZ) from None
    except CrossingError as exc:
        raise CliError(str(exc), EXIT_CROSSING) from None
    except HybridSpecError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None


def load_spec(path: str) -> SpecFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise CliError(f"spec file not found: {path}", EXIT_NOT_FOUND) from None
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_NOT_FOUND) from None
    return parse_spec(text)


def _normalize(spec: HybridSystemSpec) -> NormalFormSystem:
    try:
        return normalize(spec)
    except NormalFormError as exc:
        raise CliError(str(exc), EXIT_NORMAL_FORM) from None


@dataclass
class VerdictReport:
    verdict: str
    near_center: bool
    swapped: bool
    sigma_plus: float
    delta_plus: float
    kind_plus: str
    sigma_minus: float
    delta_minus: float
    kind_minus: str
    eta_plus: float
    eta_minus: float
    b21_plus: float
    b21_minus: float
    r: float
    inv_s: float
    K: float | None = None
    C_star: float | None = None
    x0: float | None = None
    delta_prime: float | None = None
    stability: str | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "VerdictReport":
        return cls(**data)

    def to_json(self) -> str:
        # json writes floats with repr, the shortest string that round-trips exactly
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "VerdictReport":
        return cls.from_dict(json.loads(text))


def make_report(spec: HybridSystemSpec, nf: NormalFormSystem, verdict: StabilityVerdict) -> VerdictReport:
    rep = VerdictReport(
        verdict=verdict.case.value,
        near_center=verdict.near_center,
        swapped=nf.swapped,
        sigma_plus=nf.sigma_plus,
        delta_plus=nf.delta_plus,
        kind_plus=verdict.plus.kind.value,
        sigma_minus=nf.sigma_minus,
        delta_minus=nf.delta_minus,
        kind_minus=verdict.minus.kind.value,
        eta_plus=eta(spec.b_plus, spec.rho),
        eta_minus=eta(spec.b_minus, spec.rho),
        b21_plus=spec.b_plus.m.b21,
        b21_minus=spec.b_minus.m.b21,
        r=spec.jump.r,
        inv_s=1.0 / spec.jump.s,
    )
    if verdict.params is not None:
        rep.K, rep.C_star = verdict.params.K, verdict.params.C_star
    if verdict.cycle is not None:
        rep.x0 = verdict.cycle.x0
        rep.delta_prime = verdict.cycle.delta_prime
        rep.stability = verdict.cycle.stability
    return rep


def classify_spec(spec: HybridSystemSpec) -> tuple[NormalFormSystem, StabilityVerdict]:
    nf = _normalize(spec)
    try:
        return nf, classify_normal_form(nf)
    except ArithmeticError as exc:
        raise CliError(f"classification failed: {exc}", EXIT_NORMAL_FORM) from None


def cmd_classify(args) -> int:
    sf = load_spec(args.spec)
    nf, verdict = classify_spec(sf.spec)
    report = make_report(sf.spec, nf, verdict)
    if verdict.near_center and verdict.case is not Case.GLOBAL_CENTER:
        print("warning: K and C_star agree to 1e-6 relative; the system is close to a global center",
              file=sys.stderr)
    print(report.to_json())
    return EXIT_OK


def cmd_displacement(args) -> int:
    if not (0 < args.x_min < args.x_max) or args.samples < 2:
        raise CliError("need 0 < x_min < x_max and samples >= 2", EXIT_USAGE)
    sf = load_spec(args.spec)
    nf = _normalize(sf.spec)
    try:
        coeffs = return_coefficients(nf)
    except NotFocusError as exc:
        raise CliError(f"displacement needs two focus sides: {exc}", EXIT_NOT_FOCUS) from None
    verdict = classify_normal_form(nf)
    rows = []
    for x in np.geomspace(args.x_min, args.x_max, args.samples):
        x = float(x)
        rows.append((x, displacement(x, nf, coeffs), displacement_derivative(x, nf, verdict.params)))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "delta", "delta_prime"])
        for row in rows:
            w.writerow([repr(v) for v in row])
    log.info("wrote %d rows to %s", len(rows), args.out)
    return EXIT_OK


def _sim_config(sf: SpecFile, args) -> SimConfig:
    opts = dict(sf.sim)
    if args.t_max is not None:
        opts["t_max"] = args.t_max
    if args.max_jumps is not None:
        opts["max_jumps"] = args.max_jumps
    try:
        return SimConfig(**opts)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None


def cmd_simulate(args) -> int:
    sf = load_spec(args.spec)
    cfg = _sim_config(sf, args)
    traj = run((args.x0, args.y0), sf.spec, cfg)
    write_trajectory_csv(traj, args.out)
    events = args.events or _events_path(args.out)
    write_events_csv(traj, events)
    print(traj.termination.value)
    return EXIT_OK


def _events_path(out: str) -> str:
    root, ext = os.path.splitext(out)
    return f"{root}_events{ext or '.csv'}"


def parse_seeds(text: str) -> list:
    seeds = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise CliError(f"bad seed {chunk!r}: expected 'x,y'", EXIT_USAGE)
        try:
            seeds.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise CliError(f"bad seed {chunk!r}: expected numbers", EXIT_USAGE) from None
    return seeds


def default_seeds(spec: HybridSystemSpec, verdict: StabilityVerdict | None) -> list:
    if verdict is not None and verdict.cycle is not None:
        x0 = verdict.cycle.x0
        return [spec.line.embed(0.6 * x0), spec.line.embed(1.3 * x0)]
    return [(1.0, 1.0), (-1.0, -1.0), (1.0, -0.5)]


def cmd_portrait(args) -> int:
    sf = load_spec(args.spec)
    nf, verdict = classify_spec(sf.spec)
    seeds = default_seeds(sf.spec, verdict) if args.seeds is None else parse_seeds(args.seeds)
    if args.window is not None and not args.window > 0:
        raise CliError("--window must be > 0", EXIT_USAGE)
    base = SimConfig(**{"t_max": 200.0, "max_jumps": 60, **sf.sim})
    svg = render_portrait(sf.spec, verdict, seeds, window=args.window, cfg=base)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    return EXIT_OK


def sweep_row(spec: HybridSystemSpec, param: str, value: float) -> dict:
    """Classify one sweep point; invalid parameter values give an ``invalid`` row."""
    jump = {k: getattr(spec.jump, k) for k in ("a", "b", "r", "s")}
    rho = spec.rho
    if param == "rho":
        rho = value
    else:
        jump[param] = value
    row = {"param_value": value, "verdict": "invalid", "x0": None, "K": None, "C_star": None}
    try:
        candidate = build_spec(spec.b_plus.m.rows(), spec.b_minus.m.rows(), rho, jump)
        _, verdict = classify_spec(candidate)
    except CliError as exc:
        log.info("%s = %r: %s", param, value, exc)
        return row
    row["verdict"] = verdict.case.value
    if verdict.params is not None:
        row["K"], row["C_star"] = verdict.params.K, verdict.params.C_star
    if verdict.cycle is not None:
        row["x0"] = verdict.cycle.x0
    return row


def cmd_sweep(args) -> int:
    lo, hi = args.range
    if args.samples < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
        raise CliError("need samples >= 1 and a finite range", EXIT_USAGE)
    sf = load_spec(args.spec)
    values = [lo] if args.samples == 1 else [float(v) for v in np.linspace(lo, hi, args.samples)]
    rows = [sweep_row(sf.spec, args.param, v) for v in values]
    cols = ["param_value", "verdict", "x0", "K", "C_star"]
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in rows:
            w.writerow(["" if row[c] is None else (row[c] if c == "verdict" else repr(row[c])) for c in cols])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridmatch", description=__doc__.split("\n")[0],
                                     epilog="exit codes: " + "; ".join(f"{k} {v}" for k, v in EXIT_CODES.items()))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="print the global verdict as JSON")
    p.add_argument("spec")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("displacement", help="tabulate the displacement map on a log grid")
    p.add_argument("spec")
    p.add_argument("--x-min", type=float, default=0.1)
    p.add_argument("--x-max", type=float, default=100.0)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_displacement)

    p = sub.add_parser("simulate", help="integrate one hybrid orbit")
    p.add_argument("spec")
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--t-max", type=float)
    p.add_argument("--max-jumps", type=int)
    p.add_argument("--out", required=True, help="trajectory CSV")
    p.add_argument("--events", help="events CSV (default: <out>_events.csv)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("portrait", help="write an SVG phase portrait")
    p.add_argument("spec")
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", help="'x,y;x,y;...'; an empty string draws no orbits")
    p.add_argument("--window", type=float, help="half-width of the plotted square")
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("sweep", help="classify over a range of one parameter")
    p.add_argument("spec")
    p.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"), required=True)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("HYBRIDMATCH_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
