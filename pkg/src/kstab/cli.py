"""Command-line surface.

Subcommands compute single invariants (``delta``, ``alpha``, ``verdict``,
``dstar``, ``lct``, ``interpolate``), finite-level tables (``approx``,
``filtration``), ideal stabilization (``gord``) and coefficient sweeps
(``sweep``). Pair specs are TOML or JSON documents; all rationals are
written as exact ``"p/q"`` strings, never decimals. ``--json`` switches
every subcommand to machine output with rationals serialized as strings.

Exit codes: 0 success, 2 validation error, 3 budget error, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from . import filtration as filt
from . import ideals, invariants
from .errors import (
    AlreadySemistable,
    BudgetError,
    ConsistencyError,
    KStabError,
    ParseError,
)
from .geometry import POS_INFINITY, dot, scale_point
from .toric import ToricDivisor, ToricPairSpec, moment_polytope, toric_pair

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/[1-9]\d*)?$")


def parse_rational(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str) or not _RATIONAL_RE.match(text.strip()):
        raise ParseError(
            f"expected an exact rational like \"3/4\" or \"2\", got {text!r}"
        )
    return Fraction(text.strip())


def format_rational(value) -> str:
    return str(value)


def format_ray(ray) -> str:
    return "(" + ",".join(str(c) for c in ray) + ")"


def parse_spec(document: dict) -> ToricPairSpec:
    """Validated pair spec from a decoded TOML/JSON document."""
    if "variety" not in document:
        raise ParseError("missing [variety] table")
    var = document["variety"]
    rays = var.get("rays")
    if not rays:
        raise ParseError("variety.rays is required")
    try:
        rays = [tuple(int(c) for c in ray) for ray in rays]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"variety.rays must be integer vectors: {exc}") from None
    dim = var.get("dim", len(rays[0]))
    if any(len(r) != dim for r in rays):
        raise ParseError(f"all rays must have length dim = {dim}")
    boundary = var.get("boundary")
    if boundary is not None:
        if len(boundary) != len(rays):
            raise ParseError("variety.boundary must have one entry per ray")
        boundary = [parse_rational(b) for b in boundary]
    polarization = var.get("polarization")
    if polarization is not None:
        if len(polarization) != len(rays):
            raise ParseError("variety.polarization must have one entry per ray")
        polarization = [parse_rational(c) for c in polarization]
    return toric_pair(rays, boundary, polarization)


def emit_spec(spec: ToricPairSpec) -> dict:
    """Schema document for a spec; parse_spec inverts this exactly."""
    return {
        "variety": {
            "dim": spec.dim,
            "rays": [list(r) for r in spec.rays],
            "boundary": [format_rational(b) for b in spec.boundary],
            "polarization": [format_rational(c) for c in spec.polarization],
        }
    }


def load_document(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    text = blob.decode("utf-8")
    if path.endswith(".json") or text.lstrip().startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from None
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: invalid TOML: {exc}") from None


def load_spec(path: str) -> ToricPairSpec:
    return parse_spec(load_document(path))


# -- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientPath:
    ray: int
    intercept: Fraction
    slope: Fraction


@dataclass(frozen=True)
class SweepSpec:
    base: ToricPairSpec
    param: str
    grid: tuple[Fraction, ...]
    paths: tuple[CoefficientPath, ...]
    fans: tuple[tuple[Fraction, ToricPairSpec], ...]  # (threshold t, spec), sorted


@dataclass(frozen=True)
class SweepRow:
    t: Fraction
    delta: Fraction | None
    alpha: Fraction | None
    verdict: str
    witness_ray: str
    error: str | None = None


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[SweepRow, ...]
    semicontinuity_flags: tuple[Fraction, ...]
    breakpoints: tuple[Fraction, ...]
    piecewise_monotone_ok: bool | None  # None when fans switch (not asserted)


def parse_sweep(document: dict) -> SweepSpec:
    base = parse_spec(document)
    sw = document.get("sweep")
    if not sw:
        raise ParseError("missing [sweep] table")
    grid_spec = sw.get("grid")
    if not grid_spec:
        raise ParseError("sweep.grid is required")
    start = parse_rational(grid_spec["start"])
    stop = parse_rational(grid_spec["stop"])
    count = int(grid_spec["count"])
    if count < 1:
        raise ParseError("sweep.grid.count must be >= 1")
    if count == 1:
        grid = (start,)
    else:
        step = (stop - start) / (count - 1)
        grid = tuple(start + k * step for k in range(count))
    paths = tuple(
        CoefficientPath(int(p["ray"]), parse_rational(p["p"]), parse_rational(p["q"]))
        for p in sw.get("paths", [])
    )
    fans = []
    for entry in sw.get("fans", []):
        threshold = parse_rational(entry["from"])
        fan_spec = parse_spec(entry)
        fans.append((threshold, fan_spec))
    fans.sort(key=lambda pair: pair[0])
    return SweepSpec(base, sw.get("param", "t"), grid, paths, tuple(fans))


def _spec_at(sweep: SweepSpec, t: Fraction) -> ToricPairSpec:
    active = sweep.base
    for threshold, fan_spec in sweep.fans:
        if t >= threshold:
            active = fan_spec
    boundary = list(active.boundary)
    for path in sweep.paths:
        if path.ray >= len(boundary):
            raise ParseError(
                f"path ray index {path.ray} out of range for fan with "
                f"{len(boundary)} rays"
            )
        boundary[path.ray] = path.intercept + path.slope * t
    return toric_pair(active.rays, boundary)


def run_sweep(sweep: SweepSpec, threads: int = 1) -> SweepReport:
    """Evaluate every grid point; failures are reported rows, never skipped."""

    def evaluate(t: Fraction) -> SweepRow:
        try:
            spec = _spec_at(sweep, t)
            v = invariants.verdict(spec)
            a = invariants.alpha(spec)
            return SweepRow(
                t=t,
                delta=v.delta,
                alpha=a,
                verdict=v.classification.value,
                witness_ray=format_ray(spec.rays[v.witness_ray]),
            )
        except KStabError as exc:
            return SweepRow(
                t=t,
                delta=None,
                alpha=None,
                verdict="invalid",
                witness_ray="",
                error=f"{type(exc).__name__}: {exc}",
            )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = tuple(pool.map(evaluate, sweep.grid))
    else:
        rows = tuple(evaluate(t) for t in sweep.grid)

    flags = []
    for i in range(1, len(rows) - 1):
        prev, here, nxt = rows[i - 1], rows[i], rows[i + 1]
        if None in (prev.delta, here.delta, nxt.delta):
            continue
        if here.delta < min(prev.delta, nxt.delta):
            flags.append(here.t)

    breakpoints = []
    for i in range(1, len(rows)):
        a, b = rows[i - 1], rows[i]
        if a.error is None and b.error is None and a.witness_ray != b.witness_ray:
            breakpoints.append(b.t)

    monotone_ok = None
    if not sweep.fans:
        monotone_ok = True
        run_start = 0
        for i in range(1, len(rows) + 1):
            if i < len(rows) and rows[i].witness_ray == rows[run_start].witness_ray:
                continue
            segment = [r.delta for r in rows[run_start:i] if r.delta is not None]
            diffs = [y - x for x, y in zip(segment, segment[1:])]
            if diffs and not (all(d <= 0 for d in diffs) or all(d >= 0 for d in diffs)):
                monotone_ok = False
            run_start = i
    return SweepReport(rows, tuple(flags), tuple(breakpoints), monotone_ok)


def sweep_csv(report: SweepReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "delta", "alpha", "verdict", "witness_ray"])
    for row in report.rows:
        writer.writerow(
            [
                format_rational(row.t),
                "" if row.delta is None else format_rational(row.delta),
                "" if row.alpha is None else format_rational(row.alpha),
                row.verdict if row.error is None else row.error,
                row.witness_ray,
            ]
        )
    return buf.getvalue()


def sweep_json(report: SweepReport) -> dict:
    return {
        "rows": [
            {
                "t": format_rational(r.t),
                "delta": None if r.delta is None else format_rational(r.delta),
                "alpha": None if r.alpha is None else format_rational(r.alpha),
                "verdict": r.verdict,
                "witness_ray": r.witness_ray,
                "error": r.error,
            }
            for r in report.rows
        ],
        "semicontinuity_flags": [format_rational(t) for t in report.semicontinuity_flags],
        "breakpoints": [format_rational(t) for t in report.breakpoints],
        "piecewise_monotone_ok": report.piecewise_monotone_ok,
    }


def _atomic_write(path: str, payload: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".kstab-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- subcommand implementations ----------------------------------------------


def _verdict_report(spec: ToricPairSpec) -> dict:
    v = invariants.verdict(spec)
    inv = invariants.ray_invariants(spec)
    return {
        "delta": format_rational(v.delta),
        "alpha": format_rational(invariants.alpha(spec)),
        "verdict": v.classification.value,
        "witness_ray": format_ray(spec.rays[v.witness_ray]),
        "rays": [
            {
                "ray": list(ray),
                "A": format_rational(inv.log_discrepancy[i]),
                "S": format_rational(inv.expected_vanishing[i]),
                "T": format_rational(inv.max_vanishing[i]),
            }
            for i, ray in enumerate(spec.rays)
        ],
    }


_VERDICT_PHRASES = {
    "UniformlyKStable": "uniformly K-stable",
    "KSemistableBoundary": "K-semistable (boundary case)",
    "NotKSemistable": "NOT K-semistable",
}


def _cmd_delta(args, out) -> int:
    spec = load_spec(args.spec)
    value = invariants.delta(spec)
    if args.json:
        print(json.dumps({"delta": format_rational(value)}), file=out)
    else:
        print(f"delta = {value}", file=out)
    return 0


def _cmd_alpha(args, out) -> int:
    spec = load_spec(args.spec)
    value = invariants.alpha(spec)
    if args.json:
        print(json.dumps({"alpha": format_rational(value)}), file=out)
    else:
        print(f"alpha = {value} (toric-reduced)", file=out)
    return 0


def _cmd_verdict(args, out) -> int:
    spec = load_spec(args.spec)
    report = _verdict_report(spec)
    if args.json:
        print(json.dumps(report, indent=2), file=out)
    else:
        phrase = _VERDICT_PHRASES[report["verdict"]]
        print(
            f"delta = {report['delta']}: {phrase} "
            f"(witness ray {report['witness_ray']})",
            file=out,
        )
    return 0


def _cmd_approx(args, out) -> int:
    spec = load_spec(args.spec)
    rows = []
    for m in range(1, args.max_m + 1):
        n_m = len(moment_polytope(spec).lattice_points(m))
        rows.append(
            {
                "m": m,
                "N_m": n_m,
                "alpha_m": format_rational(invariants.alpha_m(spec, m)),
                "delta_m": format_rational(invariants.delta_m_toric(spec, m)),
            }
        )
    if args.json:
        print(json.dumps({"levels": rows}), file=out)
    else:
        print("m\tN_m\talpha_m\tdelta_m", file=out)
        for r in rows:
            print(f"{r['m']}\t{r['N_m']}\t{r['alpha_m']}\t{r['delta_m']}", file=out)
    return 0


def _cmd_dstar(args, out) -> int:
    spec = load_spec(args.spec)
    div = invariants.dstar(spec)
    d = invariants.delta(spec)
    payload = {
        "dstar": [format_rational(a) for a in div.coeffs],
        "delta": format_rational(d),
        "balanced_weight": format_rational(1 - d),
    }
    if args.json:
        print(json.dumps(payload), file=out)
    else:
        coeffs = ", ".join(payload["dstar"])
        print(f"D* coefficients: ({coeffs})", file=out)
        print(
            f"attaching with weight {payload['balanced_weight']} balances the"
            f" pair at delta = 1",
            file=out,
        )
    return 0


def _cmd_interpolate(args, out) -> int:
    spec = load_spec(args.spec)
    beta = parse_rational(args.beta)
    if args.point:
        u = tuple(parse_rational(c) for c in args.point.split(","))
    else:
        ubar = moment_polytope(spec).barycenter
        if all(x == 0 for x in ubar):
            u = ubar
        else:
            c = min(
                (Fraction(1) - b) / dot(ubar, ray)
                for ray, b in zip(spec.rays, spec.boundary)
                if dot(ubar, ray) > 0
            )
            u = scale_point(-c, ubar)
    value = invariants.interpolation_delta(spec, u, beta)
    payload = {
        "beta": format_rational(beta),
        "point": [format_rational(x) for x in u],
        "delta": format_rational(value),
    }
    if args.json:
        print(json.dumps(payload), file=out)
    else:
        print(
            f"delta(X, Delta + (1-{beta}) D_u) = {value} at u = "
            f"({', '.join(payload['point'])})",
            file=out,
        )
    return 0


def _cmd_lct(args, out) -> int:
    spec = load_spec(args.spec)
    coeffs = tuple(parse_rational(c) for c in args.divisor.split(","))
    div = ToricDivisor(coeffs)
    scale = parse_rational(args.scale) if args.scale else Fraction(1)
    value = invariants.lct_invariant_divisor(spec, div, scale)
    text = "infinity" if value is POS_INFINITY else format_rational(value)
    if args.json:
        print(json.dumps({"lct": text}), file=out)
    else:
        print(f"lct = {text}", file=out)
    return 0


def _cmd_filtration(args, out) -> int:
    spec = load_spec(args.spec)
    if not (0 <= args.ray < spec.ray_count):
        raise ParseError(f"ray index {args.ray} out of range")
    if args.weights:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["degree", "lattice_point", "weight"])
        for m in range(1, args.max_m + 1):
            f = filt.ray_filtration(spec, args.ray, m)
            for point, w in zip(f.points, f.weights):
                writer.writerow([m, format_ray(point), format_rational(w)])
        return 0
    rows = []
    for m in range(1, args.max_m + 1):
        f = filt.ray_filtration(spec, args.ray, m)
        rows.append(
            {
                "m": m,
                "N_m": f.basis_size,
                "S_m": format_rational(filt.s_m(f)),
                "T_m": format_rational(filt.t_m(f)),
            }
        )
    if args.json:
        print(json.dumps({"ray": args.ray, "levels": rows}), file=out)
    else:
        print("m\tN_m\tS_m\tT_m", file=out)
        for r in rows:
            print(f"{r['m']}\t{r['N_m']}\t{r['S_m']}\t{r['T_m']}", file=out)
    return 0


def _cmd_gord(args, out) -> int:
    try:
        raw = json.loads(args.ideals)
    except json.JSONDecodeError as exc:
        raise ParseError(f"--ideals must be JSON: {exc}") from None
    sources = [ideals.MonomialIdeal.of(*[tuple(g) for g in gens]) for gens in raw]
    level, seq = ideals.gord_stabilize(sources, args.p_max)
    payload = {
        "N": level,
        "p_max": args.p_max,
        "b_N": [list(g) for g in seq.level(level).sorted_gens()],
    }
    if args.json:
        print(json.dumps(payload), file=out)
    else:
        print(f"stabilizes at N = {level} (checked powers up to {args.p_max})", file=out)
        print(f"generators of b_N: {payload['b_N']}", file=out)
    return 0


def _cmd_sweep(args, out) -> int:
    sweep = parse_sweep(load_document(args.config))
    report = run_sweep(sweep, threads=args.threads)
    if args.json:
        payload = json.dumps(sweep_json(report), indent=2)
    else:
        payload = sweep_csv(report)
    if args.output:
        _atomic_write(args.output, payload if payload.endswith("\n") else payload + "\n")
    else:
        out.write(payload if payload.endswith("\n") else payload + "\n")
    return 0


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 64."""

    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kstab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def spec_command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("spec", help="TOML or JSON pair document")
        p.add_argument("--json", action="store_true", help="machine output")
        p.set_defaults(func=func)
        return p

    spec_command("delta", _cmd_delta, "stability threshold")
    spec_command("alpha", _cmd_alpha, "global log canonical threshold")
    spec_command("verdict", _cmd_verdict, "K-stability verdict")
    p = spec_command("approx", _cmd_approx, "finite-level alpha_m / delta_m table")
    p.add_argument("--max-m", type=int, required=True)
    spec_command("dstar", _cmd_dstar, "balancing divisor for unstable pairs")
    p = spec_command("interpolate", _cmd_interpolate, "delta of an interpolated pair")
    p.add_argument("--beta", required=True)
    p.add_argument("--point", help="comma-separated rational coordinates")
    p = spec_command("lct", _cmd_lct, "lct of a torus-invariant divisor")
    p.add_argument("--divisor", required=True, help="comma-separated coefficients")
    p.add_argument("--scale")
    p = spec_command("filtration", _cmd_filtration, "ray filtration tables")
    p.add_argument("--ray", type=int, required=True)
    p.add_argument("--max-m", type=int, default=5)
    p.add_argument("--weights", action="store_true", help="per-point weight CSV")

    p = sub.add_parser("gord", help="graded ideal sequence stabilization")
    p.add_argument("--ideals", required=True, help="JSON list of generator lists")
    p.add_argument("--p-max", type=int, default=4)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_gord)

    p = sub.add_parser("sweep", help="coefficient sweep with semicontinuity flags")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="write atomically to this file")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_sweep)
    return parser


def run_command(argv, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"kstab: usage error: {exc}", file=err)
        return 64
    try:
        return args.func(args, out)
    except AlreadySemistable as exc:
        print(f"kstab: {type(exc).__name__}: {exc}", file=err)
        return 2
    except BudgetError as exc:
        print(f"kstab: {type(exc).__name__}: {exc}", file=err)
        return 3
    except ConsistencyError as exc:
        print(f"kstab: internal consistency failure: {exc}", file=err)
        return 70
    except KStabError as exc:
        print(f"kstab: {type(exc).__name__}: {exc}", file=err)
        return 2


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
