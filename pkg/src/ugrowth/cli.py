"""Command-line entry point.

    ugrowth report|delta|growth|dplus|certify-ping|sl2-free INPUT.json [options]
    ugrowth verify CERT.json
    ugrowth girth|expansion --q 3,5,7 [INPUT.json] [options]

Exit status: 0 success, 2 certified negative, 3 budget exhausted, 4 bad input.
Errors are written to stderr as one JSON object.  Output goes to --output
(written atomically) or stdout; all numbers are exact rationals or magnitude
records.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import InputError, UGrowthError
from .linalg import char_poly, format_poly, op_norm, spectral_radii
from .scalars import Place
from .setcalc import Budget, MatSet, delta_bounds

COMMANDS = ["report", "delta", "growth", "dplus", "certify-ping", "verify",
            "sl2-free", "girth", "expansion"]
NEEDS_INPUT = {"report", "delta", "growth", "dplus", "certify-ping", "verify", "sl2-free"}


@dataclass
class JobConfig:
    command: str
    input: Optional[str] = None
    place: Optional[str] = None
    precision: int = 64
    budgets: dict = field(default_factory=dict)
    output: Optional[str] = None
    deterministic: bool = True

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.precision < 16:
            raise InputError("precision must be at least 16 bits")
        for k, v in self.budgets.items():
            if v is not None and v <= 0:
                raise InputError(f"budget {k} must be positive")
        if self.command in NEEDS_INPUT and not self.input:
            raise InputError(f"{self.command} needs an input file")

    def budget(self, key, default):
        v = self.budgets.get(key)
        return default if v is None else v


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------
def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def load_set(path: str) -> MatSet:
    rec = load_json(path)
    if not isinstance(rec, dict) or "matrices" not in rec:
        raise InputError("input must be an object with a 'matrices' list")
    try:
        return MatSet.from_record(rec)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, UGrowthError):
            raise
        raise InputError(f"bad matrix entry: {exc}") from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ugrowth-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fs(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _place(cfg: JobConfig, Sigma: Optional[MatSet]) -> Place:
    if cfg.place:
        return Place.parse(cfg.place)
    from .sl2 import select_place
    return select_place(Sigma)


def _parse_q_list(text: Optional[str]) -> list:
    if not text:
        return []
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"bad q list {text!r}") from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def cmd_report(cfg: JobConfig, args) -> dict:
    S = load_set(cfg.input)
    place = _place(cfg, S)
    rows = []
    for m in S:
        sd = spectral_radii(m, place, cfg.precision)
        rows.append({
            "matrix": m.to_record(),
            "char_poly": format_poly(char_poly(m)),
            "norm": op_norm(m, place, cfg.precision).to_record(),
            "Lambda": sd.Lambda.to_record(),
            "lambda2": sd.lambda2.to_record(),
        })
    return {"kind": "report", "place": place.to_record(), "dim": S.dim, "elements": rows}


def _budget(cfg: JobConfig) -> Budget:
    return Budget(iterations=cfg.budget("iterations", 200), nodes=cfg.budget("nodes", 400),
                  ball_cap=cfg.budget("ball_cap", Budget().ball_cap), precision=cfg.precision)


def cmd_delta(cfg: JobConfig, args) -> dict:
    S = load_set(cfg.input)
    place = _place(cfg, S)
    rec = delta_bounds(S, place, _budget(cfg)).to_record()
    return {"kind": "delta", "place": place.to_record(), "bounds": rec}


def cmd_growth(cfg: JobConfig, args) -> dict:
    from .search import growth_table
    S = load_set(cfg.input)
    table = growth_table(S, cfg.budget("nmax", 10), cfg.budget("ball_cap", Budget().ball_cap))
    return {"kind": "growth", "table": [r.to_record() for r in table]}


def cmd_dplus(cfg: JobConfig, args) -> dict:
    from .search import dplus_upper
    S = load_set(cfg.input)
    place = _place(cfg, S)
    res = dplus_upper(S, place, _budget(cfg), max_radius=cfg.budget("max_radius", 8),
                      max_power=cfg.budget("max_power", 16))
    return res.to_record()


def cmd_certify_ping(cfg: JobConfig, args) -> dict:
    from .conjugators import proximal_normal_form
    from .errors import CertifiedNegative
    from .pingpong import certify_ping, eps_grid
    S = load_set(cfg.input)
    if len(S) < 2:
        raise InputError("certify-ping needs the matrices [a, b]")
    a, b = S[0], S[1]
    place = _place(cfg, S)
    form = proximal_normal_form(a, place, cfg.precision)
    grid = [Fraction(args.eps)] if args.eps else eps_grid(place)
    last = None
    for eps in grid:
        try:
            return certify_ping(form, b, eps, place, cfg.precision).to_record()
        except CertifiedNegative as exc:
            last = exc
    raise last


def cmd_verify(cfg: JobConfig, args) -> dict:
    from .verify import verify_certificate
    rec = load_json(cfg.input)
    if not isinstance(rec, dict):
        raise InputError("certificate must be a JSON object")
    rep = verify_certificate(rec, max(cfg.precision, 128))
    return rep.to_record()


def cmd_sl2_free(cfg: JobConfig, args) -> dict:
    from .sl2 import Sl2Budget, sl2_free_pair
    S = load_set(cfg.input)
    b = Sl2Budget()
    budget = Sl2Budget(exponent_cap=cfg.budget("exponent_cap", b.exponent_cap),
                       x_power_cap=cfg.budget("x_power_cap", b.x_power_cap),
                       ball_cap=cfg.budget("ball_cap", b.ball_cap),
                       precision=cfg.precision)
    return sl2_free_pair(S, budget).to_record()


def _generators(ctx, args, S):
    if S is None:
        return "standard", [ctx.mat([[1, 1], [0, 1]]), ctx.mat([[1, 0], [1, 1]])]
    return "input", [ctx.mat(m) for m in S]


def cmd_girth(cfg: JobConfig, args):
    from .finitegrp import girth_table
    S = load_set(cfg.input) if cfg.input else None
    qs = _parse_q_list(args.q)
    rows = girth_table(qs, args.strategy, Sigma=S, modulus=args.modulus,
                       pair_cap=cfg.budget("pair_cap", 10_000))
    return {"kind": "girth_table", "strategy": args.strategy, "rows": [r.to_record() for r in rows]}, rows


def cmd_expansion(cfg: JobConfig, args):
    from .finitegrp import ball, expansion_ratio, min_expansion, sl2q_make
    S = load_set(cfg.input) if cfg.input else None
    out = []
    for q in _parse_q_list(args.q):
        ctx = sl2q_make(q, args.modulus)
        spec, A = _generators(ctx, args, S)
        B = ball(ctx, A, args.radius)
        row = {"q": q, "order": ctx.order, "gen_spec": spec, "radius": args.radius,
               "ball_size": len(B), "ratio": _fs(expansion_ratio(ctx, A, B))}
        if args.max_size:
            sym = A + [ctx.inv(a) for a in A]
            r, Bmin = min_expansion(ctx, sym, args.max_size)
            row.update({"max_size": args.max_size, "min_ratio": _fs(r), "min_set": [list(x) for x in Bmin]})
        out.append(row)
    return {"kind": "expansion_table", "rows": out}, None


HANDLERS = {
    "report": cmd_report, "delta": cmd_delta, "growth": cmd_growth, "dplus": cmd_dplus,
    "certify-ping": cmd_certify_ping, "verify": cmd_verify, "sl2-free": cmd_sl2_free,
    "girth": cmd_girth, "expansion": cmd_expansion,
}


def _csv(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = result["rows"]
    if result["kind"] == "girth_table":
        from .finitegrp import CSV_HEADER
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r["q"], r["order"], r["gen_spec"], r["directed_girth"],
                        r["collision_depth"], r["ratio"]])
    else:
        keys = ["q", "order", "gen_spec", "radius", "ball_size", "ratio", "min_ratio"]
        w.writerow(keys)
        for r in rows:
            w.writerow([r.get(k, "") for k in keys])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ugrowth", description="Certified growth and freeness computations.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("input", nargs="?", help="matrix-set JSON (certificate JSON for verify)")
    ap.add_argument("--place", help="real, or a prime p; default: automatic selection")
    ap.add_argument("--precision", type=int, default=64, help="bits for real enclosures")
    ap.add_argument("-o", "--output", help="output path (written atomically); default stdout")
    ap.add_argument("--format", choices=["json", "csv"], default="json", help="table format for girth/expansion")
    g = ap.add_argument_group("budgets")
    g.add_argument("--ball-cap", type=int)
    g.add_argument("--iterations", type=int, help="conjugator search iterations")
    g.add_argument("--nodes", type=int, help="tree-search nodes at finite places")
    g.add_argument("--nmax", type=int, help="growth: largest radius")
    g.add_argument("--max-radius", type=int, help="dplus: largest radius")
    g.add_argument("--max-power", type=int, help="dplus: largest power of a")
    g.add_argument("--exponent-cap", type=int, help="sl2-free: cap on n5 and n6")
    g.add_argument("--x-power-cap", type=int, help="sl2-free: cap on the power of a")
    g.add_argument("--pair-cap", type=int, help="girth: cap on enumerated pairs")
    ap.add_argument("--eps", help="certify-ping: fixed eps (default: scan the grid)")
    ap.add_argument("--q", help="girth/expansion: comma-separated prime powers")
    ap.add_argument("--modulus", help="girth/expansion: modulus for q = p^k, e.g. x^2+x+1")
    ap.add_argument("--strategy", default="standard",
                    choices=["standard", "from-rational-set", "exhaustive-small"])
    ap.add_argument("--radius", type=int, default=2, help="expansion: radius of the ball B")
    ap.add_argument("--max-size", type=int, default=0, help="expansion: brute-force |B| <= this")
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = JobConfig(
            command=args.command, input=args.input, place=args.place, precision=args.precision,
            output=args.output,
            budgets={"ball_cap": args.ball_cap, "iterations": args.iterations, "nodes": args.nodes,
                     "nmax": args.nmax, "max_radius": args.max_radius, "max_power": args.max_power,
                     "exponent_cap": args.exponent_cap, "x_power_cap": args.x_power_cap,
                     "pair_cap": args.pair_cap},
        )
        result = HANDLERS[cfg.command](cfg, args)
        if isinstance(result, tuple):
            result = result[0]
        text = _csv(result) if args.format == "csv" and "rows" in result else dumps(result)
        if cfg.output:
            write_atomic(cfg.output, text)
        else:
            sys.stdout.write(text)
        if cfg.command == "verify" and not result.get("ok", False):
            return 2
        return 0
    except UGrowthError as exc:
        sys.stderr.write(json.dumps(exc.to_record()) + "\n")
        return exc.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
