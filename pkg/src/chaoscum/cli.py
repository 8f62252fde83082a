"""Command-line interface.

    chaoscum cumulants --input kernel.json --smax 4
    chaoscum crossvalidate --tol 1e-8
    chaoscum fmt-demo --n 4 16 64 256
    chaoscum diagrams 3 2

Exit codes: 0 success, 1 validation failure, 2 input error.
"""
from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import diagrams, montecarlo, recursive
from .chaos import ChaosExpansion, cumulants_via_gamma
from .errors import ChaosCumError
from .io import load
from .symtensor import SymTensor, norm, sym_contract

METHODS = ("recursive", "gamma", "diagram", "montecarlo")
EXACT = ("recursive", "gamma", "diagram")
SKIPPED = "skipped"
ABS_FLOOR = 1e-12

DEFAULT_CAPS = {
    "diagram_edge_cap": 10,
    "moment_order_cap": 64,
    "mc_sample_cap": 10**7,
}


class InputError(Exception):
    """Bad flags, config or input file (exit status 2)."""


@dataclass
class RunConfig:
    input: str | None = None
    methods: tuple = METHODS
    s_max: int = 4
    N: int = 200_000
    seed: int = 0
    tolerance: float = 1e-8
    format: str = "table"
    caps: dict = field(default_factory=lambda: dict(DEFAULT_CAPS))

    def validate(self, check_tolerance=True):
        if check_tolerance and not self.tolerance > 0:
            raise InputError(f"--tol must be > 0, got {self.tolerance}")
        if self.s_max < 2:
            raise InputError(f"--smax must be >= 2, got {self.s_max}")
        if not self.methods:
            raise InputError("at least one method is required")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise InputError(f"unknown method(s): {', '.join(bad)}")
        if "montecarlo" in self.methods:
            if self.N < 1000:
                raise InputError(f"--samples must be >= 1000, got {self.N}")
            if self.N > self.caps["mc_sample_cap"]:
                raise InputError(f"--samples {self.N} exceeds mc_sample_cap={self.caps['mc_sample_cap']}")


def read_config(path):
    """Parse a key=value caps file; blank lines and '#' comments are ignored."""
    caps = dict(DEFAULT_CAPS)
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = (part.strip() for part in line.partition("="))
        if not sep or key not in caps:
            raise InputError(f"{path}:{n}: expected one of {sorted(caps)} as key=value")
        try:
            caps[key] = int(val)
        except ValueError as exc:
            raise InputError(f"{path}:{n}: {key} must be an integer") from exc
    return caps


def rel_discrepancy(a, b):
    """|a - b| relative to the larger magnitude, with an absolute floor."""
    return abs(a - b) / max(abs(a), abs(b), ABS_FLOOR)


def random_kernel(rng, q, d):
    """Uniform[-1, 1] entries on sorted indices, normalized so that q! ||f||^2 = 1."""
    f = SymTensor(q, d, rng.uniform(-1.0, 1.0, math.comb(d + q - 1, q)))
    return f / math.sqrt(math.factorial(q) * norm(f) ** 2)


# ---------------------------------------------------------------------------
# cumulants


@dataclass
class CumulantReport:
    methods: tuple
    rows: list  # dicts: s, values {method: float | None}, stderr, discrepancy
    tolerance: float
    notes: list = field(default_factory=list)
    mc: list = field(default_factory=list)

    @property
    def worst(self):
        return max((r["discrepancy"] for r in self.rows), default=0.0)

    def to_json(self):
        return {
            "methods": list(self.methods),
            "tolerance": self.tolerance,
            "rows": [
                {
                    "s": r["s"],
                    "values": {m: (SKIPPED if v is None else v) for m, v in r["values"].items()},
                    "stderr": r["stderr"],
                    "discrepancy": r["discrepancy"],
                }
                for r in self.rows
            ],
            "max_discrepancy": self.worst,
            "montecarlo": {"generator": montecarlo.GENERATOR, "results": [vars(e) for e in self.mc]} if self.mc else None,
            "notes": self.notes,
        }

    def to_table(self):
        head = ["s"] + list(self.methods) + ["max rel diff"]
        body = []
        for r in self.rows:
            cells = [str(r["s"])]
            for m in self.methods:
                v = r["values"][m]
                if v is None:
                    cells.append(SKIPPED)
                elif m == "montecarlo":
                    cells.append(f"{v:.6g} ± {r['stderr']:.2g}")
                else:
                    cells.append(f"{v:.12g}")
            cells.append(f"{r['discrepancy']:.2e}")
            body.append(cells)
        widths = [max(len(row[k]) for row in [head] + body) for k in range(len(head))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in [head] + body]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines + [f"note: {n}" for n in self.notes])


def _single_kernel(obj):
    """The kernel f if obj is I_q(f) with q >= 2, else None."""
    if isinstance(obj, SymTensor):
        return obj if obj.order >= 2 else None
    if obj.constant == 0.0 and len(obj.kernels) == 1:
        (q, f), = obj.kernels.items()
        return f if q >= 2 else None
    return None


def cmd_cumulants(cfg):
    obj = load(cfg.input)
    F = ChaosExpansion.from_kernel(obj) if isinstance(obj, SymTensor) else obj
    f = _single_kernel(obj)
    s_range = range(1, cfg.s_max + 1)
    cols, notes, mc = {}, [], []

    for m in cfg.methods:
        if m == "recursive":
            if f is None:
                notes.append("recursive: needs a single kernel I_q(f) with q >= 2")
                cols[m] = [None] * cfg.s_max
            else:
                cols[m] = recursive.cumulants_recursive(f, cfg.s_max)
        elif m == "gamma":
            top = cfg.s_max * F.max_order
            if top > cfg.caps["moment_order_cap"]:
                notes.append(f"gamma: kernel order up to {top} exceeds moment_order_cap")
                cols[m] = [None] * cfg.s_max
            else:
                cols[m] = cumulants_via_gamma(F, cfg.s_max)
        elif m == "diagram":
            if f is None:
                notes.append("diagram: needs a single kernel I_q(f) with q >= 2")
                cols[m] = [None] * cfg.s_max
                continue
            col = []
            for s in s_range:
                if s == 1:
                    col.append(0.0)
                elif s * f.order // 2 > cfg.caps["diagram_edge_cap"] and (s * f.order) % 2 == 0:
                    col.append(None)
                else:
                    col.append(diagrams.kappa_diagram(f, s))
            if None in col:
                notes.append(f"diagram: skipped where sq/2 > diagram_edge_cap={cfg.caps['diagram_edge_cap']}")
            cols[m] = col
        elif m == "montecarlo":
            mc = montecarlo.estimate_cumulants(F, cfg.s_max, cfg.N, cfg.seed)
            cols[m] = [e.estimate for e in mc]

    rows = []
    for k, s in enumerate(s_range):
        values = {m: cols[m][k] for m in cfg.methods}
        exact = [v for m, v in values.items() if m in EXACT and v is not None]
        disc = max((rel_discrepancy(a, b) for a, b in itertools.combinations(exact, 2)), default=0.0)
        rows.append({"s": s, "values": values, "stderr": mc[k].stderr if mc else None, "discrepancy": disc})
    return CumulantReport(tuple(cfg.methods), rows, cfg.tolerance, notes, mc)


# ---------------------------------------------------------------------------
# crossvalidate

GRID_Q = (2, 3)
GRID_D = (2, 3, 4)


def cmd_crossvalidate(cfg, out=sys.stdout):
    """Run all exact methods on seeded random kernels; return the exit status."""
    if not cfg.tolerance > 0:
        print(
            f"tolerance must be > 0 (got {cfg.tolerance}): the exact methods are evaluated in "
            "floating point and agree only up to rounding",
            file=out,
        )
        return 1
    rng = np.random.default_rng(cfg.seed)
    worst = (0.0, None)
    cells = 0
    for q in GRID_Q:
        for d in GRID_D:
            f = random_kernel(rng, q, d)
            rec = recursive.cumulants_recursive(f, cfg.s_max)
            gam = cumulants_via_gamma(ChaosExpansion.from_kernel(f), cfg.s_max)
            for s in range(1, cfg.s_max + 1):
                vals = {"recursive": rec[s - 1], "gamma": gam[s - 1]}
                if s >= 2 and s * q // 2 <= cfg.caps["diagram_edge_cap"]:
                    vals["diagram"] = diagrams.kappa_diagram(f, s)
                for (ma, a), (mb, b) in itertools.combinations(vals.items(), 2):
                    r = rel_discrepancy(a, b)
                    if worst[1] is None or r > worst[0]:
                        worst = (r, f"q={q} d={d} s={s} {ma}={a:.15g} {mb}={b:.15g}")
                cells += 1
    ok = worst[0] <= cfg.tolerance
    print(f"checked {cells} (q, d, s) cells, seed={cfg.seed}, tol={cfg.tolerance:g}", file=out)
    print(f"worst relative discrepancy {worst[0]:.3e}: {worst[1]}", file=out)
    print("PASS" if ok else "FAIL", file=out)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# fourth moment theorem demo


def fmt_kernel(n, normalized=True):
    """(2n)^{-1/2} sum_{i<=n} e_i (x) e_i (or the unnormalized sum)."""
    f = SymTensor.from_dict(2, n, {(i, i): 1.0 for i in range(n)})
    return f / math.sqrt(2 * n) if normalized else f


def fmt_demo_rows(n_list, s_max):
    """Per n: contraction norm and kappa_2..kappa_{s_max} of F_n = I_2(f_n).

    Computed on the integer kernel g = sum e_i (x) e_i and rescaled with
    kappa_s(cF) = c^s kappa_s(F), c^2 = 1/(2n), which is exact in floating
    point whenever 2n is a power of two.
    """
    rows = []
    for n in n_list:
        g = fmt_kernel(n, normalized=False)
        c2 = 1.0 / (2 * n)
        c = math.sqrt(c2)
        kappas = {}
        for s in range(2, s_max + 1):
            factor = c2 ** (s // 2) * (c if s % 2 else 1.0)
            kappas[s] = factor * recursive.kappa_recursive(g, s)
        rows.append({"n": n, "contraction_norm": c2 * norm(sym_contract(g, g, 1)), "kappa": kappas})
    return rows


def _fmt_table(rows, s_max):
    head = ["n", "||f(x)~1 f||"] + [f"kappa_{s}" for s in range(2, s_max + 1)]
    body = [[str(r["n"]), f"{r['contraction_norm']:.12g}"] + [f"{r['kappa'][s]:.12g}" for s in range(2, s_max + 1)] for r in rows]
    widths = [max(len(row[k]) for row in [head] + body) for k in range(len(head))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in [head] + body]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# argument parsing


def build_parser():
    p = argparse.ArgumentParser(prog="chaoscum", description="Cumulants of multiple Wiener-Ito integrals.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, smax=4):
        sp.add_argument("--smax", type=int, default=smax, help="highest cumulant order")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=1e-8, help="relative tolerance for exact-method agreement")
        sp.add_argument("--format", choices=("table", "json"), default="table")
        sp.add_argument("--config", help="key=value file overriding feasibility caps")

    c = sub.add_parser("cumulants", help="cumulants of a kernel or expansion file")
    c.add_argument("--input", required=True, help="kernel or expansion JSON")
    c.add_argument("--methods", default=",".join(METHODS), help="comma-separated subset of " + ",".join(METHODS))
    c.add_argument("--samples", type=int, default=200_000, help="Monte Carlo sample count")
    common(c)

    x = sub.add_parser("crossvalidate", help="compare exact methods on random kernels")
    common(x, smax=6)

    d = sub.add_parser("fmt-demo", help="fourth moment theorem demo")
    d.add_argument("--n", type=int, nargs="+", default=[4, 16, 64, 256])
    d.add_argument("--smax", type=int, default=6)
    d.add_argument("--format", choices=("table", "json"), default="table")

    g = sub.add_parser("diagrams", help="list K(s, q) with weights")
    g.add_argument("s", type=int)
    g.add_argument("q", type=int)
    return p


def _config_from_args(args, check_tolerance=True):
    caps = read_config(args.config) if getattr(args, "config", None) else dict(DEFAULT_CAPS)
    methods = tuple(m.strip() for m in getattr(args, "methods", ",".join(METHODS)).split(",") if m.strip())
    cfg = RunConfig(
        input=getattr(args, "input", None),
        methods=methods,
        s_max=args.smax,
        N=getattr(args, "samples", 200_000),
        seed=args.seed,
        tolerance=args.tol,
        format=args.format,
        caps=caps,
    )
    cfg.validate(check_tolerance)
    return cfg


def cmd_fmt_demo(n_list, s_max, fmt="table", out=sys.stdout):
    if s_max < 2 or any(n < 1 for n in n_list):
        raise InputError("need --smax >= 2 and positive --n values")
    rows = fmt_demo_rows(n_list, s_max)
    if fmt == "json":
        print(json.dumps(rows, indent=2), file=out)
    else:
        print(_fmt_table(rows, s_max), file=out)
    return 0


def cmd_diagrams(s, q, out=sys.stdout):
    if s < 2 or q < 2:
        raise InputError("need s >= 2 and q >= 2")
    if (s * q) % 2:
        print("empty: sq odd", file=out)
        return 0
    graphs = diagrams.enumerate_K(s, q)
    for g in graphs:
        print(f"{diagrams.format_graph(g)}\t{diagrams.weight(g)}", file=out)
    print(f"count: {len(graphs)}", file=out)
    return 0


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.command == "cumulants":
            cfg = _config_from_args(args)
            report = cmd_cumulants(cfg)
            if cfg.format == "json":
                print(json.dumps(report.to_json(), indent=2), file=out)
            else:
                print(report.to_table(), file=out)
            return 0
        if args.command == "crossvalidate":
            # tol <= 0 is reported by the command itself as a validation failure
            return cmd_crossvalidate(_config_from_args(args, check_tolerance=False), out)
        if args.command == "fmt-demo":
            return cmd_fmt_demo(args.n, args.smax, args.format, out)
        if args.command == "diagrams":
            return cmd_diagrams(args.s, args.q, out)
    except (InputError, ChaosCumError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
