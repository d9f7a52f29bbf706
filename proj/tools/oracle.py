#!/usr/bin/env python3
"""Random instance generator and brute-force reference optimizer.

    oracle.py generate OUTDIR [--seed S] [--count N] [--prefix P]
    oracle.py solve FILE...

`solve` enumerates every integer assignment, scans the continuous variables on
a grid (step 1e-3 when the grid is small enough, coarser otherwise), then
refines the best grid points with SLSQP and a compass search that ends at step
1e-6. It shares no code with the C++ solver.
"""

import argparse
import itertools
import math
import re
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

FEAS_TOL = 1e-6
MAX_GRID_POINTS = 4_000_000


class Poly:
    def __init__(self, terms, n):
        # terms: list of (coeff, exponent tuple)
        self.terms = [(c, tuple(e)) for c, e in terms if c != 0.0]
        self.n = n

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for c, e in self.terms:
            t = np.full(x.shape[:-1], c)
            for j, p in enumerate(e):
                if p:
                    t = t * x[..., j] ** p
            out = out + t
        return out

    def degree(self):
        return max((sum(e) for _, e in self.terms), default=0)


def parse(text):
    names, lower, upper, integer = [], [], [], []
    objective, sense, rows = None, "min", []

    def poly(src, line):
        src = src.replace(" ", "")
        if not src:
            raise ValueError(f"line {line}: empty polynomial")
        if src[0] not in "+-":
            src = "+" + src
        terms = []
        for sign, body in re.findall(r"([+-])([^+-]+(?:[eE][+-][0-9]+[^+-]*)?)", src):
            coeff = -1.0 if sign == "-" else 1.0
            e = [0] * len(names)
            factors = body.split("*")
            if re.fullmatch(r"[0-9.eE+-]+", factors[0]):
                coeff *= float(factors[0])
                factors = factors[1:]
            for f in factors:
                name, _, power = f.partition("^")
                e[names.index(name)] += int(power or 1)
            terms.append((coeff, e))
        return Poly(terms, len(names))

    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#")[0].strip()
        if not line:
            continue
        if line.startswith("var "):
            m = re.fullmatch(r"var\s+(\w+)\s*>=\s*(\S+)\s*<=\s*(\S+)\s*(integer)?", line)
            names.append(m.group(1))
            lower.append(float(m.group(2)))
            upper.append(float(m.group(3)))
            integer.append(m.group(4) is not None)
        elif line.startswith("min ") or line.startswith("max "):
            sense = line[:3]
            objective = poly(line[4:], line_no)
        elif line.startswith("st "):
            m = re.fullmatch(r"st\s+\w+\s*:\s*(.+?)\s*(>=|<=|=)\s*(\S+)", line)
            rows.append((poly(m.group(1), line_no), m.group(2), float(m.group(3))))
        else:
            raise ValueError(f"line {line_no}: cannot read '{line}'")
    return dict(names=names, lower=lower, upper=upper, integer=integer,
                objective=objective, sense=sense, rows=rows)


def violation(inst, x):
    x = np.asarray(x, dtype=float)
    v = np.zeros(x.shape[:-1])
    for p, op, rhs in inst["rows"]:
        val = p.eval(x)
        if op == ">=":
            v = np.maximum(v, rhs - val)
        elif op == "<=":
            v = np.maximum(v, val - rhs)
        else:
            v = np.maximum(v, np.abs(val - rhs))
    return v


def objective(inst, x):
    val = inst["objective"].eval(x)
    return -val if inst["sense"] == "max" else val


def grid_step(widths):
    if not widths:
        return 1e-3
    step = 1e-3
    while math.prod(int(w / step) + 1 for w in widths) > MAX_GRID_POINTS:
        step *= 2
    return step


def refine(inst, x0, cont, fixed):
    n = len(inst["names"])

    def full(y):
        x = np.array(fixed, dtype=float)
        x[cont] = y
        return x

    bounds = [(inst["lower"][j], inst["upper"][j]) for j in cont]
    cons = []
    for p, op, rhs in inst["rows"]:
        if op == ">=":
            cons.append({"type": "ineq", "fun": lambda y, p=p, r=rhs: p.eval(full(y)) - r})
        elif op == "<=":
            cons.append({"type": "ineq", "fun": lambda y, p=p, r=rhs: r - p.eval(full(y))})
        else:
            cons.append({"type": "eq", "fun": lambda y, p=p, r=rhs: p.eval(full(y)) - r})
    best_y = np.array(x0, dtype=float)
    best = objective(inst, full(best_y)) if violation(inst, full(best_y)) <= FEAS_TOL else math.inf
    if cont:
        res = minimize(lambda y: float(objective(inst, full(y))), best_y, method="SLSQP",
                       bounds=bounds, constraints=cons, options={"maxiter": 500, "ftol": 1e-12})
        y = np.clip(res.x, [b[0] for b in bounds], [b[1] for b in bounds])
        if violation(inst, full(y)) <= FEAS_TOL and objective(inst, full(y)) < best:
            best, best_y = float(objective(inst, full(y))), y
    # Compass search on the feasible region.
    step = 1e-2
    while cont and math.isfinite(best) and step >= 1e-6:
        moved = False
        for k in range(len(cont)):
            for s in (-step, step):
                y = best_y.copy()
                y[k] = min(max(y[k] + s, bounds[k][0]), bounds[k][1])
                x = full(y)
                if violation(inst, x) <= FEAS_TOL:
                    f = float(objective(inst, x))
                    if f < best - 1e-15:
                        best, best_y, moved = f, y, True
        if not moved:
            step /= 2
    return best, full(best_y)


def solve(inst, keep=8):
    n = len(inst["names"])
    ints = [j for j in range(n) if inst["integer"][j]]
    cont = [j for j in range(n) if not inst["integer"][j]]
    widths = [inst["upper"][j] - inst["lower"][j] for j in cont]
    step = grid_step(widths)
    axes = [np.linspace(inst["lower"][j], inst["upper"][j], int(round(w / step)) + 1)
            for j, w in zip(cont, widths)]
    best, best_x = math.inf, None
    for combo in itertools.product(*[range(int(inst["lower"][j]), int(inst["upper"][j]) + 1)
                                     for j in ints]):
        fixed = np.zeros(n)
        for j, v in zip(ints, combo):
            fixed[j] = v
        if cont:
            mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(cont))
            pts = np.tile(fixed, (mesh.shape[0], 1))
            pts[:, cont] = mesh
            f = objective(inst, pts)
            viol = violation(inst, pts)
            feasible = viol <= FEAS_TOL
            starts = []
            if feasible.any():
                idx = np.flatnonzero(feasible)
                starts += list(idx[np.argsort(f[idx])[:keep]])
            # Also start from the least violated points, for thin feasible sets.
            starts += list(np.argsort(viol + 1e-9 * f)[:keep // 2])
            for i in dict.fromkeys(starts):
                value, x = refine(inst, mesh[i], cont, fixed)
                if value < best:
                    best, best_x = value, x
        else:
            if violation(inst, fixed) <= FEAS_TOL:
                value = float(objective(inst, fixed))
                if value < best:
                    best, best_x = value, fixed
    external = -best if inst["sense"] == "max" else best
    return external, best_x, step


def fmt(c):
    return f"{c:g}"


def write_poly(terms, names):
    parts = []
    for c, e in terms:
        factors = []
        for j, p in enumerate(e):
            if p == 1:
                factors.append(names[j])
            elif p > 1:
                factors.append(f"{names[j]}^{p}")
        body = "*".join(factors)
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {fmt(abs(c))}*{body}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


def random_terms(rng, n, degree, count):
    terms = {}
    count = min(count, math.comb(n + degree, degree) - 1)
    # Guarantee at least one term of full degree.
    while len(terms) < count:
        d = degree if not terms else int(rng.integers(1, degree + 1))
        e = [0] * n
        for j in rng.integers(0, n, size=d):
            e[j] += 1
        terms[tuple(e)] = round(float(rng.uniform(-4, 4)), 2) or 1.0
    return list(terms.items())


def generate(rng, name, n, degree, n_int, n_rows):
    names = [f"x{j}" for j in range(n)]
    lower, upper, integer = [], [], []
    for j in range(n):
        if j >= n - n_int:
            lo = int(rng.integers(-2, 1))
            lower.append(lo)
            upper.append(lo + int(rng.integers(2, 5)))
            integer.append(True)
        else:
            lo = round(float(rng.uniform(-2, 0)), 1)
            lower.append(lo)
            upper.append(round(lo + float(rng.uniform(1, 3)), 1))
            integer.append(False)
    anchor = np.array([rng.integers(lower[j], upper[j] + 1) if integer[j]
                       else rng.uniform(lower[j], upper[j]) for j in range(n)], dtype=float)
    obj_terms = [(c, e) for e, c in random_terms(rng, n, degree, int(rng.integers(n + 1, n + 5)))]
    lines = [f"# generated instance {name}"]
    for j in range(n):
        kind = " integer" if integer[j] else ""
        lines.append(f"var {names[j]} >= {fmt(lower[j])} <= {fmt(upper[j])}{kind}")
    lines.append(f"{'min' if rng.random() < 0.7 else 'max'} {write_poly(obj_terms, names)}")
    for r in range(n_rows):
        terms = [(c, e) for e, c in random_terms(rng, n, max(2, degree - int(rng.integers(0, 2))),
                                                 int(rng.integers(2, n + 3)))]
        value = float(Poly(terms, n).eval(anchor))
        rhs = round(value + float(rng.uniform(0.2, 2.0)), 2)
        lines.append(f"st c{r}: {write_poly(terms, names)} <= {fmt(rhs)}")
    return "\n".join(lines) + "\n"


# (vars, degree, integers, rows); kept small enough for a dense simplex.
SHAPES = [
    (2, 2, 0, 1), (3, 2, 1, 1), (4, 2, 2, 2), (5, 2, 2, 1), (6, 2, 3, 2),
    (2, 3, 1, 1), (3, 3, 0, 1), (3, 3, 2, 2), (4, 3, 1, 1), (4, 3, 3, 1), (5, 3, 3, 2),
    (2, 4, 0, 1), (2, 4, 1, 1), (3, 4, 1, 1), (3, 4, 2, 2), (4, 4, 2, 1), (4, 4, 3, 1),
    (2, 4, 2, 1),
]


def main():
    ap = argparse.ArgumentParser()
    sub = ap.add_subparsers(dest="cmd", required=True)
    g = sub.add_parser("generate")
    g.add_argument("outdir", type=Path)
    g.add_argument("--seed", type=int, default=2024)
    g.add_argument("--count", type=int, default=len(SHAPES))
    g.add_argument("--prefix", default="o")
    s = sub.add_parser("solve")
    s.add_argument("files", nargs="+", type=Path)
    args = ap.parse_args()

    if args.cmd == "generate":
        rng = np.random.default_rng(args.seed)
        args.outdir.mkdir(parents=True, exist_ok=True)
        for k in range(args.count):
            shape = SHAPES[k % len(SHAPES)]
            name = f"{args.prefix}{k:02d}_n{shape[0]}d{shape[1]}i{shape[2]}"
            (args.outdir / f"{name}.poly").write_text(generate(rng, name, *shape))
        return
    print("instance,optimum,grid_step")
    for path in args.files:
        value, x, step = solve(parse(path.read_text()))
        print(f"{path.stem},{float(value)!r},{step:g}", flush=True)
        print(f"  {path.stem}: {value!r} at {np.round(x, 6).tolist() if x is not None else None}",
              file=sys.stderr, flush=True)


if __name__ == "__main__":
    main()
