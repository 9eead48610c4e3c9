"""Acceptance suite: eleven end-to-end criteria, one PASS/FAIL line each.

Run under pytest, or directly with ``python3 tests/test_acceptance.py``.
"""
import itertools
import json
import math
import os
import subprocess
import sys
import tempfile
import time

import mpmath
import numpy as np
import pytest

from hypick.geometry import conflict_graph, decompose_separated, greedy_coloring
from hypick.mobius import (
    ConstantMap,
    ScaledMap,
    beta,
    compose,
    random_automorphism,
    random_blaschke,
    random_disc_points,
)
from hypick.quotients import (
    consistency_check,
    last_row_closed_form,
    necessity_targets,
    quotient_map,
    triangle_from_data,
)
from hypick.sampling import annulus_harmonic_measure, hyperbolic_norm, sampling_ratio
from hypick.solver import (
    BOUNDARY_UNIQUE,
    UNSOLVABLE,
    grid_sup_norm,
    interpolation_residual,
    schur_solve,
    solvability_criteria,
)

SEED = 20240601


def distinct_points(rng, n, radius=0.9, min_gap=1e-3):
    while True:
        Z = random_disc_points(rng, n, radius)
        if n < 2:
            return Z
        d = np.abs(Z[:, None] - Z[None, :]) + np.eye(n)
        if d.min() > min_gap:
            return Z


def solver_corpus():
    """200 instances (f, Z, W): degree d <= 6, n <= d nodes, W = f(Z)."""
    rng = np.random.default_rng(SEED)
    out = []
    for _ in range(200):
        d = int(rng.integers(1, 7))
        n = int(rng.integers(1, d + 1))
        f = random_blaschke(rng, d, 0.9)
        Z = distinct_points(rng, n)
        out.append((f, Z, np.asarray(f.value(Z))))
    return out


def criterion_1():
    t0 = time.perf_counter()
    worst_res, worst_sup = 0.0, 0.0
    for f, Z, W in solver_corpus():
        g = schur_solve(triangle_from_data(Z, W))
        worst_res = max(worst_res, interpolation_residual(g, Z, W))
        worst_sup = max(worst_sup, grid_sup_norm(g, 64))
    elapsed = time.perf_counter() - t0
    ok = worst_res <= 1e-9 and worst_sup <= 1 + 1e-9 and elapsed < 10
    return ok, f"max residual {worst_res:.2e}, max |g| on 4096-point grid {worst_sup:.12f}, {elapsed:.2f} s"


def criterion_2():
    worst = max(consistency_check(f, Z, W) for f, Z, W in solver_corpus())
    return worst <= 1e-8, f"max triangle/map deviation {worst:.2e}"


def criterion_3():
    rng = np.random.default_rng(SEED + 3)
    worst_excess, worst_eq, n_eq = -math.inf, 0.0, 0
    for _ in range(1000):
        d = int(rng.integers(1, 6))
        k = int(rng.integers(0, d))
        f = random_blaschke(rng, d, 0.9)
        g = quotient_map(f, list(distinct_points(rng, k))) if k else f
        v, w = distinct_points(rng, 2)
        bg, bz = beta(g.value(v), g.value(w)), beta(v, w)
        worst_excess = max(worst_excess, bg - bz)
        if k == d - 1:
            n_eq += 1
            worst_eq = max(worst_eq, abs(bg / bz - 1))
    ok = worst_excess <= 1e-8 and worst_eq <= 1e-6
    return ok, f"max beta excess {worst_excess:.2e}; equality case ({n_eq} pairs) max |ratio-1| {worst_eq:.2e}"


def criterion_4():
    """Mixed corpus: scaled Blaschke data (solvable) and uniform random targets."""
    rng = np.random.default_rng(SEED + 4)
    used = excluded = 0
    dis = {"i": 0, "ii": 0, "iii": 0}
    for it in range(500):
        n = int(rng.integers(1, 6))
        Z = distinct_points(rng, n)
        if it % 2 == 0:
            B = random_blaschke(rng, int(rng.integers(n, 7)), 0.9)
            W = rng.uniform(0.2, 0.999) * np.asarray(B.value(Z))
        else:
            W = random_disc_points(rng, n, 0.95)
        t = triangle_from_data(Z, W)
        mods = [abs(v) for _, _, v in t.defined_entries()]
        if t.degenerate_at is not None or any(1 - 1e-6 <= m <= 1 for m in mods):
            excluded += 1
            continue
        used += 1
        v = solvability_criteria(t)
        definite = v.pick_min_eigenvalue > 1e-9
        for name in dis:
            dis[name] += (v.criteria[name] == "pass") != definite
    ok = sum(dis.values()) == 0
    detail = (
        f"{used} instances ({excluded} excluded); disagreements with Pick definiteness: "
        f"(i) {dis['i']}, (ii) {dis['ii']}, (iii) {dis['iii']}"
    )
    return ok, detail


def criterion_5():
    rng = np.random.default_rng(SEED + 5)
    tau = random_automorphism(rng)
    Z = distinct_points(rng, 4, 0.8)
    W = np.asarray(tau.value(Z))
    v = solvability_criteria(triangle_from_data(Z, W))
    c = v.candidate
    good = v.status == BOUNDARY_UNIQUE and c.found and c.chain.degree == 1 and c.residual <= 1e-9
    W2 = W.copy()
    W2[3] += 1e-3
    v2 = solvability_criteria(triangle_from_data(Z, W2))
    rejected = v2.status == UNSOLVABLE and (v2.candidate is None or not v2.candidate.found)
    witness = v2.candidate.residual if v2.candidate is not None else math.nan
    return good and rejected, (
        f"exact data: {v.status}, degree {c.chain.degree if c and c.found else None}, residual {c.residual:.1e}; "
        f"perturbed: {v2.status}, residual witness {witness:.1e}"
    )


def criterion_6():
    rng = np.random.default_rng(SEED + 6)
    autos = [hyperbolic_norm(random_automorphism(rng), 64) for _ in range(5)]
    half = hyperbolic_norm(ScaledMap(0.5), 64)
    consts = [hyperbolic_norm(ConstantMap(c), 64) for c in (0, 0.5, -0.3 + 0.8j)]
    others = [hyperbolic_norm(random_blaschke(rng, d), 64) for d in (1, 2, 4, 6)]
    others += [hyperbolic_norm(compose(ScaledMap(0.8), random_blaschke(rng, 3)), 64)]
    allv = autos + [half] + consts + others
    ok = (
        all(abs(a - 1) <= 1e-6 for a in autos)
        and abs(half - 0.5) <= 1e-6
        and all(c == 0 for c in consts)
        and max(allv) <= 1 + 1e-10
    )
    return ok, f"automorphisms max |N-1| {max(abs(a - 1) for a in autos):.1e}; N(z/2) = {half!r}; max N {max(allv)!r}"


def beta_oracle(z, w):
    mpmath.mp.dps = 50
    z, w = mpmath.mpc(z), mpmath.mpc(w)
    r = abs((z - w) / (1 - mpmath.conj(w) * z))
    return mpmath.log((1 + r) / (1 - r))


def criterion_7():
    radii = (0.9, 0.99, 0.999)
    ours, oracle = [], []
    for r in radii:
        Z = r * np.exp(2j * np.pi * np.arange(8) / 8)
        ours.append(sampling_ratio(Z, ScaledMap(0.5)))
        oracle.append(
            float(max(beta_oracle(Z[i] / 2, Z[j] / 2) / beta_oracle(Z[i], Z[j]) for i, j in itertools.combinations(range(8), 2)))
        )
    gap = max(abs(a - b) for a, b in zip(ours, oracle))
    decreasing = ours[0] > ours[1] > ours[2]
    same_side = (ours[2] < 0.1) == (oracle[2] < 0.1)
    return decreasing and gap <= 1e-10 and same_side, (
        f"ratios {', '.join(f'{x:.6f}' for x in ours)}; oracle gap {gap:.1e}; "
        f"below 0.1 at r=0.999: {ours[2] < 0.1} (oracle {oracle[2] < 0.1})"
    )


def annulus_oracle(theta, R):
    mpmath.mp.dps = 40
    r_out, r, r_in = (mpmath.tanh(mpmath.mpf(s) / 2) for s in (4 * R, 2 * R, theta * R))
    return float(mpmath.log(r / r_out) / mpmath.log(r_in / r_out))


def criterion_8():
    exact = all(annulus_harmonic_measure(2, R) == 1.0 for R in (0.5, 1, 2))
    thetas = np.linspace(0.02, 2, 100)
    mono, gap = True, 0.0
    for R in (0.5, 1, 2):
        vals = [annulus_harmonic_measure(float(t), R) for t in thetas]
        mono &= bool(np.all(np.diff(vals) > 0))
        gap = max(gap, max(abs(v - annulus_oracle(float(t), R)) for v, t in zip(vals, thetas)))
    return exact and mono and gap <= 1e-10, f"omega(2,R)==1: {exact}; strictly increasing: {mono}; oracle gap {gap:.1e}"


def chromatic_oracle(g):
    """Smallest k admitting a proper colouring, by plain backtracking in index order."""
    n = g.number_of_nodes()
    adj = [set(g.adj[v]) for v in range(n)]

    def colourable(k, col, v):
        if v == n:
            return True
        for c in range(min(k, max(col[:v], default=-1) + 2)):
            if all(col[u] != c for u in adj[v] if u < v):
                col[v] = c
                if colourable(k, col, v + 1):
                    return True
        return False

    return next(k for k in range(1, n + 1) if colourable(k, [0] * n, 0))


def criterion_9():
    reported_bad = greedy_bad = 0
    for s in range(50):
        rng = np.random.default_rng(SEED + 900 + s)
        size = int(rng.integers(4, 11))
        centers = random_disc_points(rng, 3, 0.6)
        Z = np.array([centers[i % 3] + 0.05 * random_disc_points(rng, 1, 0.9)[0] for i in range(size)])
        g = conflict_graph(Z, 0.6)
        chi = chromatic_oracle(g)
        reported_bad += decompose_separated(Z, 0.6, size).part_count != chi
        greedy_bad += max(greedy_coloring(g)) + 1 != chi
    n = 4
    clique = 0.01 * np.arange(n + 1)
    d = decompose_separated(clique, 1.0, n)
    ok = reported_bad == 0 and greedy_bad == 0 and not d.feasible and len(d.clique) == n + 1
    return ok, (
        f"50 configs: reported/oracle mismatches {reported_bad}, greedy/oracle mismatches {greedy_bad}; "
        f"{n + 1}-clique feasible with {n} parts: {d.feasible}"
    )


def criterion_10():
    rng = np.random.default_rng(SEED + 10)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        Z = distinct_points(rng, n + 1, 0.2, 1e-2)
        W = necessity_targets(Z, float(rng.uniform(0.05, 1)), float(rng.uniform(0.05, 1)))
        t = triangle_from_data(Z[1:], W[1:])
        row = last_row_closed_form(Z, W[-1])
        for k, v in enumerate(row, start=1):
            worst = max(worst, abs(t.entry(k, n) - v))
    return worst <= 1e-12, f"max |triangle - closed form| {worst:.1e}"


def _problem(path, Z, W=None):
    doc = {"points": [{"re": float(z.real), "im": float(z.imag)} for z in Z], "metadata": {"origin": "acceptance"}}
    if W is not None:
        doc["targets"] = [{"re": float(w.real), "im": float(w.imag)} for w in W]
    with open(path, "w") as fh:
        json.dump(doc, fh)
    return path


def criterion_11():
    rng = np.random.default_rng(SEED + 11)
    tmp = tempfile.mkdtemp(prefix="hypick-acc-")
    Z = distinct_points(rng, 6, 0.8)
    f = random_blaschke(rng, 6)
    data = _problem(os.path.join(tmp, "data.json"), Z, f.value(Z))
    pts = _problem(os.path.join(tmp, "pts.json"), Z)
    runs = {
        "triangle": ["triangle", data, "--csv-out", "{out}"],
        "solve": ["solve", data, "--seed-map", "blaschke:2", "--grid", "16", "--emit-samples", "{out}"],
        "check": ["check", data, "--epsilon", "0.9", "--order", "3", "--permutations", "sampled:4", "--tuple-budget", "5"],
        "geometry": ["geometry", pts, "--eta", "0.5", "--order", "1", "--dyadic-depth", "6"],
        "sampling": ["sampling", pts, "--family", "conj-blaschke:3", "--trials", "4", "--grid", "16",
                     "--density-R", "2", "--csv-out", "{out}"],
        "annulus": ["annulus", "--theta", "1.3", "--radius", "0.7"],
    }
    env = dict(os.environ, HYPICK_SEED="17")
    differing = []
    for name, argv in runs.items():
        outputs = []
        for rep in range(2):
            csv_path = os.path.join(tmp, f"{name}-{rep}.csv")
            args = [a.replace("{out}", csv_path) for a in argv]
            proc = subprocess.run([sys.executable, "-m", "hypick", *args], capture_output=True, env=env)
            csv_bytes = open(csv_path, "rb").read() if os.path.exists(csv_path) else b""
            outputs.append((proc.returncode, proc.stdout, csv_bytes))
        if outputs[0] != outputs[1] or outputs[0][0] == 2:
            differing.append(name)
    return not differing, f"{len(runs)} subcommands re-run; differing or failed: {differing or 'none'}"


CRITERIA = [
    ("solver round-trip", criterion_1),
    ("triangle/function equivalence", criterion_2),
    ("multi-point Schwarz-Pick", criterion_3),
    ("criterion equivalence", criterion_4),
    ("boundary path", criterion_5),
    ("N(f) values", criterion_6),
    ("sampling-ratio decay", criterion_7),
    ("annulus harmonic measure", criterion_8),
    ("decomposition oracle", criterion_9),
    ("necessity last row", criterion_10),
    ("CLI determinism", criterion_11),
]


def _line(i, name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] AC{i:02d} {name}: {detail}"


@pytest.mark.parametrize("index", range(1, len(CRITERIA) + 1), ids=[f"AC{i:02d}" for i in range(1, 12)])
def test_acceptance(index, capsys):
    name, fn = CRITERIA[index - 1]
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(index, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for i, (name, fn) in enumerate(CRITERIA, start=1):
        ok, detail = fn()
        failures += not ok
        print(_line(i, name, ok, detail), flush=True)
    sys.exit(1 if failures else 0)
