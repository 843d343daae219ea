"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import json
import time
from fractions import Fraction

import numpy as np
import pytest

import oracles
from conftest import GOLDEN
from sierpinski_fvm.analysis import self_convergence_study
from sierpinski_fvm.cli import main
from sierpinski_fvm.config import parse_config
from sierpinski_fvm.graphs import (
    build_cell_graph,
    build_vertex_laplacian,
    cell_laplacian,
    recursive_corner_label,
    recursive_interior_label,
)
from sierpinski_fvm.io import read_snapshot
from sierpinski_fvm.solver import SchemeConfig, SchemeMatrix, run
from sierpinski_fvm.spectral import (
    cfl_admissible,
    cfl_max_h,
    cfl_max_h_exact,
    phi,
    phi_branches,
    spectral_radius,
    verify_decimation,
)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail
    return emit


def test_01_cfl_reproduction(report):
    start = time.perf_counter()
    radii = {}
    for mode in ("dirichlet-ghost", "neumann-cells"):
        for m in (1, 2, 3):
            h = 2 / (9 * 5**m) * (1 - 1e-9)
            radii[(mode, m)] = spectral_radius(SchemeMatrix(cell_laplacian(3, m, mode), h, "explicit"))
    elapsed = time.perf_counter() - start
    worst = max(radii.values())
    ok = worst <= 1 + 1e-12 and elapsed < 5
    report(1, "CFL bound implies rho(A) <= 1", ok, f"max rho = {worst!r}, {elapsed:.2f} s")


def test_02_preset_admissibility(report):
    verdicts = {}
    for name in ("gasket-paper", "tetra-paper"):
        cfg = parse_config(preset=name)
        h = cfg.scheme_config().h_exact
        verdicts[name] = (h, cfl_max_h_exact(cfg.d, cfg.m), cfl_admissible(cfg.d, cfg.m, h))
    g_h, g_bound, g_ok = verdicts["gasket-paper"]
    t_h, t_bound, t_ok = verdicts["tetra-paper"]
    ok = (g_ok and g_h == Fraction(1, 200_000) and g_bound == Fraction(2, 9 * 5**6)
          and t_h == Fraction(1, 100_000) and t_bound == Fraction(2, 16 * 6**4))
    detail = (f"gasket h=5e-6 vs {float(g_bound):.5g}: {'admissible' if g_ok else 'violated'}; "
              f"tetra h=1e-5 vs {float(t_bound):.5g}: {'admissible' if t_ok else 'violated'}")
    report(2, "preset step sizes (exact rationals)", ok, detail)


def test_03_golden_matrices(report):
    A3 = build_vertex_laplacian(3, 0).toarray()
    A4 = build_vertex_laplacian(4, 0).toarray()
    B = build_vertex_laplacian(3, 2).toarray()
    ok = (np.array_equal(A3, [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])
          and np.array_equal(A4, [[3, -1, -1, -1], [-1, 3, -1, -1], [-1, -1, 3, -1], [-1, -1, -1, 3]])
          and not B.sum(axis=1).any() and np.array_equal(B, B.T))
    report(3, "vertex Laplacian base matrices and m=2 structure", ok,
           f"A0 (d=3, d=4) exact; d=3 m=2 is {B.shape[0]}x{B.shape[1]}, symmetric, zero row sums")


# Hand-evaluated C_k(n, m): HAND[(d, k)][m] lists n = 1..d.
HAND = {
    (3, 1): {1: [1, 2, 3], 2: [1, 4, 7], 3: [1, 10, 19]},
    (3, 2): {1: [2, 3, 4], 2: [3, 6, 9], 3: [6, 15, 24]},
    (3, 3): {1: [1, 2, 3], 2: [3, 6, 9], 3: [9, 18, 27]},
    (4, 1): {1: [1, 2, 3, 4], 2: [1, 5, 9, 13], 3: [1, 17, 33, 49]},
    (4, 2): {1: [2, 3, 4, 5], 2: [3, 7, 11, 15], 3: [7, 23, 39, 55]},
    (4, 3): {1: [3, 4, 5, 6], 2: [5, 9, 13, 17], 3: [13, 29, 45, 61]},
    (4, 4): {1: [1, 2, 3, 4], 2: [4, 8, 12, 16], 3: [16, 32, 48, 64]},
}
# I_k(m) for m = 1, 2, 3
INTERIOR = {(3, 2): [2, 3, 6], (4, 2): [2, 3, 7], (4, 3): [3, 5, 13]}


def test_04_corner_label_recursions(report):
    mismatches = []
    for (d, k), by_level in HAND.items():
        for m, labels in by_level.items():
            got = [recursive_corner_label(d, k, n, m) for n in range(1, d + 1)]
            if got != labels:
                mismatches.append(f"C{k}(.,{m}) d={d}: {got} != {labels}")
    for (d, k), labels in INTERIOR.items():
        got = [recursive_interior_label(d, k, m) for m in (1, 2, 3)]
        if got != labels:
            mismatches.append(f"I{k} d={d}: {got} != {labels}")
    checked = sum(len(v) for v in HAND.values()) + len(INTERIOR)
    report(4, "corner-label recursions", not mismatches,
           f"{checked} label families, {len(mismatches)} mismatches (I2(3)={recursive_interior_label(3, 2, 3)}, "
           f"d=4 I3(2)={recursive_interior_label(4, 3, 2)}) {'; '.join(mismatches)}")


def test_05_cell_graph_oracle(report):
    bad = 0
    edges = 0
    for d in (3, 4):
        for m in (0, 1, 2, 3):
            mine, ref = build_cell_graph(d, m).edge_set(), oracles.cell_adjacency(d, m)
            bad += len(mine ^ ref)
            edges += len(ref)
    report(5, "recursive cell graph equals exact geometric adjacency", bad == 0,
           f"{edges} oracle edges over d in (3,4), m <= 3; {bad} mismatched")


def test_06_decimation(report):
    notes, ok = [], True
    for m in (2, 3):
        rep = verify_decimation(m, 3, "neumann-cells")
        gold = json.loads((GOLDEN / f"decimation_d3_m{m}_neumann-cells.json").read_text())
        got = sorted(rep.conforming.items())
        want = sorted((v, k) for v, k in gold["conforming"])
        same = len(got) == len(want) and all(abs(a - b) <= 1e-8 and ka == kb
                                             for (a, ka), (b, kb) in zip(got, want))
        has_zero = any(abs(v) <= 1e-8 for v, _ in got)
        ok &= bool(got) and has_zero and same
        notes.append(f"m={m}: {sum(k for _, k in got)}/{3**m} conforming, golden {'match' if same else 'MISMATCH'}")
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for d in (3, 4, 5):
        for x in rng.uniform(0, (d + 2) ** 2 / 4, 1000):
            lo, hi = phi_branches(d, x)
            worst = max(worst, abs(phi(d, lo) - x), abs(phi(d, hi) - x))
    ok &= worst <= 1e-12
    notes.append(f"max |phi(phi_pm(x)) - x| = {worst:.2e} over 3000 points")
    report(6, "spectral decimation diagnostic", ok, "; ".join(notes))


def test_07_implicit_unconditional_stability(report):
    start = time.perf_counter()
    h = 100 * cfl_max_h(3, 3)
    N = 1000
    u0 = np.random.default_rng(7).random(27)
    cfg = SchemeConfig(h * N, N, scheme="implicit", snapshot_steps=range(N + 1))
    norms = run(cfg, u0, 3, 3).max_norms
    elapsed = time.perf_counter() - start
    increases = sum(b > a for a, b in zip(norms, norms[1:]))
    ok = increases == 0 and elapsed < 10
    report(7, "implicit scheme at 100x CFL", ok,
           f"{N} steps, {increases} increases of the max norm, {norms[0]:.3g} -> {norms[-1]:.3g}, {elapsed:.2f} s")


def test_08_conservation_and_maximum_principle(report):
    N = 10_000
    h = cfl_max_h(3, 4) / 2
    u0 = np.random.default_rng(8).uniform(0, 1, 81)
    cfg = SchemeConfig(h * N, N, boundary_mode="neumann-cells", snapshot_steps=range(N + 1))
    s = run(cfg, u0, 3, 4)
    masses = np.array(s.masses)
    drift = float(np.max(np.abs(masses - masses[0])) / abs(masses[0]))
    vals = np.array(s.values)
    below, above = u0.min() - vals.min(), vals.max() - u0.max()
    ok = drift <= 1e-10 and below <= 1e-12 and above <= 1e-12
    report(8, "mass conservation and maximum principle", ok,
           f"d=3 m=4, {N} steps: relative mass drift {drift:.2e}, bound overshoot {max(below, above, 0):.2e}")


def test_09_self_convergence(report):
    start = time.perf_counter()
    table = self_convergence_study(3, [2, 3, 4], scheme="implicit", T=0.1, m_ref=5)
    elapsed = time.perf_counter() - start
    ok = table.strictly_decreasing and elapsed < 120
    errs = ", ".join(f"m={r.m}: {r.error:.3e}" for r in table.rows)
    report(9, "implicit self-convergence against m=5", ok, f"{errs}; {elapsed:.1f} s")


def _figure(tmp_path, m, N):
    out = tmp_path / f"m{m}"
    start = time.perf_counter()
    args = ["simulate", "--preset", "gasket-paper", "--m", str(m), "--N", str(N),
            "--snapshots", "0,10,100,500", "--out", str(out)]
    code = main(args)
    elapsed = time.perf_counter() - start
    files = sorted(out.glob("snapshot_*.csv"))
    sups = [float(np.max(np.abs(read_snapshot(f)))) for f in files]
    gold = json.loads((GOLDEN / f"figure_d3_m{m}.json").read_text())["sup_norms"]
    return code, files, sups, gold, elapsed


def test_10_figure_reproduction(report, tmp_path, capsys):
    code, files, sups, gold, elapsed = _figure(tmp_path, 5, 20_000)
    code6, files6, sups6, gold6, elapsed6 = _figure(tmp_path, 6, 200_000)
    capsys.readouterr()
    decreasing = all(b < a for a, b in zip(sups, sups[1:]))
    decreasing6 = all(b < a for a, b in zip(sups6, sups6[1:]))
    golden = np.allclose(sups, gold, rtol=1e-12) and np.allclose(sups6, gold6, rtol=1e-12)
    ok = (code == 0 and code6 == 0 and len(files) == 4 and len(files6) == 4 and decreasing and decreasing6
          and golden and elapsed < 60 and elapsed6 < 600)
    detail = (f"m=5: sup {', '.join(f'{s:.4g}' for s in sups)} ({elapsed:.1f} s); "
              f"m=6 full preset: sup {', '.join(f'{s:.4g}' for s in sups6)} ({elapsed6:.1f} s); "
              f"golden {'match' if golden else 'MISMATCH'}")
    report(10, "gasket figure schedule k = 0, 10, 100, 500", ok, detail)
