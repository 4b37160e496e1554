"""Acceptance criteria AC1..AC10, one PASS/FAIL line each in the run summary."""

import filecmp
import random
import time
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

import conftest
from conftest import EXAMPLE_CONFIG
from test_fractal import cantor_staircase, takagi_landsberg
from quasi_sierpinski import closed_form as cf
from quasi_sierpinski import fem
from quasi_sierpinski.cli import main
from quasi_sierpinski.fractal import (
    INCLINED,
    DyadicPoint,
    ExplicitList,
    GeometricTail,
    RatioSequence,
    dyadic_grid,
    j_function,
    takagi_class,
)
from quasi_sierpinski.runconfig import load_run_config
from quasi_sierpinski.structure import build_topology

pytestmark = pytest.mark.acceptance

TOL_FEM = 1e-8
TOL_CF = 1e-12
GRID = 12  # dyadic points with denominator up to 2**12


def record(ac: str, ok: bool, detail: str):
    conftest.ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {ac} {detail}")
    assert ok, f"{ac}: {detail}"


def rel_dev(got, expected) -> float:
    got, expected = np.asarray(got, float), np.asarray(expected, float)
    return float(np.max(np.abs(got - expected)) / np.max(np.abs(expected)))


@pytest.fixture(scope="module")
def fem_runs(config_set):
    runs = []
    for cfg in config_set:
        analysis = cf.analyze(cfg)
        solution, report = fem.verify(build_topology(cfg), analysis, TOL_FEM)
        runs.append((cfg, analysis, solution, report))
    return runs


def test_ac01_worked_example():
    start = time.perf_counter()
    run = load_run_config(EXAMPLE_CONFIG)
    cfg = run.structure
    analysis = cf.analyze(cfg)
    sol, _ = fem.verify(build_topology(cfg), analysis, TOL_FEM)
    elapsed = time.perf_counter() - start

    rv, rh = sol.reaction_vertical, sol.reaction_horizontal
    expected_rv = np.full(17, 6.25)
    expected_rv[[0, -1]] = 3.125
    dev_rv = float(np.max(np.abs(rv - expected_rv) / expected_rv))
    dev_rh = max(abs(rh[0] - 1.5625), abs(rh[-1] + 1.5625)) / 1.5625
    settle = sol.displacements[build_topology(cfg).supports[0].node][1]
    dev_settle = abs(settle + 1050.0) / 1050.0
    ok = dev_rv <= TOL_FEM and dev_rh <= TOL_FEM and dev_settle <= TOL_FEM and elapsed < 1.0
    record("AC1", ok, f"worked example: reactions rel {dev_rv:.1e}, end H rel {dev_rh:.1e}, "
                      f"settlement {settle:.6f} mm, {elapsed:.3f} s")


def test_ac02_uniform_reactions(fem_runs):
    levels = sorted({cfg.levels for cfg, *_ in fem_runs})
    worst = max(rel_dev(sol.reaction_vertical, a.reaction_vertical) for _, a, sol, _ in fem_runs)
    ok = len(fem_runs) >= 100 and levels == list(range(2, 9)) and worst <= TOL_FEM
    record("AC2", ok, f"uniform reactions: {len(fem_runs)} configs, N={levels[0]}..{levels[-1]}, "
                      f"max rel {worst:.1e}")


def test_ac03_displacements(fem_runs):
    worst = 0.0
    for cfg, a, sol, _ in fem_runs:
        Y = cfg.height
        nids = list(a.epsilon)
        worst = max(
            worst,
            rel_dev([sol.displacements[n][1] / Y for n in nids], [a.epsilon[n] for n in nids]),
            rel_dev([sol.displacements[n][0] / Y for n in nids], [a.mu[n] for n in nids]),
        )
    record("AC3", worst <= TOL_FEM, f"FEM u/Y vs epsilon, mu: max rel {worst:.1e}")


def test_ac04_pvw_residuals(config_set):
    worst, counts_ok = 0.0, True
    for cfg in config_set:
        res = cf.pvw_residuals(cfg, cf.support_displacements(cfg))
        counts_ok &= len(res) == 2 ** (cfg.levels - 1) - 1
        worst = max(worst, max(abs(v) for v in res.values()))
    record("AC4", counts_ok and worst <= TOL_CF,
           f"compatibility residuals: max {worst:.1e}, counts {'ok' if counts_ok else 'wrong'}")


def test_ac05_fractal_identities():
    grid = dyadic_grid(GRID)
    ones = RatioSequence.geometric(1.0)
    parts = {}

    parts["parabola"] = max(
        abs(takagi_class(p, ones, 64) - float(4 * p.fraction * (1 - p.fraction))) for p in grid)

    tl = 0.0
    for r in (0.3, 0.5, 1.5, 3.0):
        seq, w = RatioSequence.geometric(r), 1 / (4 * Fraction(r))
        tl = max(tl, max(abs(takagi_class(p, seq, 64) - float(2 * takagi_landsberg(p.fraction, w)))
                         for p in grid))
    parts["takagi_landsberg"] = tl

    parts["j_identity"] = max(abs(j_function(p, ones) - p.value) for p in grid)

    # as stated: (r / (2r - 1)) J equals the staircase over bases (2r, 2), r = 3/2
    r = 1.5
    seq = RatioSequence.geometric(r)
    parts["cantor"] = max(
        abs(r / (2 * r - 1) * j_function(p, seq) - float(cantor_staircase(p.fraction, Fraction(3))))
        for p in grid)

    ok = all(v <= TOL_CF for v in parts.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in parts.items())
    record("AC5", ok, f"fractal identities on 2^{GRID} grid: {detail}")


def test_ac06_j_form(config_set):
    worst, count = 0.0, 0
    rng = random.Random(6)
    for cfg in config_set:
        ext = GeometricTail(rng.uniform(0.26, 3.0))
        g_form = cf.horizontal_displacements(cfg)
        j_form = cf.horizontal_displacements_j(cfg, ext)
        worst = max(worst, max(abs(j_form[n] - g_form[n]) for n in g_form))
        count += len(g_form)
    record("AC6", worst <= TOL_CF, f"G-difference vs J-form of mu: {count} nodes, max {worst:.1e}")


def test_ac07_interior_horizontal(fem_runs):
    worst = max(float(np.max(np.abs(sol.reaction_horizontal[1:-1]), initial=0.0)) / cfg.load
                for cfg, _, sol, _ in fem_runs)
    record("AC7", worst <= 1e-9, f"interior horizontal reactions: max {worst:.1e} F")


def test_ac08_inclined_independence(config_set):
    rng = random.Random(8)
    d_delta = d_mu = d_eps = 0.0
    for cfg in config_set:
        ratios = (1.0, *[rng.uniform(0.1, 5.0) for _ in range(cfg.levels - 1)])
        other = replace(cfg, area_inclined=rng.uniform(0.1, 100.0),
                        modulus_inclined=rng.uniform(1.0, 400.0),
                        ratios_inclined=RatioSequence(INCLINED, ratios))
        a, b = cf.analyze(cfg), cf.analyze(other)
        d_delta = max(d_delta, float(np.max(np.abs(a.delta - b.delta))))
        for nid in a.mu:
            d_mu = max(d_mu, abs(a.mu[nid] - b.mu[nid]))
            n = nid.level
            if n <= cfg.levels:
                ta = a.groups.omega_i * cf.inclined_term(cfg, n)
                tb = b.groups.omega_i * cf.inclined_term(other, n)
                d_eps = max(d_eps, abs((a.epsilon[nid] + ta) - (b.epsilon[nid] + tb)))
            else:
                d_eps = max(d_eps, abs(a.epsilon[nid] - b.epsilon[nid]))
    ok = d_delta <= 1e-15 and d_mu <= 1e-15 and d_eps <= 1e-15
    record("AC8", ok, f"inclined-property independence: delta {d_delta:.1e}, mu {d_mu:.1e}, "
                      f"epsilon without inclined term {d_eps:.1e}")


def _grid_values(cfg, ext):
    N = cfg.levels
    out = [cf.f_delta(DyadicPoint(i, N - 1), cfg, ext) for i in range(2 ** (N - 1) + 1)]
    for n in range(1, N + 1):
        for t in range(1, 2 ** (n - 1) + 1):
            x = DyadicPoint(2 * t - 1, n)
            out.append(cf.f_epsilon(n, x, cfg, ext))
            out.append(cf.f_mu(n, x, cfg, ext))
    return np.array(out)


def test_ac09_extension_independence(example_config, config_set):
    pairs = [(example_config, GeometricTail(0.3, 0.3**3), GeometricTail(0.75, 0.75))]
    rng = random.Random(9)
    for cfg in config_set[:30]:
        pairs.append((cfg, GeometricTail(rng.uniform(0.26, 4.0), rng.uniform(0.1, 3.0)),
                      ExplicitList(tuple(rng.uniform(0.2, 3.0) for _ in range(64)))))
    worst = 0.0
    for cfg, e1, e2 in pairs:
        worst = max(worst, float(np.max(np.abs(_grid_values(cfg, e1) - _grid_values(cfg, e2)))))
    record("AC9", worst <= TOL_CF, f"extension independence: {len(pairs)} pairs, max {worst:.1e}")


def test_ac10_determinism(tmp_path):
    dirs = [tmp_path / "first", tmp_path / "second"]
    codes = [main(["analyze", "--config", str(EXAMPLE_CONFIG), "--out", str(d)]) for d in dirs]
    names = sorted(p.name for p in dirs[0].iterdir())
    match, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
    ok = codes == [0, 0] and names and not mismatch and not errors
    record("AC10", ok, f"repeated analyze: {len(match)}/{len(names)} files byte-identical")
