"""Acceptance criteria 1-10; each prints one PASS/FAIL line."""

import json
import math

import numpy as np

from corpus_runs import ALPHAS, COUPLINGS, MARGIN, P, bs_roots, evans_zeros
from halfdirac.birman_schwinger import discrete_norm, eigenvalue_nearest, quadrature_for
from halfdirac.bounds import (
    G_many,
    g_many,
    hermitian_gap,
    moment_exclusion,
    moment_q_bound,
    theorem2_threshold_many,
)
from halfdirac.cli import run
from halfdirac.corpus import CORPUS, hermitian_corpus
from halfdirac.evans import ScanRegion, find_zeros, winding_count
from halfdirac.nonrel import bc_limit_map, rate_check, schrodinger_reduction_check
from halfdirac.potential import Potential, factorize, scalar_term
from halfdirac.resolvent import BoundaryCondition, supnorm_closed, supnorm_grid_check, supnorm_numeric
from halfdirac.spectral import PhysicalParams, compute_spectral_point, theorem1_enclosure

MC2 = P.rest_energy


def test_criterion_01_enclosure_soundness(verdict):
    kinds = {e.kind for e in CORPUS}
    profiles = {t.profile for e in CORPUS for t in e.shape.terms}
    assert len(CORPUS) >= 6
    assert {"scalar-real", "scalar-complex", "matrix-nonhermitian"} <= kinds
    assert {"step", "truncated_gaussian", "bump"} <= profiles

    failures, n_evans, n_bs, worst = [], 0, 0, math.inf
    for e in CORPUS:
        for v in COUPLINGS:
            enc = theorem1_enclosure(v, P)
            printed = enc.info["printed"]
            for a in ALPHAS:
                ev = evans_zeros(e.name, v, a)
                bs = bs_roots(e.name, v, a)
                n_evans += len(ev)
                n_bs += len(bs)
                for z in ev + bs:
                    m1, m2 = enc.margin(z), printed.margin(z)
                    worst = min(worst, m1)
                    if m1 < -1e-8 * MC2 or m2 < -1e-8 * MC2:
                        failures.append((e.name, v, a, z, m1, m2))
    ok = not failures and n_evans > 0 and n_bs > 0
    verdict(1, ok, f"{n_evans} Evans zeros, {n_bs} Birman-Schwinger roots, "
                   f"smallest derived margin {worst:.3g}, violations {len(failures)}")
    assert ok, failures


def test_criterion_02_massless_absence(verdict):
    P0 = PhysicalParams(0.0, 1.0)
    rects = [(-5, 0, 1e-3, 5), (0, 5, 1e-3, 5), (-5, 0, -5, -1e-3), (0, 5, -5, -1e-3)]
    counts = []
    for e in CORPUS:
        for v in (0.2, 0.5, 0.7 / math.sqrt(2)):
            pot = e.at_coupling(v, P0)
            for a in ALPHAS:
                bc = BoundaryCondition.from_alpha(a)
                counts.append(sum(winding_count(ScanRegion(*r), pot, bc, P0) for r in rects))
    ok = all(c == 0 for c in counts)
    verdict(2, ok, f"{len(counts)} cases, total winding {sum(counts)}")
    assert ok


def test_criterion_03_refined_enclosure(verdict):
    n = 200
    xs = np.linspace(-3, 3, n)
    ys = np.linspace(-3, 3, n)  # even count: the real axis is never sampled
    X, Y = np.meshgrid(xs, ys)
    Z = X + 1j * Y
    failures, checked = [], 0
    for a in (0.0, math.pi / 2):
        T = theorem2_threshold_many(Z.ravel(), P, a).reshape(Z.shape)
        for e in CORPUS:
            for v in COUPLINGS:
                excluded = T > v / 2
                # cells whose four corners are all certified zero-free
                cell_free = excluded[:-1, :-1] & excluded[1:, :-1] & excluded[:-1, 1:] & excluded[1:, 1:]
                for z in evans_zeros(e.name, v, a):
                    checked += 1
                    thr = float(theorem2_threshold_many([z], P, a)[0])
                    i = np.searchsorted(ys, z.imag) - 1
                    j = np.searchsorted(xs, z.real) - 1
                    in_free_cell = 0 <= i < n - 1 and 0 <= j < n - 1 and cell_free[i, j]
                    if thr > v / 2 * (1 + 1e-8) or in_free_cell:
                        failures.append((e.name, v, a, z, thr))
    ok = not failures and checked > 0
    verdict(3, ok, f"{checked} zeros checked against a {n}x{n} threshold grid, violations {len(failures)}")
    assert ok, failures


def _random_point(rng):
    m, c = rng.uniform(0.1, 2.0), rng.uniform(0.5, 3.0)
    params = PhysicalParams(m, c)
    mc2 = params.rest_energy
    z = mc2 * complex(rng.uniform(-3, 3), rng.choice([-1, 1]) * 10 ** rng.uniform(-2, 0.5))
    return compute_spectral_point(z, params)


def test_criterion_04_supnorm_closed_form(verdict):
    rng = np.random.default_rng(4)
    err_closed, err_grid = 0.0, 0.0
    for i in range(100):
        sp = _random_point(rng)
        a = (0.0, math.pi / 2)[i % 2]
        num = supnorm_numeric(sp, BoundaryCondition.from_alpha(a)).value
        err_closed = max(err_closed, abs(num - supnorm_closed(sp, a)))
        # independent 2-D sample never exceeds the supremum
        err_grid = max(err_grid, supnorm_grid_check(sp, BoundaryCondition.from_alpha(a), 48) - num)
    excess = -math.inf
    for _ in range(100):
        sp = _random_point(rng)
        a = rng.uniform(0, math.pi / 2)
        s2 = abs(sp.zeta) ** 2
        excess = max(excess, supnorm_numeric(sp, BoundaryCondition.from_alpha(a)).value
                     - math.sqrt(1 + max(s2, 1 / s2)))
    ok = err_closed <= 1e-8 and excess <= 1e-8 and err_grid <= 1e-8
    verdict(4, ok, f"closed-form error {err_closed:.2e}, grid excess {err_grid:.2e}, "
                   f"generic-bound excess {excess:.2e}")
    assert ok


def test_criterion_05_birman_schwinger_consistency(verdict):
    failures, worst, count = [], 0.0, 0
    for e in CORPUS:
        for v in COUPLINGS:
            pot = e.at_coupling(v, P)
            fp = factorize(pot)
            q1, q2 = quadrature_for(pot, 2000), quadrature_for(pot, 4000)
            for a in ALPHAS:
                bc = BoundaryCondition.from_alpha(a)
                for z in evans_zeros(e.name, v, a):
                    sp = compute_spectral_point(z, P)
                    d1 = abs(eigenvalue_nearest(sp, fp, bc, q1, corrected=False) + 1)
                    d2 = abs(eigenvalue_nearest(sp, fp, bc, q2, corrected=False) + 1)
                    count += 1
                    worst = max(worst, d1)
                    if not (d1 <= 1e-3 and d2 < d1):
                        failures.append((e.name, v, a, z, d1, d2))
    ok = not failures and count > 0
    verdict(5, ok, f"{count} zeros, worst |mu + 1| at N=2000: {worst:.2e}, violations {len(failures)}")
    assert ok, failures


def test_criterion_06_hermitian_gap(verdict):
    failures, count = [], 0
    for e in hermitian_corpus():
        for v in (0.2, 0.5, 0.8):
            for a in ALPHAS:
                gap = hermitian_gap(v, a, P).excluded_gap if a in (0.0, math.pi / 2) else None
                for z in evans_zeros(e.name, v, a):
                    count += 1
                    real = abs(z.imag) <= 1e-6 * MC2
                    outside = gap is None or not (gap[0] < z.real < gap[1])
                    if not (real and outside):
                        failures.append((e.name, v, a, z, gap))
    vsmall = 0.05
    defect = MC2 - hermitian_gap(vsmall, 0.0, P).excluded_gap[1]
    ratio = defect / vsmall**2
    asym = abs(ratio - 0.5) <= 0.02 * 0.5
    ok = not failures and count > 0 and asym
    verdict(6, ok, f"{count} zeros real and outside the gap (violations {len(failures)}); "
                   f"defect/v^2 = {ratio:.5f} at v = 0.05")
    assert ok, failures


def test_criterion_07_first_moment_exclusion(verdict):
    hs = (-0.44, -0.3, -0.1, 0.1, 0.3, 0.44)
    failures, q_fail, worst_slack = [], [], math.inf
    for h in hs:
        pot = Potential([scalar_term("step", 0.0, 1.0, h)])
        md = pot.moments
        assert moment_exclusion(md, P)
        fp = factorize(pot)
        quad = quadrature_for(pot, 128)
        for a, point, near in ((0.0, MC2, +1), (math.pi / 2, -MC2, -1)):
            bc = BoundaryCondition.from_alpha(a)
            lo, hi = point - 0.1, point + 0.1
            strip = (max(lo, -MC2 + MARGIN), min(hi, MC2 - MARGIN), -MARGIN, MARGIN)
            zs = []
            for r in [(lo, hi, MARGIN, 0.1), (lo, hi, -0.1, -MARGIN), strip]:
                zs += [z.z for z in find_zeros(ScanRegion(*r), pot, bc, P)]
            failures += [(h, a, z) for z in zs if abs(z - point) < 0.1 * MC2]
            for rad in (0.02, 0.05, 0.1):
                for ang in (np.arange(8) + 0.5) * math.pi / 4:  # never on the real axis
                    z = point + rad * np.exp(1j * ang)
                    sp = compute_spectral_point(z, P)
                    bound = moment_q_bound(sp, md, near)
                    qn2 = discrete_norm(sp, fp, bc, quad, corrected=True) ** 2
                    worst_slack = min(worst_slack, bound - qn2)
                    if bound < qn2 * (1 - 1e-6):
                        q_fail.append((h, a, z, bound, qn2))
    ok = not failures and not q_fail
    verdict(7, ok, f"{len(hs)} step heights below 1/sqrt(5): {len(failures)} zeros near the excluded points; "
                   f"min(bound - ||Q||^2) = {worst_slack:.3g}")
    assert ok, (failures, q_fail)


def test_criterion_08_nonrelativistic_limit(verdict):
    z = complex(-1.0, 0.5)
    cs = [10.0, 20.0, 40.0, 80.0]
    ratios, types = [], set()
    for a in ALPHAS:
        tab = rate_check(z, cs, a, "+")
        ratios += tab.ratios
        types.add(tab.bc_type)
    table_ok = (bc_limit_map(0.0, "+") == "Neumann" and bc_limit_map(math.pi / 4, "+") == "Dirichlet"
                and bc_limit_map(math.pi / 2, "+") == "Dirichlet" and bc_limit_map(math.pi / 2, "-") == "Neumann"
                and bc_limit_map(0.0, "-") == "Dirichlet" and bc_limit_map(math.pi / 4, "-") == "Dirichlet")
    red = schrodinger_reduction_check(-1.0, [1e-2, 1e-4, 1e-6, 1e-8])
    rates_ok = all(0.4 <= q <= 0.6 for q in ratios) and types == {"Dirichlet", "Neumann"}
    red_ok = abs(red.final_ratio - 1) <= 1e-3 and red.schrodinger_constant == 0.5
    ok = rates_ok and table_ok and red_ok
    verdict(8, ok, f"ratios {min(ratios):.4f}..{max(ratios):.4f} for {sorted(types)}; bc table "
                   f"{'matches' if table_ok else 'differs'}; reduction ratio {red.final_ratio:.8f}")
    assert ok


def test_criterion_09_special_cases(verdict):
    rng = np.random.default_rng(9)
    b = rng.uniform(-50, 50, 50)
    e0 = max(np.max(np.abs(G_many(s, np.zeros(50), b)[0] - math.sqrt(2))) for s in ("minus", "plus"))
    bl = rng.uniform(-10, 10, 20)
    lim = np.max(np.abs(G_many("minus", np.full(20, 1 - 1e-4), bl)[0] - g_many(bl)[0]))
    g = g_many(rng.uniform(-1e3, 1e3, 200))[0]
    ok = e0 <= 1e-10 and lim <= 1e-3 and np.all((g >= 1 - 1e-12) & (g <= 2 + 1e-12))
    verdict(9, bool(ok), f"|G(0,b) - sqrt 2| {e0:.1e}; |G_-(1-1e-4, b) - g(b)| {lim:.1e}; "
                         f"g in [{g.min():.4f}, {g.max():.4f}]")
    assert ok


def test_criterion_10_half_coupling_report(verdict, tmp_path):
    cfg = tmp_path / "half.json"
    cfg.write_text(json.dumps({"params": {"m": 1, "c": 1}, "v": 0.5}))
    code = run(["enclosure", "--config", str(cfg), "--out", str(tmp_path / "out")])
    text = (tmp_path / "out" / "report.txt").read_text()
    ok = code == 0 and "radius 0.75" in text and "radius 1.5" in text and "derived ⊆ printed: true" in text
    verdict(10, ok, "report lists radius 0.75 (derived), 1.5 (printed), 'derived ⊆ printed: true'")
    assert ok, text
