"""Acceptance criteria for the full pipeline.

Each test covers one acceptance criterion and prints a single
``ACCEPTANCE <name>: PASS`` line when it holds.  The threshold and
ordering tests run Monte Carlo sweeps and dominate the suite's runtime.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import milp, Bounds, LinearConstraint

from gaugefix.circuits import homogeneous_circuit
from gaugefix.code import build_subsystem_code, surface_code_distance
from gaugefix.decoder import (
    InfeasibleMatching,
    build_matching_graph,
    build_perfect_graph,
    decode,
)
from gaugefix.harness import (
    ExperimentConfig,
    bias_threshold_combine,
    fit_threshold,
    run_experiment,
)
from gaugefix.noise_sim import depolarising, enumerate_single_faults
from gaugefix.symmetry import (
    bundled_group_path,
    load_group,
    solve_cyclic_scheduling,
)
from gaugefix.tessellation import (
    build_planar,
    build_toric,
    from_group,
    refine_semi_hyperbolic,
)


def _report(name: str, detail: str = "") -> None:
    print("\nACCEPTANCE %s: PASS %s" % (name, detail))


def _gf2_rank(vectors) -> int:
    rows = [v for v in vectors if v]
    rank = 0
    while rows:
        pivot = rows.pop()
        rank += 1
        low = pivot & -pivot
        rows = [r ^ pivot if r & low else r for r in rows]
        rows = [r for r in rows if r]
    return rank


def _milp_distance(code, basis: str) -> int:
    """Dressed-logical distance by 0/1 integer programming over GF(2).

    Minimise the weight of a single-type operator that commutes with every
    opposite-type stabiliser and anticommutes with one bare logical; parity
    constraints use an auxiliary integer per row (lhs - 2u = rhs).
    """
    n = code.n
    if basis == "Z":
        checks = [s.op.x for s in code.stabilisers if s.op.x]
        logical = code.bare_logicals_x[0].x
    else:
        checks = [s.op.z for s in code.stabilisers if s.op.z]
        logical = code.bare_logicals_z[0].z
    rows = [(mask, 0) for mask in checks] + [(logical, 1)]
    nrows = len(rows)
    nvars = n + nrows
    c = np.concatenate([np.ones(n), np.zeros(nrows)])
    A = np.zeros((nrows, nvars))
    rhs = np.zeros(nrows)
    for i, (mask, parity) in enumerate(rows):
        for q in range(n):
            if mask >> q & 1:
                A[i, q] = 1.0
        A[i, n + i] = -2.0
        rhs[i] = parity
    res = milp(
        c,
        constraints=LinearConstraint(A, rhs, rhs),
        integrality=np.ones(nvars),
        bounds=Bounds(np.zeros(nvars), np.concatenate(
            [np.ones(n), np.full(nrows, n)])),
    )
    assert res.success
    return int(round(res.fun))


# ------------------------------------------------------- code construction


def test_toric_code_parameters():
    for L in range(2, 7):
        code = build_subsystem_code(build_toric(L))
        assert (code.n, code.k) == (3 * L * L, 2)
        assert len(code.stabilisers) == 2 * L * L
        vecs = [(s.op.x << code.n) | s.op.z for s in code.stabilisers]
        assert _gf2_rank(vecs) == 2 * (L * L - 1)
        assert code.distance("both") == L
    _report("toric-code-parameters", "[[3L^2,2,L]] for L=2..6")


def test_planar_code_parameters():
    for L in range(2, 6):
        code = build_subsystem_code(build_planar(L))
        assert (code.n, code.k) == (3 * L * L - 2 * L, 1)
        assert _milp_distance(code, "Z") == L
        assert _milp_distance(code, "X") == L
    _report("planar-code-parameters", "[[3L^2-2L,1,L]] for L=2..5")


def test_hyperbolic_code_parameters():
    details = []
    for name, r in (("hyperbolic_6_4", 6), ("hyperbolic_8_4_512", 8)):
        tes = from_group(load_group(bundled_group_path(name)))
        code = build_subsystem_code(tes)
        E = code.n_edges
        assert code.k == E // 2 - 2 * E // r + 2
        assert code.n == 3 * E // 2
        for basis in ("Z", "X"):
            d = code.distance(basis)
            d_sub = surface_code_distance(tes, basis)
            assert d_sub / 2 <= d <= d_sub
        details.append("%s [[%d,%d,%d]]" % (name, code.n, code.k,
                                            code.distance("both")))
    code512 = build_subsystem_code(
        from_group(load_group(bundled_group_path("hyperbolic_8_4_512"))))
    assert (code512.n, code512.k, code512.distance("both")) == (384, 66, 4)
    semi = build_subsystem_code(refine_semi_hyperbolic(
        from_group(load_group(bundled_group_path("hyperbolic_8_4_512"))), 2))
    assert semi.k == code512.k
    assert semi.n == 6 * (code512.k - 2) * 2 * 2
    _report("hyperbolic-code-parameters", "; ".join(details))


def test_scheduling_homomorphism_table():
    expected = {
        (3, 6): (6, 2, 1), (4, 4): (4, 1, 1), (4, 8): (4, 1, 1),
        (5, 10): (10, 2, 3), (6, 6): (6, 1, 2), (6, 9): (6, 1, 2),
        (8, 8): (8, 1, 3), (10, 10): (10, 1, 4),
    }
    for (r, s), row in expected.items():
        sols = {(h.n, h.x, h.y)
                for h in solve_cyclic_scheduling(r, s, 5 * max(r, s))}
        assert row in sols, (r, s, row)
    _report("scheduling-homomorphisms", "%d tabulated rows found" % len(expected))


# ------------------------------------------------------------ fault tables


def _fault_profile(word: str, rounds: int) -> Counter:
    code = build_subsystem_code(build_toric(2))
    noise = depolarising(0.01)
    circ = homogeneous_circuit(code, word, rounds)
    graph = build_matching_graph(code, circ, noise, "x")
    faults = enumerate_single_faults(circ, noise)
    profile = Counter()
    for e in graph.edges:
        du, dv = graph.detectors[e.u], graph.detectors[e.v]
        if du.time_step <= 0 or dv.time_step <= 0 or du.is_final or dv.is_final:
            continue  # bulk statistics only
        per_gate = defaultdict(lambda: [None, 0])
        px = mx = 0
        for fid in e.fault_ids:
            rec = faults[fid]
            if rec.kind == "CNOT":
                per_gate[rec.gate_index][0] = rec.owner_basis
                per_gate[rec.gate_index][1] += 1
            elif rec.kind == "PREP_X":
                px += 1
            else:
                assert rec.kind == "MEAS_X"
                mx += 1
        g1x = g1z = g2z = 0
        for owner, nalts in per_gate.values():
            assert nalts % 4 == 0
            ncls = nalts // 4
            if owner == "x":
                g1x += ncls
            elif ncls == 1:
                g1z += 1
            else:
                assert ncls == 2
                g2z += 1
        kind = ("space" if du.time_step == dv.time_step
                else "time" if du.stabiliser_id == dv.stabiliser_id
                else "diag")
        profile[(kind, g1x, g1z, g2z, px, mx)] += 1
    return profile


def test_fault_table_alternating_schedule():
    assert _fault_profile("ZX", 5) == Counter({
        ("diag", 2, 0, 0, 0, 0): 36,
        ("space", 2, 2, 0, 0, 0): 16,
        ("space", 2, 2, 2, 0, 0): 32,
        ("time", 6, 0, 0, 2, 2): 12,
    })
    _report("fault-table-ZX", "4 bulk edge classes, 96 edges")


def test_fault_table_doubled_schedule():
    assert _fault_profile("ZZXX", 4) == Counter({
        ("diag", 2, 0, 0, 0, 0): 72,
        ("space", 2, 0, 0, 0, 0): 48,
        ("space", 2, 4, 0, 0, 0): 12,
        ("space", 2, 4, 4, 0, 0): 24,
        ("time", 3, 0, 0, 1, 1): 48,
    })
    _report("fault-table-ZZXX", "5 bulk edge classes, 204 edges")


# ---------------------------------------------------- graph-size formulas


def _bulk_weight_degree(code, word: str) -> tuple:
    circ = homogeneous_circuit(code, word, 2)
    graph = build_matching_graph(code, circ, depolarising(0.01), "x")
    a = word.count("X")
    bulk = [d for d in graph.detectors
            if a <= d.time_step < 2 * a and not d.is_final]
    degree = Counter()
    for e in graph.edges:
        degree[e.u] += 1
        degree[e.v] += 1
    w = Fraction(sum(3 * len(d.gauge_factor_set) for d in bulk), len(bulk))
    deg = Fraction(sum(degree[d.id] for d in bulk), len(bulk))
    return w, deg


def test_matching_graph_size_formulas():
    cases = {2: build_subsystem_code(build_toric(2)),
             4: build_subsystem_code(
                 from_group(load_group(bundled_group_path("hyperbolic_8_4_512"))))}
    for c, code in cases.items():
        for a in (2, 3, 5, 10):
            w, deg = _bulk_weight_degree(code, "Z" + "X" * a)
            denom = c * (a - 1) + 1
            assert w == Fraction(3 * c * a, denom), (c, a, w)
            assert deg == Fraction(8 * c * a, denom), (c, a, deg)
    # fully alternating schedule: bulk detectors have weight 6, degree 14
    graph = build_matching_graph(
        cases[2], homogeneous_circuit(cases[2], "ZX", 4), depolarising(0.01), "x")
    degree = Counter()
    for e in graph.edges:
        degree[e.u] += 1
        degree[e.v] += 1
    bulk = [d for d in graph.detectors if d.time_step > 0 and not d.is_final]
    assert {(3 * len(d.gauge_factor_set), degree[d.id]) for d in bulk} == {(6, 14)}
    _report("matching-graph-formulas", "mean (weight, degree) exact; ZX bulk (6,14)")


# -------------------------------------------------------------- thresholds


def _threshold(experiment, p_values, sizes, trials, fixed=False, t_eq_l=False):
    rows = []
    for L in sizes:
        cfg = ExperimentConfig(
            family="toric", L=L, experiment=experiment, fixed=fixed,
            p_values=tuple(p_values), trials=trials,
            rounds=L if t_eq_l else 1, seed=20260826 + L, workers=1)
        rows.extend(run_experiment(cfg))
    return fit_threshold(rows, model="crossing")


def test_threshold_perfect_merged():
    p_th, err = _threshold("perfect", (0.060, 0.065, 0.070),
                           (8, 12, 16, 24), 10000)
    assert 0.060 <= p_th <= 0.070, (p_th, err)
    _report("threshold-perfect-merged", "p_th=%.4f (target 0.065 +/- 0.005)" % p_th)


def test_threshold_perfect_fixed():
    p_th, err = _threshold("perfect", (0.149, 0.156, 0.163),
                           (8, 12, 16, 24), 10000, fixed=True)
    assert 0.149 <= p_th <= 0.163, (p_th, err)
    _report("threshold-perfect-fixed", "p_th=%.4f (target 0.156 +/- 0.007)" % p_th)


def test_threshold_phenomenological():
    p_th, err = _threshold("phenomenological", (0.0185, 0.020, 0.0215),
                           (8, 12, 16), 10000, t_eq_l=True)
    assert 0.0185 <= p_th <= 0.0215, (p_th, err)
    _report("threshold-phenomenological",
            "p_th=%.4f (target 0.020 +/- 0.0015)" % p_th)


# ------------------------------------------------------- circuit orderings


def _rate(cfg):
    (row,) = run_experiment(cfg)
    return row["fail_z"], row["trials"]


def _sigma_gap(k1, n1, k2, n2) -> float:
    r1, r2 = k1 / n1, k2 / n2
    se = (r1 * (1 - r1) / n1 + r2 * (1 - r2) / n2) ** 0.5
    return (r1 - r2) / se


def test_circuit_level_size_ordering():
    counts = {}
    for L in (4, 6, 8):
        counts[L] = _rate(ExperimentConfig(
            family="toric", L=L, schedule="ZX", rounds=L, basis="z",
            p_values=(0.004,), trials=40000, seed=7, workers=1))
    g46 = _sigma_gap(*counts[4], *counts[6])
    g68 = _sigma_gap(*counts[6], *counts[8])
    assert g46 > 3 and g68 > 3, (counts, g46, g68)
    _report("circuit-size-ordering",
            "fails 4/6/8 = %d/%d/%d (gaps %.1f, %.1f sigma)"
            % (counts[4][0], counts[6][0], counts[8][0], g46, g68))


def test_circuit_level_schedule_ordering():
    short = _rate(ExperimentConfig(
        family="toric", L=8, schedule="ZX", rounds=8, basis="z",
        p_values=(0.007,), trials=12000, seed=9, workers=1))
    long = _rate(ExperimentConfig(
        family="toric", L=8, schedule="ZZZXXX", rounds=3, basis="z",
        p_values=(0.007,), trials=12000, seed=9, workers=1))
    gap = _sigma_gap(*short, *long)
    assert gap > 3, (short, long, gap)
    _report("circuit-schedule-ordering",
            "ZX %d vs ZZZXXX %d failures (gap %.1f sigma)"
            % (short[0], long[0], gap))


def test_gauge_fixing_helps_under_infinite_bias():
    base = dict(family="toric", L=8, schedule="X", rounds=4, basis="z",
                noise="independent", eta=float("inf"), p_values=(0.015,),
                trials=2000, seed=13, workers=1)
    fixed = _rate(ExperimentConfig(**base))
    unfixed = _rate(ExperimentConfig(gauge_fixing=False, **base))
    gap = _sigma_gap(*unfixed, *fixed)
    assert gap > 3, (fixed, unfixed, gap)
    _report("gauge-fixing-ordering",
            "fixed %d vs unfixed %d failures (gap %.1f sigma)"
            % (fixed[0], unfixed[0], gap))


# ----------------------------------------------------------- local matching


def test_local_matching_approximates_exact():
    graph = build_perfect_graph(build_subsystem_code(build_toric(10)),
                                "x", 0.06, fixed=False)
    probs = np.array([e.flip_probability for e in graph.edges])
    ends = np.array([(e.u, e.v) for e in graph.edges])
    rng = np.random.default_rng(20260826)
    trials = 10000
    mismatches = {2: 0, 4: 0, 8: 0, 16: 0, 20: 0}
    for _ in range(trials):
        flipped = ends[rng.random(len(probs)) < probs]
        parity = np.zeros(len(graph.detectors), dtype=int)
        np.add.at(parity, flipped.ravel(), 1)
        defects = sorted(np.flatnonzero(parity % 2).tolist())
        if not defects:
            continue
        exact = decode(graph, defects, m=len(defects) + 1).weight
        for m in mismatches:
            try:
                approx = decode(graph, defects, m=m).weight
            except InfeasibleMatching:
                mismatches[m] += 1
                continue
            assert approx >= exact
            mismatches[m] += approx != exact
    assert mismatches[20] <= trials * 0.001, mismatches
    assert mismatches[2] >= mismatches[4] >= mismatches[8] >= mismatches[16]
    _report("local-matching",
            "mismatches m=2/4/8/16/20: %d/%d/%d/%d/%d of %d"
            % (mismatches[2], mismatches[4], mismatches[8],
               mismatches[16], mismatches[20], trials))


# ------------------------------------------------------------- aggregation


def test_bias_threshold_combination():
    worst = 0.0
    for p_z in np.linspace(0.01, 0.3, 12):
        for p_x in np.linspace(0.005, 0.2, 9):
            for eta in (0.5, 1.0, 3.0, 10.0, 100.0, float("inf")):
                got = bias_threshold_combine(p_z, p_x, eta)
                if np.isinf(eta):
                    want = p_z
                else:
                    total_z = 1 - (1 - p_z) * (1 - p_z / eta)
                    total_x = 1 - (1 - p_x) * (1 - p_x * eta)
                    want = min(total_z, total_x)
                worst = max(worst, abs(got - want))
    assert worst < 1e-12, worst
    _report("bias-threshold-combination", "max deviation %.2e" % worst)


def test_multiprocess_determinism():
    results = []
    for workers in (1, 2, 8):
        rows = run_experiment(ExperimentConfig(
            family="toric", L=4, schedule="ZX", rounds=3,
            p_values=(0.01, 0.02), trials=600, seed=42, workers=workers))
        results.append([(r["fail_z"], r["fail_x"]) for r in rows])
    assert results[0] == results[1] == results[2]
    _report("worker-determinism", "counts %s identical for 1/2/8 workers"
            % results[0])


def test_plots_package_render_regression():
    pytest.importorskip("gfplots")
    from gfplots.regression import render_reference_series

    series = render_reference_series()
    assert series, "no reference series rendered"
    _report("plots-render-regression", "%d figures rendered" % len(series))
