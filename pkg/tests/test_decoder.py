"""Matching graphs and the local matching decoder."""

from __future__ import annotations

import math

import numpy as np
import pytest

from gaugefix.circuits import homogeneous_circuit
from gaugefix.code import PauliOperator
from gaugefix.decoder import (
    InfeasibleMatching,
    SyndromeNotCleared,
    build_matching_graph,
    build_perfect_graph,
    build_phenomenological_graph,
    decode,
    difference_syndrome,
    judge_failure,
    local_dijkstra,
)
from gaugefix.noise_sim import depolarising, sample_run

from conftest import (
    all_pair_distances,
    brute_force_matching_weight,
    full_dijkstra,
    planar_code,
    toric_code,
)


# ---------------------------------------------------------------- graphs


def test_circuit_graph_structure_alternating_word(toric2):
    noise = depolarising(0.01)
    circ = homogeneous_circuit(toric2, "ZX", 2)
    g = build_matching_graph(toric2, circ, noise, "x")
    # merged detectors only: 4 X stabilisers x (2 reps + 1 final round)
    assert len(g.detectors) == 12
    assert g.boundary_id is None  # closed surface
    assert all(len(d.gauge_factor_set) == 2 for d in g.detectors)
    finals = [d for d in g.detectors if d.is_final]
    assert len(finals) == 4
    assert {d.stabiliser_id for d in finals} == {
        i for i, s in enumerate(toric2.stabilisers) if s.colour == 1}


def test_circuit_graph_splits_fixable_rounds(toric2):
    noise = depolarising(0.01)
    circ = homogeneous_circuit(toric2, "ZZXX", 2)
    g = build_matching_graph(toric2, circ, noise, "x")
    by_rep = {}
    for d in g.detectors:
        if not d.is_final:
            by_rep.setdefault(d.time_step, []).append(len(d.gauge_factor_set))
    # reps 0 and 2 start a burst (merged); reps 1 and 3 are fixable (split)
    assert sorted(set(by_rep[0])) == [2] and sorted(set(by_rep[2])) == [2]
    assert sorted(set(by_rep[1])) == [1] and sorted(set(by_rep[3])) == [1]
    g_unfixed = build_matching_graph(toric2, circ, noise, "x", gauge_fixing=False)
    assert all(len(d.gauge_factor_set) == 2 for d in g_unfixed.detectors)


def test_edge_weights_follow_log_likelihood(toric2):
    g = build_perfect_graph(toric2, "x", 0.1, fixed=False)
    for e in g.edges:
        assert e.flip_probability == pytest.approx(0.1)
        assert e.weight == pytest.approx(math.log((1 - 0.1) / 0.1))
        assert e.int_weight == int(round(e.weight * 65536))


def test_out_of_range_probability_rejected(toric2):
    with pytest.raises(Exception):
        build_perfect_graph(toric2, "x", 0.6, fixed=False)


def test_perfect_graph_regularity(toric4):
    merged = build_perfect_graph(toric4, "x", 0.05, fixed=False)
    deg = [0] * len(merged.detectors)
    for e in merged.edges:
        deg[e.u] += 1
        deg[e.v] += 1
    assert set(deg) == {6}  # triangular lattice
    split = build_perfect_graph(toric4, "x", 0.05, fixed=True)
    deg = [0] * len(split.detectors)
    for e in split.edges:
        deg[e.u] += 1
        deg[e.v] += 1
    assert set(deg) == {3}  # hexagonal lattice


def test_phenomenological_graph_layers(toric2):
    rounds = 4
    g = build_phenomenological_graph(toric2, "x", 0.03, rounds)
    layers = {d.time_step for d in g.detectors}
    assert layers == set(range(rounds))
    time_edges = [e for e in g.edges
                  if g.detectors[e.u].time_step != g.detectors[e.v].time_step]
    n_checks = len({d.stabiliser_id for d in g.detectors})
    assert len(time_edges) == n_checks * (rounds - 1)  # last round noiseless


def test_graph_dump_round_trips_basic_fields(toric2):
    g = build_perfect_graph(toric2, "x", 0.05, fixed=False)
    text = g.dump()
    assert text.startswith("# matching graph basis=x")
    assert text.count("\ndetector ") + text.count("\nedge ") == (
        len(g.detectors) + len(g.edges) - (1 if text.startswith("detector") else 0))


# ---------------------------------------------------------------- defects


def test_noiseless_sample_has_no_defects(toric2):
    noise = depolarising(0.04)
    for word in ("ZX", "ZZXX"):
        circ = homogeneous_circuit(toric2, word, 3)
        g = build_matching_graph(toric2, circ, noise, "x")
        record, rx, rz = sample_run(circ, depolarising(0.0), np.random.SeedSequence(0))
        assert difference_syndrome(record, g, rx, rz) == []


def test_every_fault_creates_expected_defects(toric2):
    from gaugefix.noise_sim import MeasurementRecord, enumerate_single_faults

    noise = depolarising(0.01)
    circ = homogeneous_circuit(toric2, "ZZXX", 2)
    g = build_matching_graph(toric2, circ, noise, "x")
    edge_by_fault = {}
    for e in g.edges:
        for fid in e.fault_ids:
            edge_by_fault[fid] = e
    faults = enumerate_single_faults(circ, noise)
    for fid, rec in enumerate(faults):
        record = MeasurementRecord(bits=rec.meas_mask, n=len(circ.measurements))
        defects = difference_syndrome(record, g, rec.residual_x, rec.residual_z)
        if fid in edge_by_fault:
            e = edge_by_fault[fid]
            want = sorted(d for d in (e.u, e.v) if not g.detectors[d].is_boundary)
            assert defects == want
        else:
            assert defects == []  # undetected by this basis


# ---------------------------------------------------------------- decoding


def test_local_dijkstra_agrees_with_full_dijkstra(toric4):
    g = build_perfect_graph(toric4, "x", 0.08, fixed=False)
    rng = np.random.default_rng(3)
    defects = sorted(rng.choice(len(g.detectors), size=10, replace=False).tolist())
    ref = {s: full_dijkstra(g, s) for s in defects}
    for s in defects:
        found, dists, _ = local_dijkstra(g, defects, 4, s)
        # the m nearest defects, with deterministic distances
        others = sorted((ref[s][t], t) for t in defects if t != s and t in ref[s])
        assert [d for d, _ in others[:4]] == list(dists)
        assert {ref[s][t] for t in found} == set(dists)


def test_decode_weight_matches_brute_force_oracle():
    for code, fixed in ((toric_code(4), False), (planar_code(4), False)):
        g = build_perfect_graph(code, "x", 0.07, fixed=fixed)
        rng = np.random.default_rng(17)
        for _ in range(40):
            k = int(rng.integers(1, 6)) * 2
            defects = sorted(
                rng.choice(len([d for d in g.detectors if not d.is_boundary]),
                           size=k, replace=False).tolist())
            pair, bnd = all_pair_distances(g, defects)
            try:
                want = brute_force_matching_weight(
                    defects, pair, bnd if g.boundary_id is not None else None)
            except ValueError:
                continue
            got = decode(g, defects, m=len(defects) + 1)
            assert got.weight == want, defects


def test_decode_empty_and_odd_parity(toric2):
    g = build_perfect_graph(toric2, "x", 0.05, fixed=False)
    res = decode(g, [], 4)
    assert res.weight == 0 and res.correction == frozenset()
    with pytest.raises(InfeasibleMatching):
        decode(g, [0], 4)  # odd defect count on a closed surface


def test_decode_clears_syndrome_circuit_level(toric2):
    noise = depolarising(0.02)
    circ = homogeneous_circuit(toric2, "ZZXX", 3)
    gx = build_matching_graph(toric2, circ, noise, "x")
    gz = build_matching_graph(toric2, circ, noise, "z")
    for trial in range(150):
        record, rx, rz = sample_run(circ, noise, np.random.SeedSequence(trial))
        for g, res_err in ((gx, rz), (gz, rx)):
            defects = difference_syndrome(record, g, rx, rz)
            result = decode(g, defects, m=20)
            total = res_err ^ (result.residual_z if g.pauli_type == "x"
                               else result.residual_x)
            residual = (PauliOperator(toric2.n, x=0, z=total)
                        if g.pauli_type == "x"
                        else PauliOperator(toric2.n, x=total, z=0))
            # must not raise: all stabilisers commute with the residual
            judge_failure(toric2, residual, "z" if g.pauli_type == "x" else "x")


def test_judge_failure_classification(toric2):
    lz = toric2.bare_logicals_z[0]
    assert judge_failure(toric2, lz, "z") is True
    stab = next(s for s in toric2.stabilisers if s.colour == 0)
    assert judge_failure(toric2, stab.op, "z") is False
    gauge = next(go for go in toric2.gauge_ops if go.colour == 0)
    assert judge_failure(toric2, gauge.op, "z") is False
    bad = PauliOperator(toric2.n, x=0, z=1)
    with pytest.raises(SyndromeNotCleared):
        judge_failure(toric2, bad, "z")


def test_local_matching_mismatch_shrinks_with_m(toric4):
    g = build_perfect_graph(toric_code(6), "x", 0.09, fixed=False)
    rng = np.random.default_rng(23)
    probs = np.array([e.flip_probability for e in g.edges])
    mismatch = {2: 0, 6: 0}
    trials = 120
    for _ in range(trials):
        flipped = np.flatnonzero(rng.random(len(probs)) < probs)
        acc = {}
        for eid in flipped:
            e = g.edges[int(eid)]
            acc[e.u] = acc.get(e.u, 0) ^ 1
            acc[e.v] = acc.get(e.v, 0) ^ 1
        defects = sorted(d for d, v in acc.items() if v)
        if not defects:
            continue
        exact = decode(g, defects, m=len(defects) + 1).weight
        for m in mismatch:
            try:
                approx = decode(g, defects, m=m).weight
            except InfeasibleMatching:
                mismatch[m] += 1  # candidate graph too sparse at this m
                continue
            assert approx >= exact
            mismatch[m] += approx != exact
    assert mismatch[6] <= mismatch[2]
