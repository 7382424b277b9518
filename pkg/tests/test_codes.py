"""Code construction: parameters, commutation, logicals, distances."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaugefix.code import (
    PauliOperator,
    build_subsystem_code,
    gauge_fix_subspace,
    surface_code_distance,
)
from gaugefix.tessellation import build_planar, build_toric

from conftest import planar_code, toric_code


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
def test_pauli_commutation_is_symplectic_form(x1, z1, x2, z2):
    a = PauliOperator(8, x1, z1)
    b = PauliOperator(8, x2, z2)
    assert a.commutes(b) == b.commutes(a)
    # product rule: [a, bc] = [a, b] xor [a, c]
    c = PauliOperator(8, x2 ^ x1, z2 ^ z1)
    assert a.commutes(b * c) == (a.commutes(b) == a.commutes(c))
    assert (a * a).is_identity()


def test_toric_parameters_smoke():
    for L in (2, 3):
        code = toric_code(L)
        assert code.n == 3 * L * L
        assert code.k == 2
        assert code.g == L * L
        assert code.stabiliser_rank() == 2 * (L * L - 1)


def test_planar_parameters_smoke():
    for L in (2, 3):
        code = planar_code(L)
        assert code.n == 3 * L * L - 2 * L
        assert code.k == 1


def test_gauge_ops_are_weight_three_triangles(toric2):
    for go in toric2.gauge_ops:
        assert go.op.weight == 3
        assert go.colour in (0, 1)
        # one basis only per triangle
        assert (go.op.x == 0) != (go.op.z == 0)


def test_stabilisers_are_products_of_their_factors(toric2):
    for stab in toric2.stabilisers:
        acc = PauliOperator(toric2.n)
        for gid in stab.gauge_factor_ids:
            go = toric2.gauge_ops[gid]
            assert go.colour == stab.colour
            acc = acc * go.op
        assert acc == stab.op


def test_stabilisers_commute_with_everything(toric2):
    for stab in toric2.stabilisers:
        for go in toric2.gauge_ops:
            assert stab.op.commutes(go.op)
        for other in toric2.stabilisers:
            assert stab.op.commutes(other.op)


def test_bare_logicals_commute_with_gauge_group(toric2):
    for lo in toric2.bare_logicals_x + toric2.bare_logicals_z:
        for go in toric2.gauge_ops:
            assert lo.commutes(go.op)
        for stab in toric2.stabilisers:
            assert lo.commutes(stab.op)


def test_logicals_form_symplectic_pairs(toric2):
    xs, zs = toric2.bare_logicals_x, toric2.bare_logicals_z
    assert len(xs) == len(zs) == toric2.k
    for i, lx in enumerate(xs):
        for j, lz in enumerate(zs):
            assert lx.commutes(lz) == (i != j)


def test_toric_distance_equals_L():
    for L in (2, 3, 4):
        assert toric_code(L).distance("both") == L


def test_planar_distance_requires_closed_surface():
    from gaugefix.code import NotClosedSurface

    with pytest.raises(NotClosedSurface):
        planar_code(2).distance("both")


def test_surface_code_distance_toric():
    for L in (2, 3):
        assert surface_code_distance(build_toric(L), "both") == L


def test_gauge_fix_subspace_keeps_logical_count(toric2):
    fixed = gauge_fix_subspace(toric2, {0: "z"})
    assert fixed.k == toric2.k
    assert fixed.n == toric2.n


def test_qubit_layout(toric2):
    # one qubit per vertex plus one per edge of the tessellation
    assert toric2.n == toric2.n_vertices + toric2.n_edges
    qubits = {toric2.vertex_qubit(v) for v in range(toric2.n_vertices)}
    qubits |= {toric2.edge_qubit(e) for e in range(toric2.n_edges)}
    assert qubits == set(range(toric2.n))
