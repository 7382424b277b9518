"""Symmetry groups, colourability/schedulability, cyclic scheduling solutions."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaugefix.symmetry import (
    HomomorphismSolution,
    bundled_group_path,
    check_colourable,
    check_schedulable,
    load_group,
    solve_cyclic_scheduling,
    toric_group,
)


def test_toric_group_order_and_relations():
    for L in (2, 3):
        g = toric_group(L)
        assert g.order == 4 * L * L  # one rotation per face corner
        for word in g.all_relations():
            elem = g.evaluate(word)
            assert elem.is_identity()


def test_toric_group_colourable_and_schedulable():
    g = toric_group(2)
    assert check_colourable(g)
    assert check_schedulable(g)


def test_bundled_groups_load_and_are_schedulable():
    for name in ("hyperbolic_8_4_512", "hyperbolic_6_4"):
        g = load_group(bundled_group_path(name))
        for word in g.all_relations():
            assert g.evaluate(word).is_identity()
    assert check_schedulable(load_group(bundled_group_path("hyperbolic_8_4_512")))


def test_bundled_group_path_unknown_name():
    with pytest.raises(Exception):
        load_group(bundled_group_path("no_such_group"))


@settings(max_examples=30, deadline=None)
@given(r=st.integers(3, 8), s=st.integers(3, 8))
def test_solutions_satisfy_all_constraints(r, s):
    n_max = 4 * max(r, s)
    for sol in solve_cyclic_scheduling(r, s, n_max):
        assert 2 <= sol.n <= n_max
        assert 0 <= sol.x < sol.n and 0 <= sol.y < sol.n
        assert sol.satisfies_constraints(r, s)
        # the defining congruences, restated explicitly
        assert (r * sol.x) % sol.n == 0
        assert (s * sol.y) % sol.n == 0
        assert (2 * (sol.x + sol.y)) % sol.n == 0
        assert (sol.x + sol.y) % sol.n != 0


def test_solutions_are_sorted_and_unique():
    sols = solve_cyclic_scheduling(4, 4, 20)
    assert sols == sorted(set(sols))


def test_solution_symmetry_in_r_s():
    a = {(s.n, s.x, s.y) for s in solve_cyclic_scheduling(4, 8, 40)}
    b = {(s.n, s.y, s.x) for s in solve_cyclic_scheduling(8, 4, 40)}
    assert a == b


def test_square_lattice_solution_present():
    assert HomomorphismSolution(4, 1, 1) in solve_cyclic_scheduling(4, 4, 20)
