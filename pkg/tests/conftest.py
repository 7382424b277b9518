"""Shared fixtures and slow-but-obviously-correct test oracles."""

from __future__ import annotations

import heapq
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import pytest

from gaugefix.code import SubsystemCode, build_subsystem_code
from gaugefix.tessellation import build_planar, build_toric


_CODE_CACHE: Dict[Tuple[str, int], SubsystemCode] = {}


def toric_code(L: int) -> SubsystemCode:
    key = ("toric", L)
    if key not in _CODE_CACHE:
        _CODE_CACHE[key] = build_subsystem_code(build_toric(L))
    return _CODE_CACHE[key]


def planar_code(L: int) -> SubsystemCode:
    key = ("planar", L)
    if key not in _CODE_CACHE:
        _CODE_CACHE[key] = build_subsystem_code(build_planar(L))
    return _CODE_CACHE[key]


@pytest.fixture(scope="session")
def toric2() -> SubsystemCode:
    return toric_code(2)


@pytest.fixture(scope="session")
def toric4() -> SubsystemCode:
    return toric_code(4)


def full_dijkstra(graph, source: int) -> Dict[int, int]:
    """Reference single-source shortest distances over a matching graph.

    Pure-Python Dijkstra over the edge list; boundary detectors are never
    expanded through, mirroring the decoder's convention.
    """
    adj: Dict[int, List[Tuple[int, int]]] = {}
    for e in graph.edges:
        adj.setdefault(e.u, []).append((e.v, e.int_weight))
        adj.setdefault(e.v, []).append((e.u, e.int_weight))
    dist = {source: 0}
    heap = [(0, source)]
    done = set()
    while heap:
        d, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if graph.detectors[node].is_boundary and node != source:
            continue
        for nb, w in adj.get(node, ()):
            nd = d + w
            if nd < dist.get(nb, nd + 1):
                dist[nb] = nd
                heapq.heappush(heap, (nd, nb))
    return dist


def all_pair_distances(graph, defects: Sequence[int]):
    """(pairwise distance dict, per-defect boundary distance dict)."""
    pair: Dict[Tuple[int, int], int] = {}
    bnd: Dict[int, int] = {}
    boundary = graph.boundary_id
    for i, s in enumerate(defects):
        dist = full_dijkstra(graph, s)
        for t in defects[i + 1:]:
            if t in dist:
                pair[(s, t)] = pair[(t, s)] = dist[t]
        if boundary is not None and boundary in dist:
            bnd[s] = dist[boundary]
    return pair, bnd


def brute_force_matching_weight(
    defects: Sequence[int],
    pair: Dict[Tuple[int, int], int],
    bnd: Optional[Dict[int, int]] = None,
) -> int:
    """Minimum total weight over all pairings; factorial-time oracle.

    Every defect pairs with another defect or, when ``bnd`` is given, with
    the boundary. Only usable for small defect counts.
    """
    defects = tuple(sorted(defects))
    INF = float("inf")
    memo: Dict[Tuple[int, ...], float] = {}

    def best(rest: Tuple[int, ...]) -> float:
        if not rest:
            return 0
        if rest in memo:
            return memo[rest]
        first, tail = rest[0], rest[1:]
        out = INF
        if bnd is not None and first in bnd:
            out = bnd[first] + best(tail)
        for j, other in enumerate(tail):
            if (first, other) in pair:
                sub = tail[:j] + tail[j + 1:]
                out = min(out, pair[(first, other)] + best(sub))
        memo[rest] = out
        return out

    out = best(defects)
    if out == INF:
        raise ValueError("no feasible pairing")
    return int(out)
