"""Gauge-fixing-aware matching decoder.

Builds the space-time matching graph for one check basis of a syndrome
extraction circuit: each detector reports the parity change of a product of
gauge factors between consecutive evaluations, with the product split into
individual factors in rounds where they are fixable and merged into the full
stabiliser otherwise. Edges and their probabilities come from exhaustive
single-fault enumeration, so the graph is correct by construction for any
schedule the circuit layer can produce.

Decoding is local matching: a bounded Dijkstra search offers each defect its
nearest neighbours, exact minimum-weight perfect matching runs on that defect
graph, and matched pairs expand back to shortest edge paths. Abstract
perfect-measurement (2D) and phenomenological (3D) graphs over the same code
families are provided for scaled-down threshold studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from . import _matcher
from .circuits import Circuit, fixability_timeline
from .code import PauliOperator, SubsystemCode
from .noise_sim import (
    FaultRecord,
    MeasurementRecord,
    NoiseModel,
    enumerate_single_faults,
)

__all__ = [
    "HyperEdgeFault",
    "InfeasibleMatching",
    "SyndromeNotCleared",
    "Detector",
    "Edge",
    "MatchingGraph",
    "DecodeResult",
    "build_matching_graph",
    "build_perfect_graph",
    "build_phenomenological_graph",
    "difference_syndrome",
    "local_dijkstra",
    "decode",
    "judge_failure",
]

# Fixed-point scale for integer edge weights (Dijkstra and matching run on
# integers so results are bit-reproducible across platforms).
_WEIGHT_SCALE = 1 << 16


class HyperEdgeFault(ValueError):
    """A single fault flips three or more detectors; not a matchable graph."""


class InfeasibleMatching(RuntimeError):
    """The defect graph admits no perfect matching; retry with larger m."""


class SyndromeNotCleared(RuntimeError):
    """A residual handed to the failure judge still triggers stabilisers."""


@dataclass(frozen=True)
class Detector:
    """One comparison of a gauge-factor product between consecutive rounds."""

    id: int
    stabiliser_id: int
    time_step: int
    gauge_factor_set: Tuple[int, ...]
    slots: Tuple[int, ...]  # measurement slots whose XOR this detector reports
    is_boundary: bool = False
    is_final: bool = False


@dataclass(frozen=True)
class Edge:
    id: int
    u: int
    v: int  # detector ids; v may be a boundary detector
    flip_probability: float
    weight: float
    int_weight: int
    fault_ids: Tuple[int, ...]
    logical_crossing_mask: int
    residual_x: int
    residual_z: int


@dataclass
class MatchingGraph:
    """Immutable space-time matching graph for one check basis."""

    pauli_type: str  # basis of the check operators: "x" or "z"
    code: SubsystemCode
    detectors: List[Detector]
    edges: List[Edge]
    boundary_id: Optional[int]
    n_slots: int
    logical_masks: Tuple[int, ...]  # opposite-type bare logicals, support masks
    _slot_to_detectors: List[Tuple[int, ...]] = field(repr=False, default_factory=list)
    _qubit_to_final: Dict[int, Tuple[int, ...]] = field(repr=False, default_factory=dict)
    _csr: Optional[tuple] = field(repr=False, default=None)

    @property
    def n_detectors(self) -> int:
        return len(self.detectors)

    def adjacency(self) -> tuple:
        """CSR arrays (indptr, indices, weights, edge_ids) over detector ids."""
        if self._csr is None:
            n = len(self.detectors)
            deg = np.zeros(n + 1, dtype=np.int64)
            for e in self.edges:
                deg[e.u + 1] += 1
                deg[e.v + 1] += 1
            indptr = np.cumsum(deg)
            indices = np.zeros(indptr[-1], dtype=np.int32)
            weights = np.zeros(indptr[-1], dtype=np.int64)
            edge_ids = np.zeros(indptr[-1], dtype=np.int64)
            cursor = indptr[:-1].copy()
            for e in self.edges:
                for a, b in ((e.u, e.v), (e.v, e.u)):
                    indices[cursor[a]] = b
                    weights[cursor[a]] = e.int_weight
                    edge_ids[cursor[a]] = e.id
                    cursor[a] += 1
            self._csr = (indptr, indices, weights, edge_ids)
        return self._csr

    def dump(self) -> str:
        """Structured text form for golden tests and external comparison."""
        lines = [
            "# matching graph basis=%s detectors=%d edges=%d"
            % (self.pauli_type, len(self.detectors), len(self.edges))
        ]
        for d in self.detectors:
            kind = "boundary" if d.is_boundary else ("final" if d.is_final else "bulk")
            lines.append(
                "detector %d t=%d stab=%d factors=%s %s"
                % (d.id, d.time_step, d.stabiliser_id, list(d.gauge_factor_set), kind)
            )
        for e in self.edges:
            lines.append(
                "edge %d %d %d p=%.9g w=%.9g mask=%d faults=%d"
                % (e.id, e.u, e.v, e.flip_probability, e.weight,
                   e.logical_crossing_mask, len(e.fault_ids))
            )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DecodeResult:
    correction: FrozenSet[int]  # edge ids, XOR of matched paths
    pairing: Tuple[Tuple[int, int], ...]  # (defect, defect) or (defect, boundary)
    weight: int  # total matched distance in integer weight units
    logical_crossing_mask: int
    residual_x: int
    residual_z: int


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _edge_weight(p: float) -> Tuple[float, int]:
    if not 0.0 < p < 0.5:
        raise ValueError("edge flip probability must lie in (0, 0.5), got %r" % p)
    w = math.log((1.0 - p) / p)
    return w, max(1, round(w * _WEIGHT_SCALE))


def _crossing_mask(masks: Sequence[int], residual: int) -> int:
    out = 0
    for j, m in enumerate(masks):
        if (residual & m).bit_count() & 1:
            out |= 1 << j
    return out


def _finish_graph(graph: MatchingGraph) -> MatchingGraph:
    """Populate the slot and final-round lookup tables."""
    slot_map: List[List[int]] = [[] for _ in range(graph.n_slots)]
    qubit_map: Dict[int, List[int]] = {}
    for d in graph.detectors:
        if d.is_boundary:
            continue
        for s in d.slots:
            slot_map[s].append(d.id)
        if d.is_final:
            support = 0
            for gid in d.gauge_factor_set:
                op = graph.code.gauge_ops[gid].op
                support |= op.x | op.z
            for q in _bits(support):
                qubit_map.setdefault(q, []).append(d.id)
    graph._slot_to_detectors = [tuple(v) for v in slot_map]
    graph._qubit_to_final = {q: tuple(v) for q, v in qubit_map.items()}
    return graph


def _fault_flips(graph: MatchingGraph, meas_mask: int, residual: int) -> List[int]:
    acc: Dict[int, int] = {}
    for s in _bits(meas_mask):
        for d in graph._slot_to_detectors[s]:
            acc[d] = acc.get(d, 0) ^ 1
    for q in _bits(residual):
        for d in graph._qubit_to_final.get(q, ()):
            acc[d] = acc.get(d, 0) ^ 1
    return sorted(d for d, v in acc.items() if v)


def build_matching_graph(
    code: SubsystemCode, circuit: Circuit, noise: NoiseModel, pauli_type: str,
    gauge_fixing: bool = True,
) -> MatchingGraph:
    """Space-time matching graph for the checks of one Pauli type.

    ``gauge_fixing=False`` keeps every detector merged at stabiliser level
    even in rounds where the gauge factors would be individually fixable,
    for comparing decoders with and without detector splitting.

    Detectors follow the fixability timeline: rounds where all gauge factors
    of a stabiliser are fixable contribute one detector per factor, other
    rounds one merged detector per stabiliser. A virtual noiseless round is
    appended so late residual errors remain detectable; round zero is always
    merged. Edges aggregate the exhaustive single-fault enumeration: faults
    flipping the same detector pair with the same logical crossing combine
    with odd-parity probability (exactly, for alternatives of one mechanism).
    """
    if pauli_type not in ("x", "z"):
        raise ValueError("pauli_type must be 'x' or 'z'")
    colour = 1 if pauli_type == "x" else 0
    fixable = fixability_timeline(circuit)

    meas_by_gauge: Dict[int, List[int]] = {}
    for slot, m in enumerate(circuit.measurements):
        meas_by_gauge.setdefault(m.gauge_id, []).append(slot)
    for slots in meas_by_gauge.values():
        slots.sort(key=lambda s: circuit.measurements[s].rep)

    if pauli_type == "x":
        logicals = tuple(lo.x for lo in code.bare_logicals_x)
    else:
        logicals = tuple(lo.z for lo in code.bare_logicals_z)

    detectors: List[Detector] = []
    for sid, stab in enumerate(code.stabilisers):
        if stab.colour != colour:
            continue
        factors = stab.gauge_factor_ids
        if any(g not in meas_by_gauge for g in factors):
            continue  # this basis is never measured by the schedule
        reps = {len(meas_by_gauge[g]) for g in factors}
        if len(reps) != 1:
            raise HyperEdgeFault("gauge factors of one face have unequal rounds")
        rounds = reps.pop()
        for r in range(rounds):
            split = gauge_fixing and r > 0 and all(fixable[(g, r)] for g in factors)
            if split:
                for g in factors:
                    slots = (meas_by_gauge[g][r - 1], meas_by_gauge[g][r])
                    detectors.append(
                        Detector(len(detectors), sid, r, (g,), slots)
                    )
            else:
                slots = tuple(meas_by_gauge[g][r] for g in factors)
                if r > 0:
                    slots += tuple(meas_by_gauge[g][r - 1] for g in factors)
                detectors.append(
                    Detector(len(detectors), sid, r, tuple(factors), slots)
                )
        # Virtual noiseless round: compares the last noisy product with the
        # true stabiliser eigenvalue of the residual data error.
        slots = tuple(meas_by_gauge[g][rounds - 1] for g in factors)
        detectors.append(
            Detector(len(detectors), sid, rounds, tuple(factors), slots,
                     is_final=True)
        )

    graph = MatchingGraph(
        pauli_type=pauli_type,
        code=code,
        detectors=detectors,
        edges=[],
        boundary_id=None,
        n_slots=len(circuit.measurements),
        logical_masks=logicals,
    )
    _finish_graph(graph)

    faults = enumerate_single_faults(circuit, noise)
    # (u, v, crossing) -> {mechanism: summed probability}, representatives
    buckets: Dict[Tuple[int, int, int], Dict[int, float]] = {}
    members: Dict[Tuple[int, int, int], List[int]] = {}
    reprs: Dict[Tuple[int, int, int], Tuple[int, int]] = {}
    boundary_needed = False
    for fid, rec in enumerate(faults):
        residual = rec.residual_z if pauli_type == "x" else rec.residual_x
        flips = _fault_flips(graph, rec.meas_mask, residual)
        crossing = _crossing_mask(logicals, residual)
        if not flips:
            if crossing:
                raise HyperEdgeFault(
                    "undetectable logical fault: %r" % (rec,)
                )
            continue
        if len(flips) == 1:
            key = (flips[0], -1, crossing)
            boundary_needed = True
        elif len(flips) == 2:
            key = (flips[0], flips[1], crossing)
        else:
            raise HyperEdgeFault(
                "fault flips %d detectors: %r" % (len(flips), rec)
            )
        buckets.setdefault(key, {})
        buckets[key][rec.mechanism] = buckets[key].get(rec.mechanism, 0.0) + rec.probability
        members.setdefault(key, []).append(fid)
        reprs.setdefault(key, (rec.residual_x, rec.residual_z))

    boundary = None
    if boundary_needed:
        boundary = Detector(len(detectors), -1, -1, (), (), is_boundary=True)
        detectors.append(boundary)
        graph.boundary_id = boundary.id

    for key in sorted(buckets):
        u, v, crossing = key
        p = 0.0
        for q in buckets[key].values():
            p = p * (1.0 - q) + q * (1.0 - p)
        if not 0.0 < p <= 0.5:
            raise HyperEdgeFault("edge probability %g out of range" % p)
        w, iw = _edge_weight(p)
        rx, rz = reprs[key]
        graph.edges.append(
            Edge(len(graph.edges), u, boundary.id if v == -1 else v, p, w, iw,
                 tuple(members[key]), crossing, rx, rz)
        )
    return graph


def _abstract_graph(
    code: SubsystemCode,
    pauli_type: str,
    p: float,
    fixed: bool,
    rounds: int,
    q_meas: float,
) -> MatchingGraph:
    """Shared builder for the perfect-measurement and phenomenological graphs.

    Nodes are check operators (gauge factors when ``fixed``, stabilisers
    otherwise) stacked ``rounds`` times; space edges are data qubits with flip
    probability ``p`` per round, time edges are measurement errors with
    probability ``q_meas``. Qubits in fewer than two checks connect to a
    virtual boundary.
    """
    colour = 1 if pauli_type == "x" else 0
    if pauli_type == "x":
        logicals = tuple(lo.x for lo in code.bare_logicals_x)
    else:
        logicals = tuple(lo.z for lo in code.bare_logicals_z)
    if fixed:
        checks = [
            (g.op, (gid,), gid)
            for gid, g in enumerate(code.gauge_ops)
            if g.colour == colour
        ]
    else:
        checks = [
            (s.op, s.gauge_factor_ids, sid)
            for sid, s in enumerate(code.stabilisers)
            if s.colour == colour
        ]
    nchecks = len(checks)
    qubit_checks: Dict[int, List[int]] = {}
    for ci, (op, _, _) in enumerate(checks):
        for q in _bits(op.x | op.z):
            qubit_checks.setdefault(q, []).append(ci)

    detectors: List[Detector] = []
    for t in range(rounds):
        for ci, (op, factors, sid) in enumerate(checks):
            detectors.append(Detector(t * nchecks + ci, sid, t, tuple(factors), ()))
    boundary_needed = any(len(v) < 2 for v in qubit_checks.values())
    boundary = None
    if boundary_needed:
        boundary = Detector(len(detectors), -1, -1, (), (), is_boundary=True)
        detectors.append(boundary)

    graph = MatchingGraph(
        pauli_type=pauli_type,
        code=code,
        detectors=detectors,
        edges=[],
        boundary_id=boundary.id if boundary else None,
        n_slots=0,
        logical_masks=logicals,
    )

    w, iw = _edge_weight(p)
    for t in range(rounds):
        for q in range(code.n):
            incident = qubit_checks.get(q, [])
            if not incident:
                continue
            qm = 1 << q
            crossing = _crossing_mask(logicals, qm)
            if len(incident) == 2:
                u, v = (t * nchecks + incident[0], t * nchecks + incident[1])
            elif boundary is not None:
                u, v = t * nchecks + incident[0], boundary.id
            else:
                raise HyperEdgeFault("dangling qubit %d on a closed surface" % q)
            rx = qm if pauli_type == "z" else 0
            rz = qm if pauli_type == "x" else 0
            graph.edges.append(
                Edge(len(graph.edges), u, v, p, w, iw, (), crossing, rx, rz)
            )
    if rounds > 1:
        wm, iwm = _edge_weight(q_meas)
        for t in range(rounds - 1):
            for ci in range(nchecks):
                graph.edges.append(
                    Edge(len(graph.edges), t * nchecks + ci,
                         (t + 1) * nchecks + ci, q_meas, wm, iwm, (), 0, 0, 0)
                )
    return graph


def build_perfect_graph(
    code: SubsystemCode, pauli_type: str, p: float, fixed: bool
) -> MatchingGraph:
    """2D matching graph with perfect measurements.

    ``fixed`` selects per-triangle checks (3-regular, hexagonal on the toric
    code) instead of merged stabilisers (6-regular, triangular).
    """
    return _abstract_graph(code, pauli_type, p, fixed, rounds=1, q_meas=0.0)


def build_phenomenological_graph(
    code: SubsystemCode, pauli_type: str, p: float, rounds: int,
    fixed: bool = False, q_meas: Optional[float] = None
) -> MatchingGraph:
    """3D matching graph: iid data errors plus iid measurement errors."""
    return _abstract_graph(
        code, pauli_type, p, fixed, rounds=rounds,
        q_meas=p if q_meas is None else q_meas,
    )


def difference_syndrome(
    record: MeasurementRecord,
    graph: MatchingGraph,
    residual_x: int = 0,
    residual_z: int = 0,
) -> List[int]:
    """Defect detector ids for a sampled run of the graph's circuit."""
    residual = residual_z if graph.pauli_type == "x" else residual_x
    return _fault_flips(graph, record.bits, residual)


def local_dijkstra(
    graph: MatchingGraph, defects: Sequence[int], m: int, source: int
) -> Tuple[List[int], List[int], Dict[int, Tuple[int, int]]]:
    """Nearest ``m`` defects from ``source`` by weighted graph distance.

    Returns (found defect ids, distances, predecessors) where predecessors
    maps a settled node to (previous node, edge id). Ties break by node id,
    so results are reproducible. Boundary detectors count as targets but are
    never expanded through.
    """
    import heapq

    indptr, indices, weights, edge_ids = graph.adjacency()
    targets = set(defects)
    if graph.boundary_id is not None:
        targets.add(graph.boundary_id)
    targets.discard(source)
    dist = {source: 0}
    pred: Dict[int, Tuple[int, int]] = {}
    done = set()
    found: List[int] = []
    found_d: List[int] = []
    heap = [(0, source)]
    while heap and len(found) < m:
        d, node = heapq.heappop(heap)
        if node in done or d != dist[node]:
            continue
        done.add(node)
        if node in targets:
            found.append(node)
            found_d.append(d)
            if len(found) >= m:
                break
        if node != source and graph.detectors[node].is_boundary:
            continue
        for i in range(indptr[node], indptr[node + 1]):
            nb = int(indices[i])
            nd = d + int(weights[i])
            if nb not in dist or nd < dist[nb]:
                dist[nb] = nd
                pred[nb] = (node, int(edge_ids[i]))
                heapq.heappush(heap, (nd, nb))
    return found, found_d, pred


def decode(graph: MatchingGraph, defects: Sequence[int], m: int = 20) -> DecodeResult:
    """Local matching: nearest-``m`` defect graph, exact MWPM, path expansion."""
    defects = sorted(defects)
    ndef = len(defects)
    if ndef == 0:
        return DecodeResult(frozenset(), (), 0, 0, 0, 0)
    indptr, indices, weights, edge_ids = graph.adjacency()
    boundary = graph.boundary_id
    if boundary is None and ndef % 2:
        raise InfeasibleMatching("odd defect parity on a closed surface")

    is_target = np.zeros(len(graph.detectors), dtype=np.uint8)
    for d in defects:
        is_target[d] = 1
    budget = m
    if boundary is not None:
        is_target[boundary] = 1
        budget = m + 1
    off, nodes, dists = _matcher.local_dijkstra_batch(
        indptr, indices, weights, is_target,
        np.asarray(defects, dtype=np.int32), budget,
    )

    index = {d: i for i, d in enumerate(defects)}
    pair_dist: Dict[Tuple[int, int], int] = {}
    bnd_dist: Dict[int, int] = {}
    for si in range(ndef):
        for k in range(off[si], off[si + 1]):
            node, dist = int(nodes[k]), int(dists[k])
            if boundary is not None and node == boundary:
                bnd_dist[si] = dist
            else:
                a, b = sorted((si, index[node]))
                if (a, b) not in pair_dist or dist < pair_dist[(a, b)]:
                    pair_dist[(a, b)] = dist

    us, vs, ws = [], [], []
    for (a, b), dist in sorted(pair_dist.items()):
        us.append(a)
        vs.append(b)
        ws.append(dist)
    nnodes = ndef
    if boundary is not None:
        # Duplicate-boundary trick: defect i may match its private boundary
        # copy ndef+i; copies pair off with each other at zero weight.
        nnodes = 2 * ndef
        for i, dist in sorted(bnd_dist.items()):
            us.append(i)
            vs.append(ndef + i)
            ws.append(dist)
        for i in range(ndef):
            for j in range(i + 1, ndef):
                us.append(ndef + i)
                vs.append(ndef + j)
                ws.append(0)
    mate = _matcher.min_weight_perfect_matching(
        nnodes,
        np.asarray(us, dtype=np.int64),
        np.asarray(vs, dtype=np.int64),
        np.asarray(ws, dtype=np.int64),
    )
    for i in range(ndef):
        if mate[i] < 0:
            raise InfeasibleMatching("defect %d unmatched with m=%d" % (defects[i], m))

    correction: set = set()
    pairing: List[Tuple[int, int]] = []
    total = 0
    for i in range(ndef):
        j = int(mate[i])
        if j < ndef:
            if j < i:
                continue
            src, dst = defects[i], defects[j]
            total += pair_dist[(i, j)]
            pairing.append((src, dst))
        else:
            src, dst = defects[i], boundary
            total += bnd_dist[i]
            pairing.append((src, boundary))
        path = _matcher.dijkstra_path(
            indptr, indices, weights, edge_ids, src, dst
        )
        correction ^= set(int(e) for e in path)

    crossing = 0
    rx = rz = 0
    for eid in correction:
        e = graph.edges[eid]
        crossing ^= e.logical_crossing_mask
        rx ^= e.residual_x
        rz ^= e.residual_z
    return DecodeResult(frozenset(correction), tuple(pairing), total, crossing, rx, rz)


def judge_failure(code: SubsystemCode, residual: PauliOperator, pauli_type: str) -> bool:
    """True if the residual acts as a logical of the given Pauli type.

    ``pauli_type`` names the error being judged: a Z-type residual fails when
    it anti-commutes with some bare X logical. The residual must already have
    a cleared stabiliser syndrome.
    """
    for stab in code.stabilisers:
        if not residual.commutes(stab.op):
            raise SyndromeNotCleared("residual anti-commutes with a stabiliser")
    opposite = code.bare_logicals_x if pauli_type == "z" else code.bare_logicals_z
    return any(not residual.commutes(lo) for lo in opposite)
