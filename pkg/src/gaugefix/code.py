"""Subsystem codes built from labelled tessellations.

Qubits live on vertices and edges of a tessellation (n = |V| + |E|). Each
corner carries a weight-3 triangle gauge operator: the vertex qubit plus the
two edge qubits of that face meeting at the vertex. The operator's Pauli
type is the corner colour. Face stabilisers are the products of same-type
triangles within a face.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from . import _gf2
from .tessellation import Tessellation

__all__ = [
    "PauliOperator",
    "SubsystemCode",
    "TannerGraph",
    "ColouringInconsistent",
    "CommutationFailure",
    "RankInconsistency",
    "NotClosedSurface",
    "NonCommutingSelection",
    "NotACutSet",
    "NotIndependent",
    "build_subsystem_code",
    "compute_logicals",
    "compute_distance",
    "gauge_fix_subspace",
    "tanner_merge",
    "rate_matched_L",
]


class ColouringInconsistent(ValueError):
    pass


class CommutationFailure(ValueError):
    pass


class RankInconsistency(ValueError):
    pass


class NotClosedSurface(ValueError):
    pass


class NonCommutingSelection(ValueError):
    pass


class NotACutSet(ValueError):
    pass


class NotIndependent(ValueError):
    pass


@dataclass(frozen=True)
class PauliOperator:
    """Hermitian Pauli (up to phase) as X/Z support bitmasks over n qubits."""

    n: int
    x: int = 0
    z: int = 0

    def commutes(self, other: "PauliOperator") -> bool:
        p = bin(self.x & other.z).count("1") + bin(self.z & other.x).count("1")
        return p % 2 == 0

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return PauliOperator(self.n, self.x ^ other.x, self.z ^ other.z)

    @property
    def weight(self) -> int:
        return bin(self.x | self.z).count("1")

    @property
    def support(self) -> int:
        return self.x | self.z

    def symplectic(self) -> int:
        return (self.x << self.n) | self.z

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0


@dataclass(frozen=True)
class GaugeOp:
    """Triangle operator with its tessellation bookkeeping."""

    op: PauliOperator
    corner: int
    face: int
    vertex: int
    label: Optional[int]
    colour: int


@dataclass(frozen=True)
class Stabiliser:
    op: PauliOperator
    face: int
    colour: int
    gauge_factor_ids: Tuple[int, ...]


@dataclass
class SubsystemCode:
    n: int
    n_vertices: int
    n_edges: int
    gauge_ops: List[GaugeOp]
    stabilisers: List[Stabiliser]
    k: int
    g: int
    tessellation: Optional[Tessellation] = None
    bare_logicals_x: List[PauliOperator] = field(default_factory=list)
    bare_logicals_z: List[PauliOperator] = field(default_factory=list)
    _d: Dict[str, int] = field(default_factory=dict)

    def vertex_qubit(self, v: int) -> int:
        return v

    def edge_qubit(self, e: int) -> int:
        return self.n_vertices + e

    def stabiliser_rank(self) -> int:
        return _gf2.rank([s.op.symplectic() for s in self.stabilisers])

    def distance(self, pauli_type: str = "both") -> int:
        if pauli_type not in self._d:
            self._d[pauli_type] = compute_distance(self, pauli_type)
        return self._d[pauli_type]


@dataclass(frozen=True)
class TannerGraph:
    n_qubits: int
    x_checks: Tuple[FrozenSet[int], ...]
    z_checks: Tuple[FrozenSet[int], ...]

    def __post_init__(self):
        for xc in self.x_checks:
            for zc in self.z_checks:
                if len(xc & zc) % 2:
                    raise CommutationFailure("X and Z checks must overlap evenly")


def _triangle(t: Tessellation, c: int, n_v: int) -> Optional[int]:
    """Support mask of corner c's triangle, or None if cut by a boundary."""
    e_next = t.edge_of[c]
    prev = t.rho_inv[c]
    mask = 1 << t.vertex_of[c]
    mask |= 1 << (n_v + e_next)
    if prev >= 0:
        mask |= 1 << (n_v + t.edge_of[prev])
    return mask


def build_subsystem_code(t: Tessellation) -> SubsystemCode:
    n_v = len(t.vertices)
    n_e = len(t.edges)
    n = n_v + n_e
    gauge_ops: List[GaugeOp] = []
    for c in range(t.n_corners):
        mask = _triangle(t, c, n_v)
        colour = t.colours[c]
        op = PauliOperator(n, x=mask if colour else 0, z=0 if colour else mask)
        gauge_ops.append(
            GaugeOp(
                op=op,
                corner=c,
                face=t.face_of[c],
                vertex=t.vertex_of[c],
                label=t.labels[c] if t.labels else None,
                colour=colour,
            )
        )
    stabilisers: List[Stabiliser] = []
    for f, cyc in enumerate(t.faces):
        for colour in (0, 1):
            ids = tuple(c for c in cyc if t.colours[c] == colour)
            if not ids:
                continue
            op = PauliOperator(n)
            for c in ids:
                op = op * gauge_ops[c].op
            if op.is_identity():
                continue
            stabilisers.append(Stabiliser(op=op, face=f, colour=colour, gauge_factor_ids=ids))

    _check_commutation(gauge_ops, stabilisers)

    g_rank = _gf2.rank([go.op.symplectic() for go in gauge_ops])
    s_rank = _gf2.rank([s.op.symplectic() for s in stabilisers])
    if (g_rank - s_rank) % 2:
        raise RankInconsistency("gauge rank minus stabiliser rank must be even")
    g = (g_rank - s_rank) // 2
    k = n - s_rank - g
    code = SubsystemCode(
        n=n,
        n_vertices=n_v,
        n_edges=n_e,
        gauge_ops=gauge_ops,
        stabilisers=stabilisers,
        k=k,
        g=g,
        tessellation=t,
    )
    bx, bz = compute_logicals(code)
    code.bare_logicals_x = bx
    code.bare_logicals_z = bz
    return code


def _check_commutation(gauge_ops: Sequence[GaugeOp], stabilisers: Sequence[Stabiliser]):
    for s in stabilisers:
        for go in gauge_ops:
            if not s.op.commutes(go.op):
                raise CommutationFailure(
                    f"stabiliser on face {s.face} anticommutes with corner {go.corner}"
                )
    for s in stabilisers:
        for s2 in stabilisers:
            if not s.op.commutes(s2.op):
                raise CommutationFailure("stabilisers must mutually commute")
    # Adjacent same-type triangles sharing exactly one qubit would anticommute
    # with the opposite-type face product; surface both failure modes.
    for a in gauge_ops:
        for b in gauge_ops:
            if a.colour == b.colour and a.op != b.op:
                shared = bin(a.op.support & b.op.support).count("1")
                if a.face == b.face and shared not in (0, 1):
                    raise ColouringInconsistent(
                        "same-type triangles in a face overlap on >1 qubit"
                    )


def compute_logicals(
    code: SubsystemCode,
) -> Tuple[List[PauliOperator], List[PauliOperator]]:
    """Symplectic bases of the bare logical group, one list per Pauli type."""
    n = code.n
    # Z-type bare logicals: Z masks commuting with every X gauge op, modulo
    # Z stabilisers. Symmetrically for X.
    x_rows = [go.op.x for go in code.gauge_ops if go.colour == 1]
    z_rows = [go.op.z for go in code.gauge_ops if go.colour == 0]
    sz = _gf2.row_reduce([s.op.z for s in code.stabilisers if s.colour == 0])
    sx = _gf2.row_reduce([s.op.x for s in code.stabilisers if s.colour == 1])
    z_cands = _gf2.kernel_basis(x_rows, n)
    x_cands = _gf2.kernel_basis(z_rows, n)
    z_basis = []
    acc = list(sz)
    for v in z_cands:
        r = _gf2.reduce_mod(v, acc)
        if r:
            z_basis.append(r)
            acc = _gf2.row_reduce(acc + [r])
    x_basis = []
    acc = list(sx)
    for v in x_cands:
        r = _gf2.reduce_mod(v, acc)
        if r:
            x_basis.append(r)
            acc = _gf2.row_reduce(acc + [r])
    if len(z_basis) != code.k or len(x_basis) != code.k:
        raise RankInconsistency(
            f"logical counts {len(x_basis)}/{len(z_basis)} != k={code.k}"
        )
    x_basis, z_basis = _symplectic_pair(x_basis, z_basis)
    bx = [PauliOperator(n, x=v) for v in x_basis]
    bz = [PauliOperator(n, z=v) for v in z_basis]
    return bx, bz


def _symplectic_pair(x_basis: List[int], z_basis: List[int]) -> Tuple[List[int], List[int]]:
    """Reorder/combine so that parity(x_i & z_j) = delta_ij."""
    xs = list(x_basis)
    zs = list(z_basis)
    k = len(xs)
    for i in range(k):
        # Find a z partner anticommuting with xs[i].
        j = next(
            (j for j in range(i, k) if bin(xs[i] & zs[j]).count("1") % 2),
            None,
        )
        if j is None:
            raise RankInconsistency("degenerate symplectic pairing")
        zs[i], zs[j] = zs[j], zs[i]
        for j in range(k):
            if j != i and bin(xs[j] & zs[i]).count("1") % 2:
                xs[j] ^= xs[i]
            if j != i and bin(xs[i] & zs[j]).count("1") % 2:
                zs[j] ^= zs[i]
    return xs, zs


# -- distance -----------------------------------------------------------------


def _check_graph(n: int, checks: Sequence[int]) -> List[List[int]]:
    """Map each qubit to the (<=2) checks whose support contains it."""
    incidence: List[List[int]] = [[] for _ in range(n)]
    for ci, mask in enumerate(checks):
        m = mask
        while m:
            q = (m & -m).bit_length() - 1
            incidence[q].append(ci)
            m &= m - 1
    for q, cs in enumerate(incidence):
        if len(cs) > 2:
            raise CommutationFailure(
                f"qubit {q} is in {len(cs)} same-type checks; matching needs <=2"
            )
    return incidence


def min_nontrivial_cycle(
    n: int,
    checks: Sequence[int],
    logical_masks: Sequence[int],
    qubit_weight: Optional[Sequence[int]] = None,
) -> int:
    """Shortest cycle in the check graph crossing some logical an odd number of times.

    For each logical, searches the Z_2 double cover where traversing a qubit
    in that logical's support flips the sheet. BFS (unit weights) per source.
    """
    import heapq

    incidence = _check_graph(n, checks)
    n_checks = len(checks)
    boundary = n_checks  # virtual node for qubits in a single check
    adj: List[List[Tuple[int, int]]] = [[] for _ in range(n_checks + 1)]
    for q, cs in enumerate(incidence):
        if len(cs) == 2:
            a, b = cs
        elif len(cs) == 1:
            a, b = cs[0], boundary
        else:
            continue
        adj[a].append((b, q))
        adj[b].append((a, q))
    best = None
    w = qubit_weight or [1] * n
    for lmask in logical_masks:
        for src in range(n_checks + 1):
            # Dijkstra over (node, sheet).
            dist = {(src, 0): 0}
            pq = [(0, src, 0)]
            while pq:
                d, u, sheet = heapq.heappop(pq)
                if best is not None and d >= best:
                    break
                if dist.get((u, sheet), None) != d:
                    continue
                for v, q in adj[u]:
                    ns = sheet ^ (1 if (lmask >> q) & 1 else 0)
                    nd = d + w[q]
                    if nd < dist.get((v, ns), nd + 1):
                        dist[(v, ns)] = nd
                        heapq.heappush(pq, (nd, v, ns))
            d1 = dist.get((src, 1))
            if d1 is not None and (best is None or d1 < best):
                best = d1
    if best is None:
        raise RankInconsistency("no non-trivial cycle found")
    return best


def _distance_one_type(code: SubsystemCode, error_type: str, checks: Sequence[int]) -> int:
    n = code.n
    if error_type == "Z":
        logicals = [lo.x for lo in code.bare_logicals_x]
    else:
        logicals = [lo.z for lo in code.bare_logicals_z]
    return min_nontrivial_cycle(n, checks, logicals)


def compute_distance(code: SubsystemCode, pauli_type: str = "both") -> int:
    """Minimum dressed logical weight via shortest non-contractible cycle."""
    if code.tessellation is not None and not code.tessellation.is_closed:
        raise NotClosedSurface("distance search requires a closed tessellation")
    vals = []
    if pauli_type in ("Z", "both"):
        checks = [s.op.x for s in code.stabilisers if s.colour == 1]
        vals.append(_distance_one_type(code, "Z", checks))
    if pauli_type in ("X", "both"):
        checks = [s.op.z for s in code.stabilisers if s.colour == 0]
        vals.append(_distance_one_type(code, "X", checks))
    if not vals:
        raise ValueError(f"unknown pauli_type {pauli_type!r}")
    return min(vals)


# -- gauge fixing --------------------------------------------------------------


def gauge_fix_subspace(code: SubsystemCode, selection) -> SubsystemCode:
    """Promote selected triangles to stabilisers.

    `selection` maps face id to either a string in {"x", "z", "xz"} (fix all
    triangles of those types in the face) or an iterable of corner ids.
    Faces not mentioned keep their merged face stabilisers.
    """
    t = code.tessellation
    if t is None:
        raise ValueError("gauge fixing needs the source tessellation")
    by_corner = {go.corner: go for go in code.gauge_ops}
    fixed: List[GaugeOp] = []
    for f, sel in selection.items():
        cyc = t.faces[f]
        if isinstance(sel, str):
            want = {"x": (1,), "z": (0,), "xz": (0, 1)}[sel]
            corners = [c for c in cyc if t.colours[c] in want]
        else:
            corners = list(sel)
        for c in corners:
            if t.face_of[c] != f:
                raise ValueError(f"corner {c} is not in face {f}")
            fixed.append(by_corner[c])
    for i, a in enumerate(fixed):
        for b in fixed[i + 1 :]:
            if not a.op.commutes(b.op):
                raise NonCommutingSelection(
                    f"corners {a.corner} and {b.corner} anticommute"
                )
    fixed_corners = {go.corner for go in fixed}
    stabilisers: List[Stabiliser] = []
    for f, cyc in enumerate(t.faces):
        for colour in (0, 1):
            ids = [c for c in cyc if t.colours[c] == colour]
            fixed_here = [c for c in ids if c in fixed_corners]
            rest = [c for c in ids if c not in fixed_corners]
            if fixed_here:
                for c in fixed_here:
                    stabilisers.append(
                        Stabiliser(
                            op=by_corner[c].op,
                            face=f,
                            colour=colour,
                            gauge_factor_ids=(c,),
                        )
                    )
                if rest:
                    op = PauliOperator(code.n)
                    for c in rest:
                        op = op * by_corner[c].op
                    stabilisers.append(
                        Stabiliser(op=op, face=f, colour=colour, gauge_factor_ids=tuple(rest))
                    )
            elif ids:
                op = PauliOperator(code.n)
                for c in ids:
                    op = op * by_corner[c].op
                if not op.is_identity():
                    stabilisers.append(
                        Stabiliser(op=op, face=f, colour=colour, gauge_factor_ids=tuple(ids))
                    )
    new_s = [s for s in stabilisers]
    for s in new_s:
        for s2 in new_s:
            if not s.op.commutes(s2.op):
                raise NonCommutingSelection("selection yields anticommuting stabilisers")
    # Triangles that commute with every new stabiliser individually.
    remaining = [
        go
        for go in code.gauge_ops
        if all(go.op.commutes(s.op) for s in new_s)
    ]
    # Rank of the full new gauge group: the centraliser of the new stabiliser
    # set inside the span of the old gauge group (products of triangles may
    # commute with the fixed set even when the factors do not).
    g_basis: List[GaugeOp] = []
    acc: List[int] = []
    for go in code.gauge_ops:
        v = go.op.symplectic()
        if not _gf2.in_rowspace(v, acc):
            g_basis.append(go)
            acc = _gf2.row_reduce(acc + [v])
    n = code.n

    def symp(a: PauliOperator, b: PauliOperator) -> int:
        return (bin(a.x & b.z).count("1") + bin(a.z & b.x).count("1")) % 2

    constraints = []
    for s in new_s:
        row = 0
        for j, go in enumerate(g_basis):
            if symp(s.op, go.op):
                row |= 1 << j
        constraints.append(row)
    g_rank = len(g_basis) - _gf2.rank(constraints)
    s_rank = _gf2.rank([s.op.symplectic() for s in new_s])
    g = (g_rank - s_rank) // 2
    k = code.n - s_rank - g
    if k != code.k:
        raise RankInconsistency("gauge fixing changed the logical count")
    out = SubsystemCode(
        n=code.n,
        n_vertices=code.n_vertices,
        n_edges=code.n_edges,
        gauge_ops=remaining,
        stabilisers=new_s,
        k=k,
        g=g,
        tessellation=t,
        bare_logicals_x=code.bare_logicals_x,
        bare_logicals_z=code.bare_logicals_z,
    )
    return out


# -- Tanner graph merge ---------------------------------------------------------


def tanner_merge(
    t: TannerGraph, z_check: int, cut_set: Sequence[int]
) -> Tuple[TannerGraph, List[PauliOperator]]:
    """Identify the X checks of a local cut-set around one Z check.

    Returns the merged graph and the new gauge-qubit Z operators, one per
    connected component of the Z check's support after the cut (all but the
    last; their product with the last equals the original Z check).
    """
    zq = set(t.z_checks[z_check])
    cut = list(dict.fromkeys(cut_set))
    if len(cut) != len(cut_set):
        raise NotIndependent("repeated X checks in cut set")
    rows = []
    for ci in cut:
        mask = 0
        for q in t.x_checks[ci]:
            mask |= 1 << q
        rows.append(mask)
    if _gf2.rank(rows) != len(rows):
        raise NotIndependent("cut-set X checks are linearly dependent")
    # Components of the Z support under the remaining local X checks.
    parent = {q: q for q in zq}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for ci, xc in enumerate(t.x_checks):
        if ci in cut:
            continue
        qs = [q for q in xc if q in zq]
        for a, b in zip(qs, qs[1:]):
            parent[find(a)] = find(b)
    comps: Dict[int, List[int]] = {}
    for q in zq:
        comps.setdefault(find(q), []).append(q)
    comp_list = sorted(comps.values())
    if len(comp_list) != len(cut):
        raise NotACutSet(
            f"cut of size {len(cut)} splits the support into {len(comp_list)} parts"
        )
    merged = frozenset()
    for ci in cut:
        merged = merged ^ t.x_checks[ci]
    new_x = tuple(
        xc for ci, xc in enumerate(t.x_checks) if ci not in cut
    ) + ((merged,) if merged else ())
    graph = TannerGraph(t.n_qubits, new_x, t.z_checks)
    gauge = []
    for comp in comp_list[:-1]:
        mask = 0
        for q in comp:
            mask |= 1 << q
        gauge.append(PauliOperator(t.n_qubits, z=mask))
    return graph, gauge


def surface_code_distance(t: Tessellation, pauli_type: str = "both") -> int:
    """Distance of the subspace surface code on the same tessellation.

    Qubits on edges; X stabilisers on vertices, Z stabilisers on faces.
    """
    if not t.is_closed:
        raise NotClosedSurface("subspace distance needs a closed tessellation")
    ne = len(t.edges)
    vertex_checks = []
    for cyc in t.vertices:
        m = 0
        for c in cyc:
            m |= 1 << t.edge_of[c]
            prev = t.rho_inv[c]
            if prev >= 0:
                m |= 1 << t.edge_of[prev]
        vertex_checks.append(m)
    face_checks = []
    for cyc in t.faces:
        m = 0
        for c in cyc:
            m |= 1 << t.edge_of[c]
        face_checks.append(m)
    z_logicals = []
    acc = _gf2.row_reduce(face_checks)
    for v in _gf2.kernel_basis(vertex_checks, ne):
        r = _gf2.reduce_mod(v, acc)
        if r:
            z_logicals.append(r)
            acc = _gf2.row_reduce(acc + [r])
    x_logicals = []
    acc = _gf2.row_reduce(vertex_checks)
    for v in _gf2.kernel_basis(face_checks, ne):
        r = _gf2.reduce_mod(v, acc)
        if r:
            x_logicals.append(r)
            acc = _gf2.row_reduce(acc + [r])
    vals = []
    if pauli_type in ("Z", "both"):
        vals.append(min_nontrivial_cycle(ne, vertex_checks, x_logicals))
    if pauli_type in ("X", "both"):
        vals.append(min_nontrivial_cycle(ne, face_checks, z_logicals))
    if not vals:
        raise ValueError(f"unknown pauli_type {pauli_type!r}")
    return min(vals)


def rate_matched_L(k: int, l: int) -> float:
    """Surface-code size with the same encoding rate as an l-refined code."""
    return 2.0 * l * (1.0 - 2.0 / k) ** 0.5
