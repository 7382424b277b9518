"""Labelled combinatorial tessellations of surfaces.

Corners are the primitive entity. A corner is a (face, vertex) incidence;
`rho` maps a corner to the next corner around its face and `sigma` to the
next corner around its vertex. Faces, vertices and edges are derived orbits:
the edge involution is rho followed by sigma ((rho*sigma)^2 = identity on
closed surfaces), and each edge carries the two corners it pairs.

Corners carry a Z_2 colour (X/Z triangle type) and, when the tessellation is
schedulable, a Z_4 label driving circuit scheduling. Both satisfy
label(rho(c)) = label(c) + 1 and label(sigma(c)) = label(c) + 1 (mod 4),
with colour = label mod 2.

Open boundaries (the planar {4,4} patch) are represented by partial maps:
rho/sigma entries of -1 mark missing neighbours.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .symmetry import TessellationGroup, check_colourable, check_schedulable

__all__ = [
    "Tessellation",
    "InvalidParameter",
    "NotColourable",
    "NotLabelled",
    "UnsupportedVertexDegree",
    "build_toric",
    "build_planar",
    "from_group",
    "dual",
    "refine_semi_hyperbolic",
]


class InvalidParameter(ValueError):
    pass


class NotColourable(ValueError):
    pass


class NotLabelled(ValueError):
    pass


class UnsupportedVertexDegree(ValueError):
    pass


def _orbits(perm: Sequence[int], inv: Sequence[int]) -> List[List[int]]:
    """Orbits of a (possibly partial) permutation, as ordered cycles/paths.

    For partial maps (-1 entries) an orbit is the maximal path through its
    elements, listed from the element with no predecessor.
    """
    n = len(perm)
    has_pred = [False] * n
    for i in range(n):
        if perm[i] >= 0:
            has_pred[perm[i]] = True
    seen = [False] * n
    out = []
    # Paths first (start at elements without predecessor), then pure cycles.
    for start in list(i for i in range(n) if not has_pred[i]) + list(range(n)):
        if seen[start]:
            continue
        cyc = []
        c = start
        while c >= 0 and not seen[c]:
            seen[c] = True
            cyc.append(c)
            c = perm[c]
        out.append(cyc)
    return out


@dataclass(frozen=True)
class Tessellation:
    """Combinatorial tessellation with coloured (and optionally labelled) corners."""

    rho: Tuple[int, ...]
    sigma: Tuple[int, ...]
    colours: Tuple[int, ...]
    labels: Optional[Tuple[int, ...]] = None

    # Derived structure, filled in __post_init__.
    faces: Tuple[Tuple[int, ...], ...] = field(default=(), compare=False)
    vertices: Tuple[Tuple[int, ...], ...] = field(default=(), compare=False)
    edges: Tuple[Tuple[int, int], ...] = field(default=(), compare=False)
    face_of: Tuple[int, ...] = field(default=(), compare=False)
    vertex_of: Tuple[int, ...] = field(default=(), compare=False)
    edge_of: Tuple[int, ...] = field(default=(), compare=False)
    rho_inv: Tuple[int, ...] = field(default=(), compare=False)
    edge_records: Tuple[Tuple[int, int, int, int], ...] = field(
        default=(), compare=False
    )

    def __post_init__(self):
        n = self.n_corners
        rho, sigma = self.rho, self.sigma
        rho_inv = [-1] * n
        for c, d in enumerate(rho):
            if d >= 0:
                rho_inv[d] = c
        faces = _orbits(rho, rho_inv)
        sig_inv = [-1] * n
        for c, d in enumerate(sigma):
            if d >= 0:
                sig_inv[d] = c
        vertices = _orbits(sigma, sig_inv)
        face_of = [-1] * n
        for i, cyc in enumerate(faces):
            for c in cyc:
                face_of[c] = i
        vertex_of = [-1] * n
        for i, cyc in enumerate(vertices):
            for c in cyc:
                vertex_of[c] = i
        # Edge involution: c -> sigma(rho(c)). On a boundary the image may be
        # missing in one direction; pair from whichever side resolves. A corner
        # with no partner at all owns a dangling boundary edge alone.
        edge_of = [-1] * n
        edges = []
        for c in range(n):
            if edge_of[c] >= 0:
                continue
            d = sigma[rho[c]] if rho[c] >= 0 else -1
            if d >= 0 and d != c:
                eid = len(edges)
                edges.append((c, d))
                edge_of[c] = eid
                edge_of[d] = eid
        for c in range(n):
            if edge_of[c] < 0:
                edge_of[c] = len(edges)
                edges.append((c, c))
        records = []
        for a, b in edges:
            records.append(
                (
                    vertex_of[a],
                    vertex_of[rho[a]] if rho[a] >= 0 else -1,
                    face_of[a],
                    face_of[b] if b != a else -1,
                )
            )
        object.__setattr__(self, "faces", tuple(tuple(f) for f in faces))
        object.__setattr__(self, "vertices", tuple(tuple(v) for v in vertices))
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "face_of", tuple(face_of))
        object.__setattr__(self, "vertex_of", tuple(vertex_of))
        object.__setattr__(self, "edge_of", tuple(edge_of))
        object.__setattr__(self, "rho_inv", tuple(rho_inv))
        object.__setattr__(self, "edge_records", tuple(records))
        self._validate()

    # -- basic accessors ----------------------------------------------------

    @property
    def n_corners(self) -> int:
        return len(self.rho)

    @property
    def is_closed(self) -> bool:
        return all(x >= 0 for x in self.rho) and all(x >= 0 for x in self.sigma)

    @property
    def is_labelled(self) -> bool:
        return self.labels is not None

    def euler_characteristic(self) -> int:
        return len(self.faces) - len(self.edges) + len(self.vertices)

    def edge_partner(self, c: int) -> int:
        """The corner across the edge of c (rho then sigma), or -1."""
        d = self.rho[c]
        return self.sigma[d] if d >= 0 else -1

    def _validate(self):
        n = self.n_corners
        if self.is_closed:
            for c in range(n):
                d = self.sigma[self.rho[c]]
                if self.sigma[self.rho[d]] != c:
                    raise InvalidParameter("edge involution is not an involution")
        if self.labels is not None:
            for c in range(n):
                if self.colours[c] != self.labels[c] % 2:
                    raise InvalidParameter("colour must equal label mod 4 parity")
                if self.rho[c] >= 0 and self.labels[self.rho[c]] != (self.labels[c] + 1) % 4:
                    raise InvalidParameter("label(rho(c)) != label(c)+1")
                if self.sigma[c] >= 0 and self.labels[self.sigma[c]] != (self.labels[c] + 1) % 4:
                    raise InvalidParameter("label(sigma(c)) != label(c)+1")
        for c in range(n):
            if self.rho[c] >= 0 and self.colours[self.rho[c]] != (self.colours[c] + 1) % 2:
                raise InvalidParameter("colours must alternate along rho")
            if self.sigma[c] >= 0 and self.colours[self.sigma[c]] != (self.colours[c] + 1) % 2:
                raise InvalidParameter("colours must alternate along sigma")

    # -- export -------------------------------------------------------------

    def export_text(self) -> str:
        """Structured text dump: faces, vertices, edges, corner labels."""
        payload = {
            "faces": [list(f) for f in self.faces],
            "vertices": [list(v) for v in self.vertices],
            "edges": [list(e) for e in self.edge_records],
            "labels": list(self.labels) if self.labels else None,
            "colours": list(self.colours),
        }
        return json.dumps(payload, indent=1)

    def save(self, path) -> None:
        Path(path).write_text(self.export_text() + "\n")


def _labels_by_propagation(rho, sigma, n, modulus) -> Tuple[int, ...]:
    """Assign labels by BFS with +1 per rho/sigma step; None if inconsistent."""
    labels = [None] * n
    labels[0] = 0
    stack = [0]
    rho_inv = [-1] * n
    sig_inv = [-1] * n
    for c in range(n):
        if rho[c] >= 0:
            rho_inv[rho[c]] = c
        if sigma[c] >= 0:
            sig_inv[sigma[c]] = c
    while stack:
        c = stack.pop()
        for d, delta in (
            (rho[c], 1),
            (sigma[c], 1),
            (rho_inv[c], -1),
            (sig_inv[c], -1),
        ):
            if d < 0:
                continue
            want = (labels[c] + delta) % modulus
            if labels[d] is None:
                labels[d] = want
                stack.append(d)
            elif labels[d] != want:
                return None
    if any(x is None for x in labels):
        return None
    return tuple(labels)


def build_toric(L: int) -> Tessellation:
    """Closed {4,4} torus of L x L faces, corner labels (NW,NE,SE,SW)=(0,1,2,3)."""
    if L < 2:
        raise InvalidParameter("need L >= 2")
    idx = lambda x, y, k: (x % L) * 4 * L + (y % L) * 4 + k
    n = 4 * L * L
    rho = [0] * n
    sigma = [0] * n
    # Edge involution by corner position: NW crosses the top edge, NE the
    # right edge, SE the bottom edge, SW the left edge (y axis points up).
    for x in range(L):
        for y in range(L):
            for k in range(4):
                rho[idx(x, y, k)] = idx(x, y, (k + 1) % 4)
    einv = {}
    for x in range(L):
        for y in range(L):
            einv[idx(x, y, 0)] = idx(x, y + 1, 2)
            einv[idx(x, y, 1)] = idx(x + 1, y, 3)
            einv[idx(x, y, 2)] = idx(x, y - 1, 0)
            einv[idx(x, y, 3)] = idx(x - 1, y, 1)
    rho_inv = [0] * n
    for c in range(n):
        rho_inv[rho[c]] = c
    for c in range(n):
        sigma[c] = einv[rho_inv[c]]
    labels = tuple(c % 4 for c in range(n))
    colours = tuple(x % 2 for x in labels)
    return Tessellation(tuple(rho), tuple(sigma), colours, labels)


def build_planar(L: int) -> Tessellation:
    """Open-boundary {4,4} patch whose subsystem code is [[3L^2-2L, 1, L]].

    An (L-1) x (L-1) grid of full faces. Each boundary edge keeps, from the
    cut-away face outside it, the single corner whose truncated triangle is
    the two-qubit boundary stabiliser: Z type on the top/bottom boundaries,
    X type on the left/right boundaries. Those corners form singleton faces.
    """
    if L < 2:
        raise InvalidParameter("need L >= 2")
    # Build inside an ambient L x L torus; the face ring at x = L-1 or
    # y = L-1 is "outside" and keeps only the remnant corners.
    M = L
    t = build_toric(M) if M >= 2 else None
    idx = lambda x, y, k: (x % M) * 4 * M + (y % M) * 4 + k
    alive = [False] * (4 * M * M)
    for x in range(L - 1):
        for y in range(L - 1):
            for k in range(4):
                alive[idx(x, y, k)] = True
    for x in range(L - 1):
        alive[idx(x, M - 1, 2)] = True  # SE remnant above the top boundary
        alive[idx(x, M - 1, 0)] = True  # NW remnant below the bottom boundary
    for y in range(L - 1):
        alive[idx(M - 1, y, 1)] = True  # NE remnant left of the left boundary
        alive[idx(M - 1, y, 3)] = True  # SW remnant right of the right boundary
    newid = {}
    for c in range(4 * M * M):
        if alive[c]:
            newid[c] = len(newid)
    m = len(newid)
    rho = [-1] * m
    sigma = [-1] * m
    for c in range(4 * M * M):
        if not alive[c]:
            continue
        if alive[t.rho[c]] and t.face_of[t.rho[c]] == t.face_of[c]:
            rho[newid[c]] = newid[t.rho[c]]
        if alive[t.sigma[c]]:
            sigma[newid[c]] = newid[t.sigma[c]]
    labels = tuple(t.labels[c] for c in range(4 * M * M) if alive[c])
    colours = tuple(x % 2 for x in labels)
    return Tessellation(tuple(rho), tuple(sigma), colours, labels)


def from_group(g: TessellationGroup) -> Tessellation:
    """Tessellation whose corners are the group elements (regular action)."""
    if g.s != 4:
        raise UnsupportedVertexDegree("only s=4 tessellations carry these codes")
    if not check_colourable(g):
        raise NotColourable("colouring homomorphism does not descend to the quotient")
    n = g.order
    rho = g.rho.perm
    sigma = g.sigma.perm
    if check_schedulable(g):
        labels = _labels_by_propagation(rho, sigma, n, 4)
        if labels is None:
            raise NotColourable("declared relations pass but labelling is inconsistent")
        colours = tuple(x % 2 for x in labels)
        return Tessellation(rho, sigma, colours, labels)
    colours = _labels_by_propagation(rho, sigma, n, 2)
    if colours is None:
        raise NotColourable("colour propagation inconsistent")
    return Tessellation(rho, sigma, colours, None)


def dual(t: Tessellation) -> Tessellation:
    """Exchange faces and vertices (rho and sigma swap roles)."""
    return Tessellation(t.sigma, t.rho, t.colours, t.labels)


def refine_semi_hyperbolic(base_dual: Tessellation, l: int) -> Tessellation:
    """Tile each square face of the dual with an l x l grid and dualise back.

    Accepts either the {4c,4} code tessellation (dualised internally) or its
    {4,4c} dual (all faces squares). Returns the mixed tessellation with
    square and 4c-gon faces, all vertices of degree 4, relabelled by
    propagation.
    """
    if l < 1:
        raise InvalidParameter("need l >= 1")
    if not base_dual.is_closed:
        raise InvalidParameter("semi-hyperbolic refinement needs a closed surface")
    t = base_dual
    if any(len(f) != 4 for f in t.faces):
        t = dual(t)
        if any(len(f) != 4 for f in t.faces):
            raise InvalidParameter("need a tessellation with all-square faces or dual")
    if t.labels is None:
        raise NotLabelled("refinement transports labels; base must be labelled")

    nf = len(t.faces)
    cid = lambda f, i, j, k: ((f * l + i) * l + j) * 4 + k
    n = nf * l * l * 4
    rho = [-1] * n
    sigma = [-1] * n

    # Cell corner k sits at cell-grid position (0,0),(1,0),(1,1),(0,1) for
    # k = 0,1,2,3; rho cycles k -> k+1. Face corner cycle (c0..c3) wraps the
    # grid boundary: side s runs from grid corner s to s+1, subdivided into
    # parameters tt = 0..l-1 along the traversal direction.
    def side_cell(s, tt):
        if s == 0:
            return (tt, 0)
        if s == 1:
            return (l - 1, tt)
        if s == 2:
            return (l - 1 - tt, l - 1)
        return (0, l - 1 - tt)

    # Position of each base corner within its face cycle, with the cycle
    # rotated to start at the minimal corner index (canonical order).
    cycles = []
    side_of = {}
    for f, cyc in enumerate(t.faces):
        start = cyc.index(min(cyc))
        cyc = cyc[start:] + cyc[:start]
        cycles.append(cyc)
        for s, c in enumerate(cyc):
            side_of[c] = (f, s)

    for f in range(nf):
        for i in range(l):
            for j in range(l):
                for k in range(4):
                    rho[cid(f, i, j, k)] = cid(f, i, j, (k + 1) % 4)

    # Edge involution E of the refined complex, then sigma = E o rho^{-1}
    # pulled back through rho (sigma(c) = E(rho^{-1}(c))).
    E = [-1] * n
    for f in range(nf):
        for i in range(l):
            for j in range(l):
                for k in range(4):
                    c = cid(f, i, j, k)
                    if k == 0:
                        across = (i, j - 1)
                    elif k == 1:
                        across = (i + 1, j)
                    elif k == 2:
                        across = (i, j + 1)
                    else:
                        across = (i - 1, j)
                    ai, aj = across
                    if 0 <= ai < l and 0 <= aj < l:
                        E[c] = cid(f, ai, aj, (k + 2) % 4)
                    else:
                        # Crossing side k of the base face at parameter tt.
                        if k == 0:
                            tt = i
                        elif k == 1:
                            tt = j
                        elif k == 2:
                            tt = l - 1 - i
                        else:
                            tt = l - 1 - j
                        base_c = cycles[f][k]
                        partner = t.edge_partner(base_c)
                        pf, ps = side_of[partner]
                        pi, pj = side_cell(ps, l - 1 - tt)
                        E[c] = cid(pf, pi, pj, ps)
    rho_inv = [0] * n
    for c in range(n):
        rho_inv[rho[c]] = c
    for c in range(n):
        sigma[c] = E[rho_inv[c]]

    labels = _labels_by_propagation(rho, sigma, n, 4)
    if labels is None:
        raise NotLabelled("label propagation inconsistent on refined tessellation")
    colours = tuple(x % 2 for x in labels)
    refined = Tessellation(tuple(rho), tuple(sigma), colours, labels)
    return dual(refined)
