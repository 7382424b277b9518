"""Rotation groups of closed tessellations and their scheduling homomorphisms.

A closed {r,s} tessellation of an orientable surface is described here by a
finite quotient of the rotation group

    G = < rho, sigma | (rho*sigma)^2 = rho^r = sigma^s = e >

given as an explicit permutation action on flag indices. Whether a code built
on the tessellation can be 2-coloured (X/Z triangle types) or 4-labelled
(circuit scheduling) reduces to whether the maps rho, sigma -> 1 into Z_2 or
Z_4 kill every relation of the quotient.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

__all__ = [
    "GroupElement",
    "TessellationGroup",
    "HomomorphismSolution",
    "RelationViolation",
    "NotTransitive",
    "group_from_permutations",
    "check_colourable",
    "check_schedulable",
    "solve_cyclic_scheduling",
    "toric_group",
    "load_group",
    "save_group",
    "bundled_group_path",
]

# Relation words are sequences of signed generator indices:
# +1 = rho, -1 = rho^-1, +2 = sigma, -2 = sigma^-1.
Word = Tuple[int, ...]

RHO, SIGMA = 1, 2


class RelationViolation(ValueError):
    """A defining or extra relation does not evaluate to the identity."""


class NotTransitive(ValueError):
    """The action of rho and sigma does not connect all flag indices."""


@dataclass(frozen=True)
class GroupElement:
    """A group element represented by its permutation of flag indices."""

    perm: Tuple[int, ...]

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        # (self * other) acts as: apply self first, then other. With the
        # right-multiplication convention used throughout, the permutation of
        # a word w maps g -> g*w, so composition reads left to right.
        p, q = self.perm, other.perm
        return GroupElement(tuple(q[p[i]] for i in range(len(p))))

    def inverse(self) -> "GroupElement":
        inv = [0] * len(self.perm)
        for i, j in enumerate(self.perm):
            inv[j] = i
        return GroupElement(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.perm))

    def __call__(self, i: int) -> int:
        return self.perm[i]

    def order(self) -> int:
        n = 1
        acc = self
        while not acc.is_identity():
            acc = acc * self
            n += 1
        return n


def _identity(n: int) -> GroupElement:
    return GroupElement(tuple(range(n)))


@dataclass(frozen=True)
class TessellationGroup:
    """Finite quotient of the {r,s} rotation group as a permutation action."""

    r: int
    s: int
    rho: GroupElement
    sigma: GroupElement
    order: int
    extra_relations: Tuple[Word, ...] = field(default_factory=tuple)

    def evaluate(self, word: Iterable[int]) -> GroupElement:
        gens = {
            RHO: self.rho,
            -RHO: self.rho.inverse(),
            SIGMA: self.sigma,
            -SIGMA: self.sigma.inverse(),
        }
        acc = _identity(self.order)
        for letter in word:
            acc = acc * gens[letter]
        return acc

    def defining_relations(self) -> List[Word]:
        return [
            tuple([RHO, SIGMA] * 2),
            tuple([RHO] * self.r),
            tuple([SIGMA] * self.s),
        ]

    def all_relations(self) -> List[Word]:
        return self.defining_relations() + list(self.extra_relations)


def group_from_permutations(
    r: int,
    s: int,
    rho_perm: Sequence[int],
    sigma_perm: Sequence[int],
    extra_relations: Iterable[Iterable[int]] = (),
) -> TessellationGroup:
    """Validate a permutation pair as an {r,s} rotation-group quotient.

    Checks the three defining relations, every extra relation, and
    transitivity of the generated action.
    """
    if len(rho_perm) != len(sigma_perm) or len(rho_perm) < 1:
        raise ValueError("rho and sigma must act on the same non-empty domain")
    n = len(rho_perm)
    rho = GroupElement(tuple(rho_perm))
    sigma = GroupElement(tuple(sigma_perm))
    if sorted(rho.perm) != list(range(n)) or sorted(sigma.perm) != list(range(n)):
        raise ValueError("generators must be permutations")
    g = TessellationGroup(
        r=r,
        s=s,
        rho=rho,
        sigma=sigma,
        order=n,
        extra_relations=tuple(tuple(w) for w in extra_relations),
    )
    for word in g.all_relations():
        if not g.evaluate(word).is_identity():
            raise RelationViolation(f"relation {word} does not evaluate to identity")
    # Transitivity: flood fill from index 0.
    seen = {0}
    stack = [0]
    moves = (rho.perm, sigma.perm)
    while stack:
        i = stack.pop()
        for mv in moves:
            j = mv[i]
            if j not in seen:
                seen.add(j)
                stack.append(j)
    if len(seen) != n:
        raise NotTransitive(f"action reaches {len(seen)} of {n} indices")
    return g


def _word_kills(word: Word, modulus: int) -> bool:
    """Does the homomorphism rho, sigma -> 1 into Z_modulus kill this word?"""
    return sum(1 if letter > 0 else -1 for letter in word) % modulus == 0


def check_colourable(g: TessellationGroup, reflection_data=None) -> bool:
    """True iff f(rho)=f(sigma)=1 into Z_2 kills every relation.

    `reflection_data` may supply extra relation words of the full reflection
    group to include in the check; the rotation-group relations alone decide
    colourability for the quotients used here.
    """
    words = g.all_relations()
    if reflection_data is not None:
        words = words + [tuple(w) for w in reflection_data]
    return all(_word_kills(w, 2) for w in words)


def check_schedulable(g: TessellationGroup) -> bool:
    """True iff h(rho)=h(sigma)=1 into Z_4 kills every relation."""
    return all(_word_kills(w, 4) for w in g.all_relations())


@dataclass(frozen=True, order=True)
class HomomorphismSolution:
    """Images (x, y) of (rho, sigma) under a homomorphism into Z_n."""

    n: int
    x: int
    y: int

    def satisfies_constraints(self, r: int, s: int) -> bool:
        n, x, y = self.n, self.x, self.y
        return (
            r * x % n == 0
            and s * y % n == 0
            and 2 * (x + y) % n == 0
            and (x + y) % n != 0
        )


def solve_cyclic_scheduling(r: int, s: int, n_max: int) -> List[HomomorphismSolution]:
    """All homomorphisms of the {r,s} rotation group into Z_n, 2 <= n <= n_max,

    that send the (rho*sigma)^2 relation to zero while keeping rho*sigma
    itself non-trivial (the condition for a usable corner labelling). The
    trivial x=y=0 map is excluded. Returns solutions sorted by (n, x, y).
    """
    if r < 3 or s < 3:
        raise ValueError("need r, s >= 3")
    if n_max < 2:
        raise ValueError("need n_max >= 2")
    out = []
    for n in range(2, n_max + 1):
        for x in range(n):
            if r * x % n != 0:
                continue
            for y in range(n):
                if x == 0 and y == 0:
                    continue
                if s * y % n != 0:
                    continue
                if 2 * (x + y) % n != 0 or (x + y) % n == 0:
                    continue
                out.append(HomomorphismSolution(n, x, y))
    return sorted(out)


def toric_group(L: int) -> TessellationGroup:
    """Rotation group of the L x L {4,4} torus, order 4L^2.

    Elements are the orientation-preserving isometries v -> R^k v + t of the
    doubled integer torus (Z_{2L})^2, with R a 90-degree rotation and t in the
    even sublattice. rho rotates about a face centre, sigma about a vertex.
    """
    if L < 2:
        raise ValueError("need L >= 2")
    M = 2 * L

    def rot(v):
        return (-v[1] % M, v[0])

    # Element = (k, tx, ty): v -> R^k v + t, with t even.
    elems = []
    index = {}
    for k in range(4):
        for tx in range(0, M, 2):
            for ty in range(0, M, 2):
                index[(k, tx, ty)] = len(elems)
                elems.append((k, tx, ty))

    def compose(a, b):
        # Apply a then b: v -> R^kb (R^ka v + ta) + tb.
        ka, ta = a[0], (a[1], a[2])
        kb, tb = b[0], (b[1], b[2])
        t = ta
        for _ in range(kb):
            t = rot(t)
        return ((ka + kb) % 4, (t[0] + tb[0]) % M, (t[1] + tb[1]) % M)

    # rho: 90-degree rotation about the face centre (1,1) (doubled coords);
    # sigma: 90-degree rotation about the vertex (0,0).
    rho_el = (1, 2, 0)  # v -> Rv + (1,1) - R(1,1) = Rv + (2,0)
    sigma_el = (1, 0, 0)

    def right_mult_perm(w):
        return [index[compose(elems[i], w)] for i in range(len(elems))]

    # Extra relations closing the torus quotient: translations by one period.
    # (rho * sigma^-1) is the unit translation along one axis.
    extra = [
        tuple([RHO, -SIGMA] * L),
        tuple([-SIGMA, RHO] * L),
    ]
    return group_from_permutations(
        4, 4, right_mult_perm(rho_el), right_mult_perm(sigma_el), extra
    )


def save_group(g: TessellationGroup, path) -> None:
    """Write a group data file (JSON) with a bit-exact round trip."""
    payload = {
        "r": g.r,
        "s": g.s,
        "order": g.order,
        "rho": list(g.rho.perm),
        "sigma": list(g.sigma.perm),
        "extra_relations": [list(w) for w in g.extra_relations],
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_group(path) -> TessellationGroup:
    payload = json.loads(Path(path).read_text())
    return group_from_permutations(
        payload["r"],
        payload["s"],
        payload["rho"],
        payload["sigma"],
        [tuple(w) for w in payload.get("extra_relations", [])],
    )


def bundled_group_path(name: str) -> Path:
    """Path of a group data file shipped with the package."""
    return Path(__file__).parent / "data" / f"{name}.json"
