#!/usr/bin/env python3
"""Generate the bundled tessellation-group data files.

Runs Todd-Coxeter coset enumeration on {r,s} rotation-group presentations
with candidate extra relators, keeps quotients that act freely (generator
orders exactly r, s and 2 for rho, sigma, rho*sigma) and writes the regular
permutation representation to src/gaugefix/data/.

This is a one-off generation tool; the library itself only loads and
validates the emitted data files.
"""

from __future__ import annotations

import sys
from itertools import product
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gaugefix.symmetry import (  # noqa: E402
    RHO,
    SIGMA,
    check_colourable,
    check_schedulable,
    group_from_permutations,
    save_group,
)


class Incomplete(Exception):
    pass


def coset_enumeration(ngens, relators, max_cosets=100000):
    """HLT Todd-Coxeter for the trivial subgroup.

    Letters: 2*i is generator i, 2*i+1 its inverse. Relators are words of
    letters. Returns the coset table rows (one list of letter images per
    coset), i.e. the regular permutation representation.
    """
    nlet = 2 * ngens
    table = [[None] * nlet]
    # Union-find over cosets for coincidence handling.
    rep = [0]

    def find(a):
        while rep[a] != a:
            rep[a] = rep[rep[a]]
            a = rep[a]
        return a

    def define(a, x):
        if len(table) >= max_cosets:
            raise Incomplete(f"exceeded {max_cosets} cosets")
        b = len(table)
        table.append([None] * nlet)
        rep.append(b)
        table[a][x] = b
        table[b][x ^ 1] = a
        return b

    def merge(a, b, queue):
        a, b = find(a), find(b)
        if a == b:
            return
        if a > b:
            a, b = b, a
        rep[b] = a
        queue.append(b)

    def process_coincidences(queue):
        while queue:
            b = queue.pop()
            a = find(b)
            for x in range(nlet):
                c = table[b][x]
                if c is None:
                    continue
                table[b][x] = None
                c = find(c)
                # b.x = c implies a.x = c and c.x^-1 = a.
                d = table[a][x]
                if d is None:
                    table[a][x] = c
                    e = table[c][x ^ 1]
                    if e is None:
                        table[c][x ^ 1] = a
                    else:
                        merge(find(e), a, queue)
                else:
                    merge(find(d), c, queue)
                e = table[c][x ^ 1]
                if e is None:
                    table[c][x ^ 1] = a
                else:
                    merge(find(e), a, queue)

    def scan_and_fill(a, word):
        # Scan relator `word` from coset a, filling gaps (HLT style).
        f, i = a, 0
        b, j = a, len(word) - 1
        while True:
            # Scan forward as far as possible.
            while i <= j and table[f][word[i]] is not None:
                f = find(table[f][word[i]])
                i += 1
            if i > j:
                if f != b:
                    queue = []
                    merge(f, b, queue)
                    process_coincidences(queue)
                return
            # Scan backward.
            while j >= i and table[b][word[j] ^ 1] is not None:
                b = find(table[b][word[j] ^ 1])
                j -= 1
            if j < i:
                queue = []
                merge(f, b, queue)
                process_coincidences(queue)
                return
            if j == i:
                # Deduction: f.word[i] = b.
                queue = []
                x = word[i]
                if table[f][x] is None and table[b][x ^ 1] is None:
                    table[f][x] = b
                    table[b][x ^ 1] = f
                else:
                    c = table[f][x]
                    if c is not None:
                        merge(find(c), b, queue)
                    c = table[b][x ^ 1]
                    if c is not None:
                        merge(find(c), f, queue)
                    process_coincidences(queue)
                return
            # Gap of length > 1: define a new coset and keep scanning.
            define(f, word[i])

    a = 0
    while a < len(table):
        if find(a) != a:
            a += 1
            continue
        for word in relators:
            if find(a) != a:
                break
            scan_and_fill(a, word)
        if find(a) != a:
            a += 1
            continue
        for x in range(nlet):
            if find(a) != a:
                break
            if table[a][x] is None:
                define(a, x)
        a += 1

    # Compact live cosets.
    live = [c for c in range(len(table)) if find(c) == c]
    newid = {c: i for i, c in enumerate(live)}
    rows = []
    for c in live:
        row = []
        for x in range(nlet):
            img = table[c][x]
            if img is None:
                raise Incomplete("incomplete table after enumeration")
            row.append(newid[find(img)])
        rows.append(row)
    return rows


def word_to_letters(word):
    """Signed-generator word -> letter word (RHO=1 -> letters 0/1, SIGMA=2 -> 2/3)."""
    out = []
    for g in word:
        base = 2 * (abs(g) - 1)
        out.append(base if g > 0 else base + 1)
    return out


def presentation(r, s, extras):
    rels = [
        word_to_letters([RHO, SIGMA] * 2),
        word_to_letters([RHO] * r),
        word_to_letters([SIGMA] * s),
    ] + [word_to_letters(w) for w in extras]
    return rels


def try_quotient(r, s, extras, max_cosets=60000):
    rows = coset_enumeration(2, presentation(r, s, extras), max_cosets)
    n = len(rows)
    rho = [rows[c][0] for c in range(n)]
    sigma = [rows[c][2] for c in range(n)]
    g = group_from_permutations(r, s, rho, sigma, [tuple(w) for w in extras])
    return g


def elem_order(g, word):
    return g.evaluate(word).order()


def torsion_free(g):
    """The quotient acts freely iff rho, sigma, rho*sigma keep full order."""
    return (
        elem_order(g, (RHO,)) == g.r
        and elem_order(g, (SIGMA,)) == g.s
        and elem_order(g, (RHO, SIGMA)) == 2
    )


def describe(g):
    E = g.order // 2
    n = 3 * E // 2
    k = E // 2 - 2 * E // g.r + 2
    return f"order={g.order} |E|={E} n={n} k={k} col={check_colourable(g)} sch={check_schedulable(g)}"


def candidate_extras(max_len=3, max_pow=8):
    """Single extra relators built from short bracket patterns."""
    pats = [
        [RHO, -SIGMA],
        [-SIGMA, RHO],
        [RHO, RHO, -SIGMA, -SIGMA],
        [RHO, -SIGMA, RHO, -SIGMA, -SIGMA],
        [RHO, -SIGMA, -SIGMA],
        [RHO, RHO, -SIGMA],
        [RHO, SIGMA, RHO, -SIGMA],
        [RHO, -SIGMA, RHO, SIGMA],
        [RHO, RHO, SIGMA, SIGMA],
        [RHO, -SIGMA, -RHO, SIGMA],
    ]
    for pat, m in product(pats, range(2, max_pow + 1)):
        yield tuple(pat * m)


def search(r, s, want_order=None, want_sched=None, max_cosets=60000, verbose=True):
    hits = []
    for extra in candidate_extras():
        try:
            g = try_quotient(r, s, [extra], max_cosets)
        except Incomplete:
            continue
        except Exception:
            continue
        if not torsion_free(g):
            continue
        if want_order is not None and g.order != want_order:
            if verbose:
                print(f"  ({r},{s}) extra={extra}: {describe(g)}")
            continue
        if want_sched is not None and check_schedulable(g) != want_sched:
            continue
        hits.append((extra, g))
        if verbose:
            print(f"HIT ({r},{s}) extra={extra}: {describe(g)}")
    return hits


def _compose(p, q):
    """Permutation composition: apply p, then q."""
    return tuple(q[x] for x in p)


def _perm_inverse(p):
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def _word_inverse(w):
    return tuple(-x for x in reversed(w))


def bfs_words(g):
    """Shortest generator word reaching each point of the regular action."""
    from collections import deque

    gens = [
        (RHO, g.rho.perm),
        (-RHO, _perm_inverse(g.rho.perm)),
        (SIGMA, g.sigma.perm),
        (-SIGMA, _perm_inverse(g.sigma.perm)),
    ]
    words = {0: ()}
    q = deque([0])
    while q:
        c = q.popleft()
        for letter, perm in gens:
            d = perm[c]
            if d not in words:
                words[d] = words[c] + (letter,)
                q.append(d)
    return words


def build_8_4_512(verbose=True):
    """Order-512 torsion-free schedulable {8,4} quotients.

    Start from the order-32 quotient by (rho sigma^-1)^2, whose kernel M is a
    genus-3 surface group. Quotient M by squares and commutators to get an
    order-2048 quotient with M/M'M^2 = F_2^6 inside it, then factor out each
    conjugation-invariant 2-dimensional subspace. Every resulting group has
    order 512, acts freely, and is colourable and schedulable (the grading
    vanishes on M). Yields (group, declared_extra_relators).
    """
    t = (RHO, -SIGMA, RHO, -SIGMA)
    g32 = try_quotient(8, 4, [t], 10000)
    assert g32.order == 32 and torsion_free(g32), describe(g32)
    words32 = bfs_words(g32)
    extras = [t + t]
    for c in range(32):
        w = words32[c]
        tw = _word_inverse(w) + t + w
        extras.append(_word_inverse(t) + _word_inverse(tw) + t + tw)
    g2048 = try_quotient(8, 4, extras, 400000)
    assert g2048.order == 2048 and torsion_free(g2048), describe(g2048)
    words2048 = bfs_words(g2048)
    ident = tuple(range(2048))
    p_rho, p_sig = g2048.rho.perm, g2048.sigma.perm
    # The homology subgroup A: closure of the conjugates of t.
    t_img = g2048.evaluate(t).perm
    conjs = []
    for c in range(32):
        w = words32[c]
        pw = g2048.evaluate(w).perm
        pwi = _perm_inverse(pw)
        conjs.append(_compose(_compose(pwi, t_img), pw))
    A = {ident}
    frontier = list(conjs)
    while frontier:
        e = frontier.pop()
        if e in A:
            continue
        new = [_compose(e, a) for a in A] + [e]
        for x in new:
            if x not in A:
                A.add(x)
                frontier.append(x)
    assert len(A) == 64, len(A)

    def conj(e, p):
        return _compose(_compose(_perm_inverse(p), e), p)

    elems = sorted(A)
    invariant = []
    nz = [e for e in elems if e != ident]
    for i, a in enumerate(nz):
        for b in nz[i + 1 :]:
            ab = _compose(a, b)
            W = {ident, a, b, ab}
            if all(conj(x, p) in W for x in (a, b) for p in (p_rho, p_sig)):
                invariant.append((a, b, ab))
    if verbose:
        print(f"  invariant 2-dim subspaces: {len(invariant)}")
    for a, b, ab in invariant:
        # Quotient of the regular action by the central subgroup W.
        parent = list(range(2048))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in (a, b):
            for c in range(2048):
                ra, rb = find(c), find(e[c])
                if ra != rb:
                    parent[ra] = rb
        classes = {}
        for c in range(2048):
            r = find(c)
            if r not in classes:
                classes[r] = len(classes)
        cls = [classes[find(c)] for c in range(2048)]
        n = len(classes)
        assert n == 512, n
        rho_q = [0] * n
        sig_q = [0] * n
        for c in range(2048):
            rho_q[cls[c]] = cls[p_rho[c]]
            sig_q[cls[c]] = cls[p_sig[c]]
        rel_a = words2048[a[0]]
        rel_b = words2048[b[0]]
        all_extras = [tuple(w) for w in extras] + [rel_a, rel_b]
        try:
            g = group_from_permutations(8, 4, tuple(rho_q), tuple(sig_q), all_extras)
        except Exception as exc:
            if verbose:
                print(f"  rejected subspace: {exc}")
            continue
        if not torsion_free(g):
            continue
        yield g


def main():
    out_dir = Path(__file__).resolve().parent.parent / "src" / "gaugefix" / "data"
    out_dir.mkdir(parents=True, exist_ok=True)

    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
    from gaugefix.tessellation import from_group
    from gaugefix.code import build_subsystem_code, compute_distance

    print("building {8,4} order-512 quotients via the homology cover ...")
    for g in build_8_4_512():
        code = build_subsystem_code(from_group(g))
        d = compute_distance(code, "both")
        print(f"  candidate: {describe(g)} -> [[{code.n},{code.k},{d}]]")
        if (code.n, code.k, d) == (384, 66, 4):
            save_group(g, out_dir / "hyperbolic_8_4_512.json")
            print("wrote hyperbolic_8_4_512.json")
            break

    print("searching {6,4} colourable quotient (small) ...")
    best = None
    for extra in candidate_extras(max_pow=6):
        try:
            g = try_quotient(6, 4, [extra], 20000)
        except Exception:
            continue
        if not torsion_free(g) or not check_colourable(g):
            continue
        if check_schedulable(g):
            continue  # want the colourable-only example
        if g.order < 48:
            continue
        if best is None or g.order < best[1].order:
            best = (extra, g)
    if best:
        extra, g = best
        save_group(g, out_dir / "hyperbolic_6_4.json")
        print(f"wrote hyperbolic_6_4.json  extra={extra}: {describe(g)}")


if __name__ == "__main__":
    main()
