"""Time-stepped syndrome-extraction circuits for triangle-check codes.

Every triangle check is measured with one ancilla, three CNOTs, and a
prep/measure pair, following a single four-step template per corner label:

    label    prep  CNOT times (relative)          basis
    0        3     vertex@4, own edge@5, prev edge@6   Z (data controls)
    1        1     vertex@2, prev edge@3, own edge@4   X (ancilla controls)
    2        2     vertex@3, own edge@4, prev edge@5   Z
    3        0     vertex@1, prev edge@2, own edge@3   X
    measurement at prep + 4; measurement and the next prep share a step.

Because every vertex sees all four labels exactly once and every edge sees
all four (label, own/prev) roles exactly once, repeating the template with
period 4 touches each data qubit exactly once per step and never collides.
Schedule words are laid out from the same template:

  * a Z letter and an X letter that are both runs of length one share a
    base offset (the classic alternating schedule, period 4);
  * consecutive same-type letters are pipelined 2 steps apart using a
    second ancilla per triangle;
  * a type change between runs advances the base by 4 steps, which is the
    smallest gap that keeps both data-qubit usage and measurement order
    collision-free (a gap of 2 after a doubled Z run would put the next X
    CNOTs on the same edge qubits in the same steps).

Unparallelised schedules keep the strict alternating skeleton (one Z slot
and one X slot per 4-step window) and idle the data qubits wherever a
measurement is omitted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .code import SubsystemCode

__all__ = [
    "Gate",
    "Measurement",
    "Circuit",
    "NotSchedulable",
    "UnknownLabel",
    "InvalidAssignment",
    "ScheduleCollision",
    "homogeneous_circuit",
    "inhomogeneous_circuit",
    "fixability_timeline",
    "alternating_row_assignment",
]

# Prep step for each corner label; CNOTs fill prep+1 .. prep+3.
_PREP_STEP = {0: 3, 1: 1, 2: 2, 3: 0}

_KIND_ORDER = {"MEAS_Z": 0, "MEAS_X": 0, "PREP_Z": 1, "PREP_X": 1, "CNOT": 2, "IDLE": 3}


class NotSchedulable(ValueError):
    """The code carries no corner labels, so no circuit template applies."""


class UnknownLabel(ValueError):
    """A corner label falls outside the four-step template."""


class InvalidAssignment(ValueError):
    """An inhomogeneous schedule assignment does not cover the faces."""


class ScheduleCollision(RuntimeError):
    """Internal consistency failure: one qubit scheduled twice in a step."""


@dataclass(frozen=True)
class Gate:
    kind: str  # CNOT, PREP_X, PREP_Z, MEAS_X, MEAS_Z, IDLE
    time: int
    qubits: Tuple[int, ...]  # CNOT: (control, target); otherwise (qubit,)


@dataclass(frozen=True)
class Measurement:
    gauge_id: int
    rep: int
    basis: str  # "z" or "x"
    time: int
    ancilla: int
    prep_time: int
    cnot_times: Tuple[Tuple[int, int], ...]  # (data qubit, step)


@dataclass
class Circuit:
    gates: List[Gate]
    n_data: int
    n_ancilla: int
    measurements: List[Measurement]
    measurement_index: Dict[Tuple[int, int], int]
    schedule_descriptor: str
    duration: int
    period: int
    code: SubsystemCode = field(repr=False)

    @property
    def n_qubits(self) -> int:
        return self.n_data + self.n_ancilla

    def dump(self) -> str:
        lines = [
            "# circuit %s data=%d ancilla=%d steps=%d"
            % (self.schedule_descriptor, self.n_data, self.n_ancilla, self.duration)
        ]
        for g in self.gates:
            lines.append("%d %s %s" % (g.time, g.kind, " ".join(map(str, g.qubits))))
        return "\n".join(lines) + "\n"


def _letters(word: str, rounds: int) -> str:
    word = word.upper()
    if not word or any(ch not in "ZX" for ch in word):
        raise NotSchedulable("schedule word must be a non-empty string over {Z, X}")
    if rounds < 1:
        raise NotSchedulable("need at least one round")
    return word * rounds


def _run_lengths(letters: str) -> List[int]:
    """For each position, the length of the maximal same-letter run at it."""
    out = [0] * len(letters)
    i = 0
    while i < len(letters):
        j = i
        while j < len(letters) and letters[j] == letters[i]:
            j += 1
        for k in range(i, j):
            out[k] = j - i
        i = j
    return out


def _parallel_offsets(letters: str) -> List[int]:
    """Base offset per letter for the fully parallelised layout."""
    runs = _run_lengths(letters)
    offsets = [0] * len(letters)
    cowindowed = [False] * len(letters)
    for i in range(1, len(letters)):
        if letters[i] != letters[i - 1]:
            if runs[i] == 1 and runs[i - 1] == 1 and not cowindowed[i - 1]:
                offsets[i] = offsets[i - 1]
                cowindowed[i] = True
            else:
                offsets[i] = offsets[i - 1] + 4
        else:
            offsets[i] = offsets[i - 1] + 2
    return offsets


def _skeleton_offsets(letters: str) -> List[int]:
    """Base offset per letter on the strict alternating (window) skeleton.

    A window may hold one Z and one X. A pair may share a window when the
    earlier letter is X (its measurement also completes first), or when a
    lone Z between X runs swaps places with the X that follows it; both
    keep the number of intervening anti-commuting rounds the same for
    every check.
    """
    runs = _run_lengths(letters)
    window = [0] * len(letters)
    cowindowed = [False] * len(letters)
    for i in range(1, len(letters)):
        share = (
            letters[i] != letters[i - 1]
            and not cowindowed[i - 1]
            and (letters[i - 1] == "X" or runs[i - 1] == 1)
        )
        if share:
            window[i] = window[i - 1]
            cowindowed[i] = True
        else:
            window[i] = window[i - 1] + 1
    return [4 * w for w in window]


def _triangle_qubits(code: SubsystemCode, gauge_id: int):
    """(vertex qubit, own-edge qubit, prev-edge qubit or None) for a corner."""
    t = code.tessellation
    c = code.gauge_ops[gauge_id].corner
    vq = code.vertex_qubit(t.vertex_of[c])
    own = code.edge_qubit(t.edge_of[c])
    prev = t.rho_inv[c]
    pe = None
    if prev >= 0 and t.edge_of[prev] != t.edge_of[c]:
        pe = code.edge_qubit(t.edge_of[prev])
    return vq, own, pe


def _template(code: SubsystemCode, gauge_id: int, base: int):
    """(prep time, [(data qubit, step)], meas time, basis) at a base offset."""
    go = code.gauge_ops[gauge_id]
    label = go.label
    if label is None:
        raise NotSchedulable("code has no corner labels")
    if label not in _PREP_STEP or go.colour != label % 2:
        raise UnknownLabel("corner label %r does not fit the template" % (label,))
    p = base + _PREP_STEP[label]
    vq, own, pe = _triangle_qubits(code, gauge_id)
    if go.colour == 0:  # Z: vertex, own edge, prev edge
        cnots = [(vq, p + 1), (own, p + 2)]
        if pe is not None:
            cnots.append((pe, p + 3))
        basis = "z"
    else:  # X: vertex, prev edge, own edge
        cnots = [(vq, p + 1)]
        if pe is not None:
            cnots.append((pe, p + 2))
        cnots.append((own, p + 3))
        basis = "x"
    return p, cnots, p + 4, basis


def _assemble(
    code: SubsystemCode,
    plan: Sequence[Tuple[int, int]],
    descriptor: str,
    period: int,
    insert_idles: bool,
) -> Circuit:
    """Build a circuit from (gauge id, base offset) measurement requests."""
    if code.tessellation is None:
        raise NotSchedulable("code carries no tessellation")
    per_gauge: Dict[int, List[int]] = {}
    for gid, base in plan:
        per_gauge.setdefault(gid, []).append(base)

    # Allocate ancilla copies: a copy is reusable once its measurement step
    # has arrived (measurement and the next prep share a step).
    raw: List[Tuple[int, int, int, List[Tuple[int, int]], int, str]] = []
    copy_count: Dict[int, int] = {}
    copy_qubit: Dict[Tuple[int, int], int] = {}
    next_ancilla = code.n
    for gid in sorted(per_gauge):
        free_at: List[int] = []
        for base in sorted(per_gauge[gid]):
            prep, cnots, meas, basis = _template(code, gid, base)
            for ci in range(len(free_at)):
                if free_at[ci] <= prep:
                    break
            else:
                ci = len(free_at)
                free_at.append(-1)
                copy_qubit[(gid, ci)] = next_ancilla
                next_ancilla += 1
            free_at[ci] = meas
            raw.append((gid, prep, meas, cnots, copy_qubit[(gid, ci)], basis))
        copy_count[gid] = len(free_at)
    n_ancilla = next_ancilla - code.n

    gates: List[Gate] = []
    measurements: List[Measurement] = []
    for gid, prep, meas, cnots, anc, basis in raw:
        pk, mk = ("PREP_Z", "MEAS_Z") if basis == "z" else ("PREP_X", "MEAS_X")
        gates.append(Gate(pk, prep, (anc,)))
        for dq, step in cnots:
            pair = (dq, anc) if basis == "z" else (anc, dq)
            gates.append(Gate("CNOT", step, pair))
        gates.append(Gate(mk, meas, (anc,)))
        measurements.append(
            Measurement(gid, -1, basis, meas, anc, prep, tuple(cnots))
        )

    duration = max(g.time for g in gates) + 1
    if insert_idles:
        busy = set()
        for g in gates:
            for q in g.qubits:
                if q < code.n:
                    busy.add((g.time, q))
        for t in range(duration):
            for q in range(code.n):
                if (t, q) not in busy:
                    gates.append(Gate("IDLE", t, (q,)))

    gates.sort(key=lambda g: (g.time, _KIND_ORDER[g.kind], g.qubits))
    _check_collisions(gates)

    # Repetition indices and global slots follow physical measurement time.
    measurements.sort(key=lambda m: (m.time, m.ancilla))
    reps: Dict[int, int] = {}
    index: Dict[Tuple[int, int], int] = {}
    final: List[Measurement] = []
    for slot, m in enumerate(measurements):
        rep = reps.get(m.gauge_id, 0)
        reps[m.gauge_id] = rep + 1
        m = Measurement(m.gauge_id, rep, m.basis, m.time, m.ancilla, m.prep_time, m.cnot_times)
        index[(m.gauge_id, rep)] = slot
        final.append(m)

    return Circuit(
        gates=gates,
        n_data=code.n,
        n_ancilla=n_ancilla,
        measurements=final,
        measurement_index=index,
        schedule_descriptor=descriptor,
        duration=duration,
        period=period,
        code=code,
    )


def _check_collisions(gates: Sequence[Gate]) -> None:
    seen: Dict[Tuple[int, int], str] = {}
    for g in gates:
        for q in g.qubits:
            prior = seen.get((g.time, q))
            if prior is None:
                seen[(g.time, q)] = g.kind
            elif prior.startswith("MEAS") and g.kind.startswith("PREP"):
                seen[(g.time, q)] = g.kind  # shared measure/prepare step
            else:
                raise ScheduleCollision(
                    "qubit %d double-booked at step %d (%s, %s)" % (q, g.time, prior, g.kind)
                )


def homogeneous_circuit(
    code: SubsystemCode, word: str, rounds: int, parallelised: bool = True
) -> Circuit:
    """Measure every triangle check following `word`, repeated `rounds` times."""
    letters = _letters(word, rounds)
    offsets = _parallel_offsets(letters) if parallelised else _skeleton_offsets(letters)
    by_colour = {
        0: [i for i, go in enumerate(code.gauge_ops) if go.colour == 0],
        1: [i for i, go in enumerate(code.gauge_ops) if go.colour == 1],
    }
    plan: List[Tuple[int, int]] = []
    for letter, base in zip(letters, offsets):
        for gid in by_colour[0 if letter == "Z" else 1]:
            plan.append((gid, base))
    # Advertised steady-state period: offset advance of one full word,
    # measured away from the startup transient.
    w = len(word)
    steady = _parallel_offsets(word.upper() * 3) if parallelised else _skeleton_offsets(word.upper() * 3)
    period = steady[2 * w] - steady[w]
    descriptor = "%s^%d%s" % (word.upper(), rounds, "" if parallelised else " unparallelised")
    return _assemble(code, plan, descriptor, period, insert_idles=not parallelised)


def inhomogeneous_circuit(
    code: SubsystemCode, assignment: Dict[int, str], rounds: int
) -> Circuit:
    """Per-face schedules: X checks every window, Z checks every 4th window.

    Faces assigned "L0" measure their Z checks in windows w = 0 (mod 4),
    faces assigned "L1" lag by two windows (four check measurement rounds),
    i.e. w = 2 (mod 4). Both are restrictions of the alternating skeleton,
    so the circuits stay compatible face to face.
    """
    if code.tessellation is None:
        raise NotSchedulable("code carries no tessellation")
    faces = set(range(len(code.tessellation.faces)))
    if set(assignment) != faces:
        raise InvalidAssignment("assignment must cover every face exactly")
    phase: Dict[int, int] = {}
    for f, sched in assignment.items():
        if sched not in ("L0", "L1"):
            raise InvalidAssignment("unknown schedule %r" % (sched,))
        phase[f] = 0 if sched == "L0" else 2
    plan: List[Tuple[int, int]] = []
    n_windows = 4 * rounds
    for w in range(n_windows):
        base = 4 * w
        for gid, go in enumerate(code.gauge_ops):
            if go.colour == 1:
                plan.append((gid, base))
            elif w % 4 == phase[go.face]:
                plan.append((gid, base))
    return _assemble(code, plan, "inhomogeneous", 16, insert_idles=True)


def alternating_row_assignment(code: SubsystemCode, L: int) -> Dict[int, str]:
    """Row-alternating L0/L1 assignment for the open-boundary L x L code.

    Bulk faces in grid row y get L0 for even y and L1 for odd y; the
    two-qubit remnant faces follow the bulk row they complete.
    """
    t = code.tessellation
    M = L
    idx = lambda x, y, k: (x % M) * 4 * M + (y % M) * 4 + k
    alive: List[int] = []
    for c in range(4 * M * M):
        x, y, k = c // (4 * M), (c // 4) % M, c % 4
        if x < L - 1 and y < L - 1:
            alive.append(c)
        elif y == M - 1 and x < L - 1 and k in (0, 2):
            alive.append(c)
        elif x == M - 1 and y < L - 1 and k in (1, 3):
            alive.append(c)
    newid = {c: i for i, c in enumerate(sorted(alive))}
    if len(newid) != t.n_corners:
        raise InvalidAssignment("code does not look like an open-boundary patch")
    assignment: Dict[int, str] = {}
    for c, i in newid.items():
        x, y, k = c // (4 * M), (c // 4) % M, c % 4
        if x < L - 1 and y < L - 1:
            row = y
        elif y == M - 1 and k == 2:
            row = L - 1  # remnant above the top boundary row
        elif y == M - 1 and k == 0:
            row = 1  # remnant below the bottom boundary continues the cycle
        else:
            row = y  # side remnants hold no Z checks; phase is irrelevant
        assignment[t.face_of[i]] = "L0" if row % 2 == 0 else "L1"
    return assignment


def fixability_timeline(circuit: Circuit) -> Dict[Tuple[int, int], bool]:
    """Mark each (gauge op, repetition) fixable or not.

    A repetition is fixable when no anti-commuting check touched the shared
    qubit between this measurement's CNOT on that qubit and the previous
    repetition's. First-ever measurements are never fixable.
    """
    code = circuit.code
    ops = code.gauge_ops
    # Anti-commuting neighbours and the qubits they share.
    shares: Dict[int, List[Tuple[int, int]]] = {i: [] for i in range(len(ops))}
    by_qubit: Dict[int, List[int]] = {}
    for i, go in enumerate(ops):
        mask = go.op.x | go.op.z
        q = 0
        while mask:
            if mask & 1:
                by_qubit.setdefault(q, []).append(i)
            mask >>= 1
            q += 1
    for q, members in by_qubit.items():
        for i in members:
            for j in members:
                if ops[i].colour == 0 and ops[j].colour == 1 and not ops[i].op.commutes(ops[j].op):
                    shares[i].append((j, q))
                    shares[j].append((i, q))

    # CNOT event times per (gauge, qubit).
    events: Dict[Tuple[int, int], List[int]] = {}
    prev_touch: Dict[Tuple[int, int], int] = {}
    for m in circuit.measurements:
        for dq, step in m.cnot_times:
            events.setdefault((m.gauge_id, dq), []).append(step)
    for times in events.values():
        times.sort()

    import bisect

    out: Dict[Tuple[int, int], bool] = {}
    last_cnot: Dict[Tuple[int, int], Dict[int, int]] = {}
    for m in circuit.measurements:
        key = (m.gauge_id, m.rep)
        touches = dict(m.cnot_times)
        prev = last_cnot.get((m.gauge_id,), None)
        if m.rep == 0 or prev is None:
            out[key] = False
        else:
            ok = True
            for h, q in shares[m.gauge_id]:
                lo = prev.get(q)
                hi = touches.get(q)
                if lo is None or hi is None:
                    continue
                times = events.get((h, q), [])
                i = bisect.bisect_right(times, lo)
                if i < len(times) and times[i] < hi:
                    ok = False
                    break
            out[key] = ok
        last_cnot[(m.gauge_id,)] = touches
    return out
