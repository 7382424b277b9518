"""Circuit-level Pauli noise: models, fault enumeration, and sampling.

Every noisy location in a circuit is compiled once, by a backward pass over
the gate list, into a *signature*: the set of measurement bits the fault
flips plus the residual Pauli left on the data qubits at the end of the
circuit. Faults are independent mechanisms with mutually exclusive,
uniformly likely alternatives (e.g. the 15 two-qubit Paulis of a
depolarising CNOT). Monte Carlo sampling then reduces to drawing one
uniform number per mechanism and XOR-ing the signatures of the fired
alternatives, which is exact for Pauli noise on stabilizer circuits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .circuits import Circuit

__all__ = [
    "NoiseModel",
    "depolarising",
    "independent",
    "total_error_rate",
    "MeasurementRecord",
    "FaultRecord",
    "CompiledNoise",
    "compile_noise",
    "sample_run",
    "enumerate_single_faults",
]


@dataclass(frozen=True)
class NoiseModel:
    kind: str  # "depolarising" or "independent"
    p: float = 0.0
    eta: float = 1.0

    @property
    def p_z(self) -> float:
        if self.kind == "depolarising":
            raise ValueError("p_z is defined for the independent model")
        if math.isinf(self.eta):
            return self.p
        return self.p * self.eta / (self.eta + 1.0)

    @property
    def p_x(self) -> float:
        if self.kind == "depolarising":
            raise ValueError("p_x is defined for the independent model")
        if math.isinf(self.eta):
            return 0.0
        return self.p / (self.eta + 1.0)


def depolarising(p: float) -> NoiseModel:
    return NoiseModel("depolarising", p)


def independent(p0: float, eta: float = 1.0) -> NoiseModel:
    return NoiseModel("independent", p0, eta)


def total_error_rate(p0: float, eta: float) -> float:
    """Probability that a location suffers any error under independent noise."""
    m = independent(p0, eta)
    return 1.0 - (1.0 - m.p_x) * (1.0 - m.p_z)


@dataclass(frozen=True)
class MeasurementRecord:
    bits: int  # bit i = outcome flip of measurement slot i
    n: int
    seed: object = None

    def bit(self, slot: int) -> int:
        return (self.bits >> slot) & 1


@dataclass(frozen=True)
class FaultRecord:
    mechanism: int
    gate_index: int
    kind: str  # CNOT, PREP_*, MEAS_*, IDLE
    owner_basis: Optional[str]  # basis of the check the gate belongs to
    time: int
    qubits: Tuple[int, ...]
    pauli: str  # e.g. "XI", "ZZ", "X", "flip"
    probability: float
    meas_mask: int
    residual_x: int
    residual_z: int


class _Mechanism:
    __slots__ = ("prob", "sigs", "records")

    def __init__(self, prob: float, sigs: List[int], records: List[FaultRecord]):
        self.prob = prob
        self.sigs = sigs
        self.records = records


class CompiledNoise:
    """Per-location fault table for one (circuit, noise model) pair."""

    def __init__(self, circuit: Circuit, noise: NoiseModel):
        self.circuit = circuit
        self.noise = noise
        self.n_meas = len(circuit.measurements)
        self.n_data = circuit.n_data
        self._compile()

    # -- signature packing: bits [0, M) measurement flips, then residual X,
    # then residual Z on the data qubits.
    def unpack(self, sig: int) -> Tuple[int, int, int]:
        M, n = self.n_meas, self.n_data
        meas = sig & ((1 << M) - 1)
        rx = (sig >> M) & ((1 << n) - 1)
        rz = sig >> (M + n)
        return meas, rx, rz

    def _compile(self) -> None:
        circuit, noise = self.circuit, self.noise
        M, n = self.n_meas, circuit.n_data
        nq = circuit.n_qubits
        slot_at = {(m.ancilla, m.time): i for i, m in enumerate(circuit.measurements)}
        owner: Dict[int, str] = {}  # ancilla -> basis (constant per ancilla)
        for m in circuit.measurements:
            owner[m.ancilla] = m.basis

        sig_x = [0] * nq
        sig_z = [0] * nq
        for q in range(n):
            sig_x[q] = 1 << (M + q)
            sig_z[q] = 1 << (M + n + q)

        # Error-basis signatures per gate, recorded walking backwards so each
        # entry describes a Pauli inserted immediately after its gate.
        basis_sigs: List[Tuple] = [None] * len(circuit.gates)
        for gi in range(len(circuit.gates) - 1, -1, -1):
            g = circuit.gates[gi]
            if g.kind == "CNOT":
                c, t = g.qubits
                basis_sigs[gi] = (sig_x[c], sig_z[c], sig_x[t], sig_z[t])
                sig_x[c] ^= sig_x[t]
                sig_z[t] ^= sig_z[c]
            elif g.kind in ("MEAS_Z", "MEAS_X"):
                a = g.qubits[0]
                slot = slot_at[(a, g.time)]
                basis_sigs[gi] = (1 << slot,)
                if g.kind == "MEAS_Z":
                    sig_x[a] ^= 1 << slot
                else:
                    sig_z[a] ^= 1 << slot
            elif g.kind in ("PREP_Z", "PREP_X"):
                a = g.qubits[0]
                flip = sig_x[a] if g.kind == "PREP_Z" else sig_z[a]
                basis_sigs[gi] = (flip,)
                sig_x[a] = 0
                sig_z[a] = 0
            else:  # IDLE
                q = g.qubits[0]
                basis_sigs[gi] = (sig_x[q], sig_z[q])

        mechanisms: List[_Mechanism] = []

        def rec(gi, g, pauli, prob, sig):
            meas, rx, rz = self.unpack(sig)
            ob = owner.get(g.qubits[-1]) if g.kind != "IDLE" else None
            if g.kind == "CNOT":
                ob = owner.get(g.qubits[0]) or owner.get(g.qubits[1])
            mech = len(mechanisms)
            return FaultRecord(mech, gi, g.kind, ob, g.time, g.qubits, pauli, prob, meas, rx, rz)

        two_qubit_paulis = [
            (xc, zc, xt, zt)
            for xc in (0, 1)
            for zc in (0, 1)
            for xt in (0, 1)
            for zt in (0, 1)
            if xc | zc | xt | zt
        ]

        def pauli_name(x, z):
            return {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(x, z)]

        for gi, g in enumerate(circuit.gates):
            bs = basis_sigs[gi]
            if g.kind == "CNOT":
                bxc, bzc, bxt, bzt = bs
                if noise.kind == "depolarising":
                    sigs, recs = [], []
                    for xc, zc, xt, zt in two_qubit_paulis:
                        sig = (xc * bxc) ^ (zc * bzc) ^ (xt * bxt) ^ (zt * bzt)
                        name = pauli_name(xc, zc) + pauli_name(xt, zt)
                        sigs.append(sig)
                        recs.append(rec(gi, g, name, noise.p / 15.0, sig))
                    mechanisms.append(_Mechanism(noise.p, sigs, recs))
                else:
                    for side, pp in (("Z", noise.p_z), ("X", noise.p_x)):
                        bc, bt = (bzc, bzt) if side == "Z" else (bxc, bxt)
                        combos = [(bc, side + "I"), (bt, "I" + side), (bc ^ bt, side + side)]
                        sigs = [c[0] for c in combos]
                        recs = [rec(gi, g, c[1], pp / 3.0, c[0]) for c in combos]
                        mechanisms.append(_Mechanism(pp, sigs, recs))
            elif g.kind in ("PREP_Z", "PREP_X", "MEAS_Z", "MEAS_X"):
                (sig,) = bs
                if noise.kind == "depolarising":
                    pp = 2.0 * noise.p / 3.0
                else:
                    # An orthogonal prepared/measured state: Z-basis ancillas
                    # are flipped by X-side noise and vice versa.
                    pp = noise.p_x if g.kind.endswith("Z") else noise.p_z
                mechanisms.append(_Mechanism(pp, [sig], [rec(gi, g, "flip", pp, sig)]))
            else:  # IDLE
                bx, bz = bs
                if noise.kind == "depolarising":
                    combos = [(bx, "X"), (bz, "Z"), (bx ^ bz, "Y")]
                    sigs = [c[0] for c in combos]
                    recs = [rec(gi, g, c[1], noise.p / 3.0, c[0]) for c in combos]
                    mechanisms.append(_Mechanism(noise.p, sigs, recs))
                else:
                    for sig, name, pp in ((bz, "Z", noise.p_z), (bx, "X", noise.p_x)):
                        mechanisms.append(_Mechanism(pp, [sig], [rec(gi, g, name, pp, sig)]))

        self.mechanisms = mechanisms
        self._probs = np.array([m.prob for m in mechanisms])
        self._nalts = np.array([len(m.sigs) for m in mechanisms])

    def sample(self, rng: np.random.Generator) -> Tuple[MeasurementRecord, int, int]:
        u = rng.random(len(self.mechanisms))
        fired = np.nonzero(u < self._probs)[0]
        sig = 0
        for i in fired:
            m = self.mechanisms[i]
            alt = min(int(u[i] * len(m.sigs) / m.prob), len(m.sigs) - 1)
            sig ^= m.sigs[alt]
        meas, rx, rz = self.unpack(sig)
        return MeasurementRecord(meas, self.n_meas), rx, rz


def compile_noise(circuit: Circuit, noise: NoiseModel) -> CompiledNoise:
    cache = getattr(circuit, "_noise_cache", None)
    if cache is None:
        cache = {}
        circuit._noise_cache = cache
    key = (noise.kind, noise.p, noise.eta)
    if key not in cache:
        cache[key] = CompiledNoise(circuit, noise)
    return cache[key]


def sample_run(circuit: Circuit, noise: NoiseModel, seed) -> Tuple[MeasurementRecord, int, int]:
    """One Monte Carlo trial; deterministic for a given seed.

    Returns the measurement record and the residual data-qubit error
    (X mask, Z mask) left at the end of the circuit.
    """
    compiled = compile_noise(circuit, noise)
    rng = np.random.default_rng(seed)
    record, rx, rz = compiled.sample(rng)
    return MeasurementRecord(record.bits, record.n, seed), rx, rz


def enumerate_single_faults(circuit: Circuit, noise: NoiseModel) -> List[FaultRecord]:
    """Every possible single fault with its measurement and residual effect."""
    compiled = compile_noise(circuit, noise)
    out: List[FaultRecord] = []
    for m in compiled.mechanisms:
        out.extend(m.records)
    return out
