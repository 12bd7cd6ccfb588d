"""Statevector evolution and per-shot noisy sampling.

Noise model: after every ``Rzz(theta)`` a uniformly random non-identity
two-qubit Pauli is inserted with probability
``(przz_a * |theta| / pi + przz_b) * p2``; each reported bit is then flipped
with ``read_e01`` (true 0) or ``read_e10`` (true 1). Single-qubit gates are
ideal.

Randomness is counter based. A shot's uniforms depend only on the master
seed, the circuit label and the shot index, so any chunking of the shots
reproduces the same table.
"""

from __future__ import annotations

import itertools
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .circuits import Circuit, Params, apply_gate, measurement_circuit, run
from .pauli import SINGLE_QUBIT

# non-identity two-qubit Paulis, index 1..15 in IXYZ x IXYZ order
_TWO_QUBIT_PAULIS = [
    np.kron(SINGLE_QUBIT[a], SINGLE_QUBIT[b]) for a, b in itertools.product("IXYZ", repeat=2)
]


@dataclass(frozen=True)
class NoiseModel:
    p2: float
    przz_a: float
    przz_b: float
    read_e01: float = 1e-3
    read_e10: float = 4e-3

    def __post_init__(self):
        for name in ("p2", "read_e01", "read_e10"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")
        if self.przz_a < 0 or self.przz_b < 0:
            raise ValueError("przz_a and przz_b must be non-negative")
        if (self.przz_a + self.przz_b) * self.p2 > 1.0:
            raise ValueError("fault probability exceeds 1 at |theta| = pi")

    def fault(self, theta: float) -> float:
        """Fault probability of ``Rzz(theta)``; angle folded into ``[0, pi]``."""
        t = abs(math.remainder(theta, 2 * math.pi))
        return min(1.0, (self.przz_a * t / math.pi + self.przz_b) * self.p2)

    def to_dict(self) -> dict:
        return {
            "p2": self.p2,
            "przz_a": self.przz_a,
            "przz_b": self.przz_b,
            "read_e01": self.read_e01,
            "read_e10": self.read_e10,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "NoiseModel":
        try:
            return cls(**{k: float(data[k]) for k in data})
        except TypeError as exc:
            raise ValueError(f"malformed noise block: {exc}") from exc


def calibrate_noise(
    theta_ref: float,
    fault_ref: float,
    p2: float,
    read_e01: float = 1e-3,
    read_e10: float = 4e-3,
) -> NoiseModel:
    """Fit ``przz_a, przz_b`` so that ``fault(theta_ref) = fault_ref`` and
    ``fault(pi/2) = p2``."""
    x = abs(theta_ref) / math.pi
    a = np.array([[x, 1.0], [0.5, 1.0]])
    if abs(np.linalg.det(a)) < 1e-12:
        raise ValueError("singular calibration: theta_ref must differ from pi/2")
    przz_a, przz_b = np.linalg.solve(a, [fault_ref / p2, 1.0])
    return NoiseModel(p2, float(przz_a), float(przz_b), read_e01, read_e10)


def helium_noise() -> NoiseModel:
    """Emulator-calibrated model: 8.8e-4 at Rzz(pi/2), 1.85e-4 at 0.0685 rad."""
    return calibrate_noise(0.0685, 1.85e-4, 8.8e-4)


def evolve(c: Circuit, initial: np.ndarray) -> np.ndarray:
    return run(c, initial)


def _stream_key(seed: int | Sequence[int], label: str) -> np.ndarray:
    entropy = [int(s) for s in np.atleast_1d(seed)] + [zlib.crc32(label.encode())]
    return np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint64)


def shot_uniforms(
    seed: int | Sequence[int], label: str, start: int, n: int, width: int
) -> np.ndarray:
    """Uniforms in [0, 1) for shots ``start .. start+n-1``, shape ``(n, width)``.

    Shot ``i`` owns words ``i*width .. (i+1)*width - 1`` of a Philox stream
    keyed by ``(seed, label)``.
    """
    first = start * width
    bg = np.random.Philox(key=_stream_key(seed, label))
    bg.advance(first // 4)
    skip = first % 4
    raw = bg.random_raw(skip + n * width)[skip:]
    return ((raw >> np.uint64(11)).astype(np.float64) * 2.0**-53).reshape(n, width)


def _words_needed(circuit: Circuit, noise: NoiseModel | None) -> int:
    if noise is None:
        return 1
    nrzz = sum(g.kind == "Rzz" for g in circuit.gates)
    return 2 * nrzz + 1 + circuit.nqubits


def _probabilities(circuit: Circuit, faults: Sequence[int]) -> np.ndarray:
    """Outcome distribution with Pauli ``faults[j]`` inserted after Rzz #j."""
    dim = 2**circuit.nqubits
    state = np.zeros(dim, dtype=complex)
    state[0] = 1.0
    j = 0
    for g in circuit.gates:
        state = apply_gate(state, g, circuit.nqubits)
        if g.kind == "Rzz":
            if len(faults) and faults[j]:
                state = _apply_two_qubit(
                    state, _TWO_QUBIT_PAULIS[faults[j]], g.qubits, circuit.nqubits
                )
            j += 1
    p = np.abs(state) ** 2
    return p / p.sum()


def _apply_two_qubit(state, u, qubits, nqubits):
    psi = state.reshape((2,) * nqubits)
    psi = np.tensordot(u.reshape(2, 2, 2, 2), psi, axes=([2, 3], list(qubits)))
    psi = np.moveaxis(psi, [0, 1], list(qubits))
    return psi.reshape(state.shape)


def sample_shots(
    circuit: Circuit,
    n: int,
    noise: NoiseModel | None = None,
    seed: int | Sequence[int] = 0,
    start: int = 0,
) -> np.ndarray:
    """Sample ``n`` measurement outcomes (integer labels, qubit 0 = MSB).

    Each trajectory draws, per Rzz gate, a fault decision and a Pauli; then
    the ideal outcome; then one readout-flip decision per qubit.
    """
    if n < 1:
        raise ValueError("need at least one shot")
    width = _words_needed(circuit, noise)
    u = shot_uniforms(seed, circuit.label, start, n, width)
    nq = circuit.nqubits
    dim = 2**nq
    out = np.empty(n, dtype=np.int64)

    if noise is None:
        patterns = np.zeros((n, 0), dtype=np.int64)
    else:
        angles = [g.angle for g in circuit.gates if g.kind == "Rzz"]
        probs = np.array([noise.fault(a) for a in angles])
        hit = u[:, 0 : 2 * len(angles) : 2] < probs
        which = 1 + np.minimum((u[:, 1 : 2 * len(angles) : 2] * 15).astype(np.int64), 14)
        patterns = np.where(hit, which, 0)

    k = patterns.shape[1]
    u_out = u[:, 2 * k]
    if k == 0:
        keys, inverse = [()], np.zeros(n, dtype=np.int64)
    else:
        keys, inverse = np.unique(patterns, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
    for i, key in enumerate(keys):
        sel = inverse == i
        cdf = np.cumsum(_probabilities(circuit, key))
        out[sel] = np.minimum(np.searchsorted(cdf, u_out[sel], side="right"), dim - 1)

    if noise is not None:
        for q in range(nq):
            shift = nq - 1 - q
            bit = (out >> shift) & 1
            flip_p = np.where(bit == 1, noise.read_e10, noise.read_e01)
            flip = u[:, 2 * k + 1 + q] < flip_p
            out ^= flip.astype(np.int64) << shift
    return out


def outcome_labels(nqubits: int) -> list[str]:
    return [format(i, f"0{nqubits}b") for i in range(2**nqubits)]


@dataclass
class ShotTable:
    """Ordered outcomes per measurement basis.

    ``outcomes[basis]`` is an integer array of computational-basis labels in
    the order they were generated.
    """

    nqubits: int
    outcomes: dict[str, np.ndarray] = field(default_factory=dict)
    seed: object = None

    def __post_init__(self):
        self.outcomes = {
            b: np.asarray(v, dtype=np.int64) for b, v in self.outcomes.items()
        }

    @property
    def bases(self) -> list[str]:
        return list(self.outcomes)

    def shots(self, basis: str) -> int:
        return len(self.outcomes[basis])

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.outcomes.values())

    def counts(self, basis: str) -> np.ndarray:
        return np.bincount(self.outcomes[basis], minlength=2**self.nqubits)

    def truncate(self, per_basis: Mapping[str, int]) -> "ShotTable":
        return ShotTable(
            self.nqubits,
            {b: self.outcomes[b][: per_basis[b]] for b in self.outcomes},
            self.seed,
        )

    def to_csv(self, path: str | Path | None = None, header_comment: str | None = None) -> str:
        lines = [f"# {header_comment}"] if header_comment else []
        lines.append("basis,shot_index,outcome")
        labels = outcome_labels(self.nqubits)
        for b, arr in self.outcomes.items():
            lines.extend(f"{b},{i},{labels[o]}" for i, o in enumerate(arr.tolist()))
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path) -> "ShotTable":
        return cls.parse_csv(Path(path).read_text(), str(path))

    @classmethod
    def parse_csv(cls, text: str, source: str = "<shots>") -> "ShotTable":
        rows = [
            (lineno, line)
            for lineno, line in enumerate(text.splitlines(), 1)
            if line.strip() and not line.startswith("#")
        ]
        if not rows or rows[0][1].replace(" ", "") != "basis,shot_index,outcome":
            raise ValueError(f"{source}: missing header 'basis,shot_index,outcome'")
        data: dict[str, list[int]] = {}
        nqubits = None
        for lineno, line in rows[1:]:
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"{source}:{lineno}: expected 3 fields, got {len(parts)}")
            basis, idx, outcome = (p.strip() for p in parts)
            if not outcome or any(c not in "01" for c in outcome):
                raise ValueError(f"{source}:{lineno}: field 'outcome' is not a bitstring: {outcome!r}")
            if nqubits is None:
                nqubits = len(outcome)
            if len(outcome) != nqubits or len(basis) != nqubits:
                raise ValueError(f"{source}:{lineno}: width mismatch in 'basis' or 'outcome'")
            lst = data.setdefault(basis, [])
            try:
                i = int(idx)
            except ValueError:
                raise ValueError(f"{source}:{lineno}: field 'shot_index' is not an integer") from None
            if i != len(lst):
                raise ValueError(f"{source}:{lineno}: shot_index {i} out of order for basis {basis}")
            lst.append(int(outcome, 2))
        if nqubits is None:
            raise ValueError(f"{source}: no shots")
        return cls(nqubits, data)


def measure_bases(
    p: Params,
    shots: Mapping[str, int],
    noise: NoiseModel | None = None,
    seed: int | Sequence[int] = 0,
) -> ShotTable:
    """Run the simplified measurement circuit for each basis."""
    table = {
        b: sample_shots(measurement_circuit(p, b), int(n), noise, seed)
        for b, n in shots.items()
    }
    return ShotTable(2, table, seed)
