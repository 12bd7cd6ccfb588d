"""Two-parameter helium ansatz in textbook and native-gate form.

Gate conventions::

    Ry(t)  = exp(-i t Y / 2),          Ry(t)|0> = cos(t/2)|0> + sin(t/2)|1>
    Rz(t)  = diag(exp(-i t/2), exp(i t/2))
    Rzz(t) = diag(e^{-it/2}, e^{it/2}, e^{it/2}, e^{-it/2})
    CRy(t) = |0><0| (x) I + |1><1| (x) Ry(t)   on (control, target)

Qubit 0 is the top wire and the most significant bit of a basis label.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .pauli import MeasurementBasis

ROTATIONS = frozenset({"Ry", "Rz", "Rzz", "CRy"})
TWO_QUBIT = frozenset({"Rzz", "CRy"})
KINDS = frozenset({"Ry", "Rz", "Rzz", "H", "S", "Sdag", "X", "SqrtX", "SqrtXdag", "CRy"})

_S2 = 1 / math.sqrt(2)
_FIXED = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.diag([1, 1j]),
    "Sdag": np.diag([1, -1j]),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "SqrtX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    "SqrtXdag": 0.5 * np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]]),
}


def ry(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(t: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def rzz(t: float) -> np.ndarray:
    a, b = np.exp(-0.5j * t), np.exp(0.5j * t)
    return np.diag([a, b, b, a])


def cry(t: float) -> np.ndarray:
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = ry(t)
    return m


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        want = 2 if self.kind in TWO_QUBIT else 1
        if len(self.qubits) != want or len(set(self.qubits)) != want:
            raise ValueError(f"{self.kind} needs {want} distinct qubit(s), got {self.qubits}")
        if self.kind in ROTATIONS:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    def matrix(self) -> np.ndarray:
        if self.kind == "Ry":
            return ry(self.angle)
        if self.kind == "Rz":
            return rz(self.angle)
        if self.kind == "Rzz":
            return rzz(self.angle)
        if self.kind == "CRy":
            return cry(self.angle)
        return _FIXED[self.kind]

    def to_dict(self) -> dict:
        d = {"g": self.kind, "q": list(self.qubits)}
        if self.angle is not None:
            d["a"] = self.angle
        return d


@dataclass(frozen=True)
class Circuit:
    nqubits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.nqubits or min(g.qubits) < 0:
                raise ValueError(f"gate {g} acts outside a {self.nqubits}-qubit register")

    def __len__(self) -> int:
        return len(self.gates)

    def dump(self) -> str:
        """One JSON object per gate, newline separated."""
        return "\n".join(json.dumps(g.to_dict()) for g in self.gates)


class Params(NamedTuple):
    theta1: float
    theta2: float


OPTIMAL_PARAMS = Params(-3.0016, -0.1370)
HARTREE_FOCK_PARAMS = Params(-math.pi, 0.0)


def apply_gate(state: np.ndarray, gate: Gate, nqubits: int) -> np.ndarray:
    """Apply one gate to a state vector (or a batch of columns)."""
    k = len(gate.qubits)
    tail = state.shape[1:]
    psi = state.reshape((2,) * nqubits + tail)
    u = gate.matrix().reshape((2,) * (2 * k))
    psi = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), list(gate.qubits)))
    psi = np.moveaxis(psi, list(range(k)), list(gate.qubits))
    return psi.reshape(state.shape)


def run(circuit: Circuit, state: np.ndarray | None = None) -> np.ndarray:
    dim = 2**circuit.nqubits
    if state is None:
        state = np.zeros(dim, dtype=complex)
        state[0] = 1.0
    state = np.asarray(state, dtype=complex)
    if state.shape[0] != dim:
        raise ValueError(f"state has dimension {state.shape[0]}, circuit needs {dim}")
    for g in circuit.gates:
        state = apply_gate(state, g, circuit.nqubits)
    return state


def unitary(circuit: Circuit) -> np.ndarray:
    return run(circuit, np.eye(2**circuit.nqubits, dtype=complex))


def ansatz_textbook(p: Params) -> Circuit:
    t1, t2 = p
    return Circuit(
        2,
        (Gate("Ry", (1,), t1), Gate("CRy", (1, 0), t2), Gate("X", (1,))),
        "ansatz-textbook",
    )


def ansatz_native(p: Params) -> Circuit:
    t1, t2 = p
    return Circuit(
        2,
        (
            Gate("Ry", (1,), t1),
            Gate("Sdag", (0,)),
            Gate("H", (0,)),
            Gate("Rz", (0,), t2 / 2),
            Gate("Rzz", (0, 1), -t2 / 2),
            Gate("H", (0,)),
            Gate("S", (0,)),
            Gate("X", (1,)),
        ),
        "ansatz-native",
    )


# Post-ansatz tails after merging the measurement rotation into the ansatz's
# last single-qubit gates; diagonal gates before readout and global phases
# are dropped. Top qubit ends with H.S, bottom qubit with X.
_TOP_TAIL = {"Z": ("H",), "X": ("SqrtX",), "Y": ()}
_BOTTOM_TAIL = {"Z": ("X",), "X": ("H",), "Y": ("SqrtXdag",)}


def measurement_circuit(p: Params, basis: MeasurementBasis | str) -> Circuit:
    """Simplified native circuit that measures the ansatz state in ``basis``.

    The leading S-dagger on qubit 0 is dropped because it acts on ``|0>``.
    The computational-basis read is implicit.
    """
    label = str(basis)
    if len(label) != 2 or any(c not in "XYZ" for c in label):
        raise ValueError(f"unsupported measurement basis {label!r}")
    t1, t2 = p
    gates = [
        Gate("Ry", (1,), t1),
        Gate("H", (0,)),
        Gate("Rz", (0,), t2 / 2),
        Gate("Rzz", (0, 1), -t2 / 2),
    ]
    gates += [Gate(k, (0,)) for k in _TOP_TAIL[label[0]]]
    gates += [Gate(k, (1,)) for k in _BOTTOM_TAIL[label[1]]]
    return Circuit(2, tuple(gates), f"meas-{label}")


def basis_rotation(basis: MeasurementBasis | str) -> list[Gate]:
    """Textbook post-rotations mapping each qubit's basis onto Z."""
    gates: list[Gate] = []
    for q, c in enumerate(str(basis)):
        if c == "X":
            gates.append(Gate("H", (q,)))
        elif c == "Y":
            gates += [Gate("Sdag", (q,)), Gate("H", (q,))]
    return gates


def with_gates(circuit: Circuit, extra: Iterable[Gate], label: str | None = None) -> Circuit:
    return Circuit(circuit.nqubits, circuit.gates + tuple(extra), label or circuit.label)


def ansatz_state(p: Params) -> np.ndarray:
    return run(ansatz_native(p))


def canonical_params(t1: float, t2: float) -> Params:
    """Representative of the same state with both angles in ``[-pi, pi)``.

    ``theta1`` is 2*pi periodic up to global phase; ``theta2`` is 4*pi
    periodic and ``(t1, t2 +/- 2 pi)`` prepares the same state as ``(-t1, t2)``.
    """
    t2 = _wrap(t2, 2 * math.pi)
    if t2 >= math.pi:
        t1, t2 = -t1, t2 - 2 * math.pi
    elif t2 < -math.pi:
        t1, t2 = -t1, t2 + 2 * math.pi
    return Params(_wrap(t1, math.pi), t2)


def _wrap(x: float, half: float) -> float:
    """Wrap into ``[-half, half)``."""
    period = 2 * half
    y = (x + half) % period - half
    return -half if y >= half else y


def wrap_angle(x: float) -> float:
    return _wrap(x, math.pi)


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def equal_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """Max elementwise deviation after aligning the global phase on the
    largest-magnitude entry of ``a``."""
    a = np.asarray(a)
    b = np.asarray(b)
    k = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    if abs(b[k]) == 0:
        return float(np.max(np.abs(a - b)))
    phase = a[k] / b[k]
    phase /= abs(phase)
    return float(np.max(np.abs(a - phase * b)))


def gate_sequence_matrix(gates: Sequence[Gate], nqubits: int) -> np.ndarray:
    return unitary(Circuit(nqubits, tuple(gates)))
