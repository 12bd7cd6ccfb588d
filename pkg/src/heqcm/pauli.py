"""Weighted Pauli strings and qubit-wise commuting measurement groups.

Strings are plain uppercase ``str`` objects over ``IXYZ``. The leftmost
letter acts on qubit 0, which is the most significant bit of a
computational basis label ``|q0 q1 ...>``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

LETTERS = "IXYZ"

SINGLE_QUBIT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def check_string(p: str, nqubits: int | None = None) -> str:
    if not isinstance(p, str) or len(p) == 0:
        raise ValueError(f"Pauli string must be a non-empty str, got {p!r}")
    if any(c not in LETTERS for c in p):
        raise ValueError(f"Pauli string {p!r} contains letters outside {LETTERS}")
    if nqubits is not None and len(p) != nqubits:
        raise ValueError(f"Pauli string {p!r} has length {len(p)}, expected {nqubits}")
    return p


def is_identity(p: str) -> bool:
    return set(p) <= {"I"}


def qubitwise_commute(a: str, b: str) -> bool:
    """True iff at every position the letters agree or one of them is I."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {a!r} vs {b!r}")
    return all(x == y or x == "I" or y == "I" for x, y in zip(a, b))


def pauli_matrix(p: str) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of a Pauli string (qubit 0 leftmost)."""
    check_string(p)
    return reduce(np.kron, (SINGLE_QUBIT[c] for c in p))


class PauliSum:
    """A real-weighted sum of Pauli strings over a fixed register.

    Duplicate strings are merged on construction. Iteration yields
    ``(string, coeff)`` pairs in first-seen order.
    """

    __slots__ = ("_terms", "_nqubits")

    def __init__(
        self,
        terms: Mapping[str, float] | Iterable[tuple[str, float]],
        nqubits: int | None = None,
    ):
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[str, float] = {}
        for string, coeff in items:
            if nqubits is None:
                nqubits = len(check_string(string))
            check_string(string, nqubits)
            if isinstance(coeff, complex):
                if coeff.imag != 0:
                    raise ValueError(f"coefficient of {string} is not real: {coeff}")
                coeff = coeff.real
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ValueError(f"coefficient of {string} is not finite: {coeff}")
            merged[string] = merged.get(string, 0.0) + coeff
        if nqubits is None:
            raise ValueError("an empty PauliSum needs an explicit nqubits")
        self._terms = merged
        self._nqubits = int(nqubits)

    @classmethod
    def identity(cls, nqubits: int, coeff: float = 1.0) -> "PauliSum":
        return cls({"I" * nqubits: coeff})

    @property
    def nqubits(self) -> int:
        return self._nqubits

    @property
    def terms(self) -> dict[str, float]:
        return dict(self._terms)

    @property
    def strings(self) -> list[str]:
        return list(self._terms)

    def coeff(self, string: str) -> float:
        return self._terms.get(string, 0.0)

    def __iter__(self) -> Iterator[tuple[str, float]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, string: object) -> bool:
        return string in self._terms

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        if other.nqubits != self.nqubits:
            raise ValueError("register size mismatch")
        return PauliSum(list(self) + list(other), self.nqubits)

    def __mul__(self, scale: float) -> "PauliSum":
        return PauliSum({s: c * scale for s, c in self}, self.nqubits)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.nqubits == other.nqubits and self._terms == other._terms

    def __repr__(self) -> str:
        body = " ".join(f"{c:+g} {s}" for s, c in self)
        return f"PauliSum({body})"

    def allclose(self, other: "PauliSum", atol: float = 1e-10) -> bool:
        if self.nqubits != other.nqubits:
            return False
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.coeff(k) - other.coeff(k)) <= atol for k in keys)

    def to_dict(self) -> dict:
        return {
            "nqubits": self.nqubits,
            "terms": [{"string": s, "coeff": c} for s, c in self],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PauliSum":
        try:
            nqubits = int(data["nqubits"])
            rows = data["terms"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed PauliSum document: {exc}") from exc
        terms = []
        for i, row in enumerate(rows):
            try:
                terms.append((row["string"], row["coeff"]))
            except (KeyError, TypeError) as exc:
                raise ValueError(f"malformed PauliSum term #{i}: {row!r}") from exc
        return cls(terms, nqubits)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "PauliSum":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class MeasurementBasis:
    """A product measurement basis, one of X, Y or Z per qubit."""

    letters: str

    def __post_init__(self):
        if not self.letters or any(c not in "XYZ" for c in self.letters):
            raise ValueError(f"measurement basis must be over XYZ, got {self.letters!r}")

    def covers(self, p: str) -> bool:
        if len(p) != len(self.letters):
            raise ValueError(f"length mismatch: {p!r} vs basis {self.letters!r}")
        return all(c == "I" or c == b for c, b in zip(p, self.letters))

    def __str__(self) -> str:
        return self.letters


def group_into_bases(h: PauliSum) -> list[tuple[MeasurementBasis, list[str]]]:
    """Greedy first-fit grouping of the terms of ``h`` into product bases.

    Terms are visited by descending ``|coeff|`` (ties by string). A term joins
    the first existing group it is qubit-wise compatible with; otherwise it
    opens a new group whose free slots are Z. The identity string is attached
    to the first group.
    """
    if len(h) == 0:
        raise ValueError("cannot group an empty PauliSum")
    order = sorted(h, key=lambda t: (-abs(t[1]), t[0]))
    # each group is (mutable letter list, members)
    groups: list[tuple[list[str], list[str]]] = []
    identity = None
    for string, _ in order:
        if is_identity(string):
            identity = string
            continue
        for letters, members in groups:
            if all(c == "I" or c == b for c, b in zip(string, letters)):
                members.append(string)
                break
        else:
            groups.append(([c if c != "I" else "Z" for c in string], [string]))
    if not groups:
        groups.append((["Z"] * h.nqubits, []))
    if identity is not None:
        groups[0][1].append(identity)
    return [(MeasurementBasis("".join(letters)), members) for letters, members in groups]


def first_covering(p: str, bases: Iterable[MeasurementBasis | str]) -> str | None:
    """Label of the first basis in ``bases`` that covers ``p``."""
    for b in bases:
        label = str(b)
        if all(c == "I" or c == x for c, x in zip(p, label)):
            return label
    return None
