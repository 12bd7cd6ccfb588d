"""Pauli and Hamiltonian expectations from shot tables, and shot planning."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pauli import MeasurementBasis, PauliSum, first_covering, group_into_bases, is_identity
from .simulator import ShotTable

DEFAULT_PILOT = 512


class CoverageError(ValueError):
    """A Pauli string is not measurable from the available bases."""


def parity_vector(p: str) -> np.ndarray:
    """Eigenvalue of ``p`` (after its basis rotation) on each outcome label."""
    n = len(p)
    out = np.ones(2**n)
    idx = np.arange(2**n)
    for q, c in enumerate(p):
        if c != "I":
            out *= 1 - 2 * ((idx >> (n - 1 - q)) & 1)
    return out


def basis_order(h: PauliSum | None, available: Iterable[str]) -> list[str]:
    """Deterministic basis preference: ``h``'s grouping order first, then the
    rest alphabetically. Independent of the table's insertion order."""
    available = list(available)
    order = []
    if h is not None:
        order = [str(b) for b, _ in group_into_bases(h) if str(b) in available]
    return order + sorted(b for b in available if b not in order)


def assign_strings(strings: Iterable[str], bases: Sequence[str]) -> dict[str, str | None]:
    """Map each string to the basis that measures it; identity maps to ``None``.

    The choice depends only on the string and the set of bases, never on
    Hamiltonian coefficients, so estimates stay linear in the coefficients:
    the basis with Z in the string's free slots if it was measured, else the
    alphabetically first covering basis.
    """
    available = sorted(str(b) for b in bases)
    out: dict[str, str | None] = {}
    for s in strings:
        if is_identity(s):
            out[s] = None
            continue
        zfill = s.replace("I", "Z")
        b = zfill if zfill in available else first_covering(s, available)
        if b is None:
            raise CoverageError(f"no measured basis covers {s}")
        out[s] = b
    return out


def pauli_expectation(outcomes: np.ndarray, basis: MeasurementBasis | str, p: str) -> tuple[float, float]:
    """Mean parity of ``p`` over the shots of one basis, with its standard error."""
    basis = basis if isinstance(basis, MeasurementBasis) else MeasurementBasis(str(basis))
    if is_identity(p):
        return 1.0, 0.0
    if not basis.covers(p):
        raise CoverageError(f"basis {basis} does not cover {p}")
    x = parity_vector(p)[np.asarray(outcomes)]
    n = len(x)
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(np.mean(x)), se


def group_values(h: PauliSum, table: ShotTable) -> tuple[float, dict[str, np.ndarray]]:
    """Per-basis outcome values of the summed within-basis observable.

    Returns the identity coefficient and, per basis, a length ``2**n`` vector
    ``v`` such that a shot with outcome ``o`` contributes ``v[o]``.
    """
    assignment = assign_strings(h.strings, basis_order(h, table.bases))
    const = 0.0
    values = {b: np.zeros(2**h.nqubits) for b in table.bases}
    for s, c in h:
        b = assignment[s]
        if b is None:
            const += c
        else:
            values[b] += c * parity_vector(s)
    return const, {b: v for b, v in values.items() if np.any(v)}


def hamiltonian_expectation(h: PauliSum, table: ShotTable) -> tuple[float, float]:
    """``sum_P a_P <P>`` and its standard error.

    Terms sharing a basis are estimated from the same shots, so the variance
    is taken of their per-shot sum.
    """
    const, values = group_values(h, table)
    total, var = const, 0.0
    for b, v in values.items():
        x = v[table.outcomes[b]]
        total += float(np.mean(x))
        if len(x) > 1:
            var += float(np.var(x, ddof=1)) / len(x)
    return total, math.sqrt(var)


@dataclass(frozen=True)
class ShotPlan:
    total: int
    bases: tuple[str, ...]
    sigma: tuple[float, ...]
    shots: tuple[int, ...]

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.bases, self.shots))

    def to_json(self, **extra) -> str:
        doc = {
            "total": self.total,
            "bases": {
                b: {"sigma": s, "shots": n} for b, s, n in zip(self.bases, self.sigma, self.shots)
            },
        }
        doc.update(extra)
        return json.dumps(doc, indent=2)


def default_floor(total: int, m: int) -> int:
    return max(10, int(0.01 * total / m))


def allocate(total: int, sigma: Sequence[float], floor: int) -> list[int]:
    """Integer shots proportional to ``sigma`` with a per-entry floor.

    Entries whose proportional share falls below the floor are pinned to it
    and the rest of the budget is re-shared among the others. Rounding uses
    largest remainders, so a larger sigma never receives fewer shots.
    """
    m = len(sigma)
    if total < m * floor:
        raise ValueError(f"total {total} is below {m} bases x floor {floor}")
    sigma = np.asarray(sigma, dtype=float)
    if sigma.sum() <= 0:
        sigma = np.ones(m)
    pinned = np.zeros(m, dtype=bool)
    while True:
        free = ~pinned
        budget = total - floor * pinned.sum()
        quota = np.where(free, budget * sigma / sigma[free].sum(), floor)
        low = free & (quota < floor)
        if not low.any():
            break
        pinned |= low
    shots = np.floor(quota).astype(int)
    rest = total - shots.sum()
    # ties in the remainder go to the larger sigma, then the earlier entry
    order = sorted(range(m), key=lambda i: (-(quota[i] - shots[i]), -sigma[i], i))
    for i in order[:rest]:
        shots[i] += 1
    return [int(x) for x in shots]


def plan_shots(
    h: PauliSum, total: int, pilot: ShotTable, floor: int | None = None
) -> ShotPlan:
    """Split ``total`` shots across the pilot's bases in ratio of the
    per-basis standard deviations of the summed observable."""
    const, values = group_values(h, pilot)
    bases = basis_order(h, pilot.bases)
    sigma = []
    for b in bases:
        if pilot.shots(b) < 2:
            raise ValueError(f"pilot needs at least 2 shots in basis {b}")
        v = values.get(b)
        sigma.append(float(np.std(v[pilot.outcomes[b]], ddof=1)) if v is not None else 0.0)
    if floor is None:
        floor = default_floor(total, len(bases))
    shots = allocate(total, sigma, floor)
    return ShotPlan(int(total), tuple(bases), tuple(sigma), tuple(int(s) for s in shots))


def uniform_split(total: int, bases: Sequence[str]) -> dict[str, int]:
    q, r = divmod(int(total), len(bases))
    return {b: q + (1 if i < r else 0) for i, b in enumerate(bases)}
