"""Quantum computed moments: ``<H^n>`` for n <= 4, cumulants, and the
Hollenberg-Witte ground-state estimate.

With a dense binary encoding of a real symmetric matrix, every power of
``H`` is supported on the same even-Y strings as ``H`` itself, so one set of
measured Pauli expectations yields all four moments.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass
from math import comb
from typing import Mapping, Sequence

import numpy as np

from .encoding import decode, encode
from .estimation import assign_strings, basis_order, parity_vector
from .pauli import PauliSum, first_covering, group_into_bases, is_identity, pauli_matrix
from .simulator import ShotTable

NMAX = 4


class QCMError(ArithmeticError):
    pass


class DiscriminantError(QCMError):
    """``3 c3^2 - 2 c2 c4 < 0``: the square root is complex."""


class SingularError(QCMError):
    """``c3^2 - c2 c4`` vanishes."""


class SupportError(ValueError):
    """A power of H needs a string that H's measurement bases cannot cover."""


@dataclass(frozen=True)
class Moments:
    m1: float
    m2: float
    m3: float
    m4: float

    def __iter__(self):
        return iter(astuple(self))


@dataclass(frozen=True)
class Cumulants:
    c1: float
    c2: float
    c3: float
    c4: float

    def __iter__(self):
        return iter(astuple(self))


def power_decompositions(h: PauliSum, nmax: int = NMAX) -> list[PauliSum]:
    """Pauli decompositions of ``H, H^2, ..., H^nmax``.

    Raises SupportError if any string of a power is not covered by one of
    the measurement bases of ``h``.
    """
    m = decode(h)
    bases = [str(b) for b, _ in group_into_bases(h)]
    out = []
    power = np.eye(m.shape[0], dtype=m.dtype)
    for n in range(1, nmax + 1):
        power = power @ m
        hn = encode(power)
        for s in hn.strings:
            if not is_identity(s) and first_covering(s, bases) is None:
                raise SupportError(f"H^{n} contains {s}, not measurable in bases {bases}")
        out.append(hn)
    return out


def moments_from_expectations(
    decomps: Sequence[PauliSum], expectations: Mapping[str, float]
) -> Moments:
    vals = []
    for hn in decomps:
        vals.append(sum(c * (1.0 if is_identity(s) else expectations[s]) for s, c in hn))
    return Moments(*vals)


def exact_expectations(strings: Sequence[str], state: np.ndarray) -> dict[str, float]:
    return {s: float(np.real(np.vdot(state, pauli_matrix(s) @ state))) for s in strings}


def support(decomps: Sequence[PauliSum]) -> list[str]:
    seen: dict[str, None] = {}
    for hn in decomps:
        for s in hn.strings:
            seen.setdefault(s, None)
    return list(seen)


def exact_moments(h: PauliSum, state: np.ndarray) -> Moments:
    decomps = power_decompositions(h)
    return moments_from_expectations(decomps, exact_expectations(support(decomps), state))


def _measured_expectations(h: PauliSum, table: ShotTable, strings: Sequence[str]) -> dict[str, float]:
    assignment = assign_strings(strings, basis_order(h, table.bases))
    out = {}
    for s, b in assignment.items():
        if b is not None:
            out[s] = float(np.mean(parity_vector(s)[table.outcomes[b]]))
    return out


def moments_from_shots(h: PauliSum, table: ShotTable) -> Moments:
    decomps = power_decompositions(h)
    return moments_from_expectations(decomps, _measured_expectations(h, table, support(decomps)))


def cumulants(m: Moments) -> Cumulants:
    """Connected moments from raw moments (``<H^0> = 1``)."""
    raw = [1.0, *m]
    c = [0.0]
    for n in range(1, NMAX + 1):
        c.append(raw[n] - sum(comb(n - 1, p) * c[p + 1] * raw[n - 1 - p] for p in range(n - 1)))
    return Cumulants(*c[1:])


def _eigenstate(c1: float, c2: float) -> bool:
    return abs(c2) < 1e-12 * max(1.0, c1 * c1)


def hollenberg_witte(c: Cumulants) -> float:
    """``E = c1 - c2^2 / (c3^2 - c2 c4) * (sqrt(3 c3^2 - 2 c2 c4) - c3)``.

    At an eigenstate (``c2 = 0``) the expression is 0/0 and ``c1`` is returned.
    """
    c1, c2, c3, c4 = c
    if _eigenstate(c1, c2):
        return float(c1)
    disc = 3 * c3 * c3 - 2 * c2 * c4
    if disc < 0:
        raise DiscriminantError(f"3c3^2 - 2c2c4 = {disc:.3e} < 0")
    den = c3 * c3 - c2 * c4
    if abs(den) < 1e-300:
        raise SingularError("c3^2 - c2c4 vanishes")
    return float(c1 - c2 * c2 / den * (np.sqrt(disc) - c3))


def hollenberg_witte_batch(c: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised estimate over rows ``(c1, c2, c3, c4)``.

    Returns ``(energies, discriminant_mask, singular_mask)``; masked entries
    of ``energies`` are NaN.
    """
    c = np.asarray(c, dtype=float)
    c1, c2, c3, c4 = c.T
    eig = np.abs(c2) < 1e-12 * np.maximum(1.0, c1 * c1)
    disc = 3 * c3 * c3 - 2 * c2 * c4
    den = c3 * c3 - c2 * c4
    bad_disc = ~eig & (disc < 0)
    bad_sing = ~eig & ~bad_disc & (np.abs(den) < 1e-300)
    ok = ~(eig | bad_disc | bad_sing)
    e = np.full(len(c1), np.nan)
    e[eig] = c1[eig]
    e[ok] = c1[ok] - c2[ok] ** 2 / den[ok] * (np.sqrt(disc[ok]) - c3[ok])
    return e, bad_disc, bad_sing


def cumulants_batch(m: np.ndarray) -> np.ndarray:
    """Row-wise ``cumulants`` for an ``(B, 4)`` array of moments."""
    m = np.asarray(m, dtype=float)
    raw = np.column_stack([np.ones(len(m)), m])
    c = np.zeros_like(raw)
    for n in range(1, NMAX + 1):
        acc = raw[:, n].copy()
        for p in range(n - 1):
            acc -= comb(n - 1, p) * c[:, p + 1] * raw[:, n - 1 - p]
        c[:, n] = acc
    return c[:, 1:]


def qcm_energy(h: PauliSum, table: ShotTable) -> float:
    return hollenberg_witte(cumulants(moments_from_shots(h, table)))


def qcm_energy_exact(h: PauliSum, state: np.ndarray) -> float:
    return hollenberg_witte(cumulants(exact_moments(h, state)))

