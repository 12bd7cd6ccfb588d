"""Compact binary encoding of dense CI matrices as Pauli sums.

Each many-body basis state ``i`` becomes the computational basis state whose
label is the binary expansion of ``i`` (qubit 0 most significant), so an
``N x N`` matrix lives on ``ceil(log2 N)`` qubits.
"""

from __future__ import annotations

import itertools
import json
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .pauli import SINGLE_QUBIT, LETTERS, PauliSum, pauli_matrix

DROP_TOL = 1e-12
HERMITIAN_TOL = 1e-12

_SIGMA = np.stack([SINGLE_QUBIT[c] for c in LETTERS])


def _nqubits_for(dim: int) -> int:
    if dim < 1 or dim & (dim - 1):
        raise ValueError(f"matrix dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not m.size:
        return m
    dev = np.max(np.abs(m - m.conj().T))
    # relative to the largest entry so matrix powers of large inputs pass
    if dev > tol * max(1.0, float(np.max(np.abs(m)))):
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3g})")
    return m


def pad_matrix(m: np.ndarray) -> np.ndarray:
    """Zero-pad a square matrix to the next power-of-two dimension.

    The added rows and columns are the highest computational states.
    """
    m = np.asarray(m)
    n = m.shape[0]
    dim = 1 << max(0, (n - 1).bit_length())
    if dim == n:
        return m
    out = np.zeros((dim, dim), dtype=m.dtype)
    out[:n, :n] = m
    return out


def encode(m: np.ndarray, tol: float = DROP_TOL) -> PauliSum:
    """Pauli decomposition ``m = sum_P c_P P`` with ``c_P = Tr(P m) / 2**n``.

    The trace against every string is taken one qubit at a time, so the cost
    is ``O(n 4**n)`` rather than a product per string.
    """
    m = check_hermitian(m)
    n = _nqubits_for(m.shape[0])
    t = m.astype(complex).reshape([2] * (2 * n))
    for k in range(n):
        # row axis of qubit k sits at 0, its column axis at n - k
        t = np.tensordot(t, _SIGMA, axes=([0, n - k], [2, 1]))
    coeffs = t.reshape(-1) / 2**n
    terms = []
    for letters, c in zip(itertools.product(LETTERS, repeat=n), coeffs):
        if abs(c.imag) > 1e-10:
            raise ValueError("Hermitian input produced a complex coefficient")
        if abs(c.real) >= tol:
            terms.append(("".join(letters), c.real))
    return PauliSum(terms, n)


def decode(h: PauliSum) -> np.ndarray:
    """Dense matrix of a Pauli sum. Real dtype when the result is real."""
    dim = 2**h.nqubits
    m = np.zeros((dim, dim), dtype=complex)
    for string, c in h:
        m += c * pauli_matrix(string)
    if not np.any(m.imag):
        return m.real.copy()
    return m


def _state_indices(subset: Iterable[int | str], dim: int) -> list[int]:
    out = []
    for s in subset:
        idx = int(s, 2) if isinstance(s, str) else int(s)
        if not 0 <= idx < dim:
            raise ValueError(f"state {s!r} outside a {dim}-dimensional space")
        out.append(idx)
    return out


def exact_ground(
    m: np.ndarray, restrict_to: Sequence[int | str] | None = None
) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of ``m``, optionally of the principal block on a subset.

    States in ``restrict_to`` are indices or bitstrings. The returned vector
    always has the full dimension (zeros off the subset), is normalised, and
    its first nonzero component is positive.
    """
    m = check_hermitian(m)
    dim = m.shape[0]
    idx = list(range(dim)) if restrict_to is None else _state_indices(restrict_to, dim)
    w, v = np.linalg.eigh(m[np.ix_(idx, idx)])
    vec = np.zeros(dim, dtype=v.dtype)
    vec[idx] = v[:, 0]
    lead = vec[np.flatnonzero(np.abs(vec) > 1e-14)[0]]
    vec = vec * (abs(lead) / lead)
    if not np.any(np.iscomplex(vec)):
        vec = vec.real
    return float(w[0]), vec


def matrix_to_dict(m: np.ndarray) -> dict:
    m = np.asarray(m)
    out = {"dim": int(m.shape[0]), "real": np.real(m).tolist()}
    if np.iscomplexobj(m) and np.any(m.imag):
        out["imag"] = np.imag(m).tolist()
    return out


def matrix_from_dict(data: Mapping) -> np.ndarray:
    try:
        dim = int(data["dim"])
        real = np.asarray(data["real"], dtype=float)
        imag = np.asarray(data["imag"], dtype=float) if "imag" in data else None
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix document: {exc}") from exc
    if real.shape != (dim, dim) or (imag is not None and imag.shape != (dim, dim)):
        raise ValueError(f"matrix field 'real'/'imag' does not have shape ({dim}, {dim})")
    return real if imag is None else real + 1j * imag


def load_matrix(path: str | Path) -> np.ndarray:
    return matrix_from_dict(json.loads(Path(path).read_text()))


def save_matrix(m: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(json.dumps(matrix_to_dict(m), indent=2) + "\n")


def helium_hamiltonian() -> PauliSum:
    """The published 10-term, 2-qubit helium Hamiltonian (Hartree)."""
    text = resources.files("heqcm").joinpath("data/helium_eq1.json").read_text()
    return PauliSum.from_dict(json.loads(text))


# Hartree-Fock |00> plus the two excited seniority-zero functions; |11> unused.
HELIUM_STATES = (0, 1, 2)
