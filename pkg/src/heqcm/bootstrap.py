"""Shot-level bootstrap and the shot-prefix convergence ladder.

Both estimators depend on the shots only through the per-basis outcome
counts, so drawing ``n_i`` shots with replacement from a basis is done as a
multinomial draw over its empirical outcome frequencies. Each basis has its
own generator keyed by ``(seed, basis label)``; the result does not depend
on the order in which bases are visited.
"""

from __future__ import annotations

import csv
import io
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .estimation import assign_strings, basis_order, parity_vector
from .moments import (
    cumulants_batch,
    hollenberg_witte_batch,
    power_decompositions,
    support,
)
from .pauli import PauliSum
from .simulator import ShotTable

ESTIMATORS = ("qcm", "h_expectation")
DEFAULT_REPLICATES = 10_000


class BootstrapUnavailable(ArithmeticError):
    """Every replicate was dropped."""


@dataclass(frozen=True)
class BootstrapSummary:
    estimator: str
    replicates: int
    point: float
    median: float
    p2_5: float
    p97_5: float
    dropped: dict = field(default_factory=lambda: {"discriminant": 0, "singular": 0})
    mean: float | None = None
    std: float | None = None

    @property
    def retained(self) -> int:
        return self.replicates - sum(self.dropped.values())

    @property
    def width(self) -> float:
        return self.p97_5 - self.p2_5


class _Evaluator:
    """Maps per-basis outcome frequencies to estimator values, vectorised."""

    def __init__(self, h: PauliSum, table: ShotTable):
        self.decomps = power_decompositions(h)
        strings = support(self.decomps)
        self.bases = basis_order(h, table.bases)
        assignment = assign_strings(strings, self.bases)
        self.strings = [s for s in strings if assignment[s] is not None]
        self.by_basis = {
            b: [i for i, s in enumerate(self.strings) if assignment[s] == b] for b in self.bases
        }
        self.parity = {
            b: np.array([parity_vector(self.strings[i]) for i in idx]).reshape(len(idx), -1)
            for b, idx in self.by_basis.items()
        }
        # moments = offset + expectations @ coef
        self.offset = np.zeros(len(self.decomps))
        self.coef = np.zeros((len(self.strings), len(self.decomps)))
        col = {s: i for i, s in enumerate(self.strings)}
        for n, hn in enumerate(self.decomps):
            for s, c in hn:
                if s in col:
                    self.coef[col[s], n] += c
                else:
                    self.offset[n] += c

    def expectations(self, freqs: dict[str, np.ndarray]) -> np.ndarray:
        nrep = next(iter(freqs.values())).shape[0]
        out = np.zeros((nrep, len(self.strings)))
        for b, idx in self.by_basis.items():
            if idx:
                out[:, idx] = freqs[b] @ self.parity[b].T
        return out

    def evaluate(self, estimator: str, freqs: dict[str, np.ndarray]):
        mom = self.offset + self.expectations(freqs) @ self.coef
        if estimator == "h_expectation":
            e = mom[:, 0]
            none = np.zeros(len(e), dtype=bool)
            return e, none, none
        if estimator == "qcm":
            return hollenberg_witte_batch(cumulants_batch(mom))
        raise ValueError(f"unknown estimator {estimator!r}")


def _freqs(table: ShotTable, bases: Sequence[str]) -> dict[str, np.ndarray]:
    return {b: (table.counts(b) / table.shots(b))[None, :] for b in bases}


def resample_counts(table: ShotTable, replicates: int, seed: int) -> dict[str, np.ndarray]:
    """Bootstrap outcome counts, shape ``(replicates, 2**n)`` per basis."""
    out = {}
    for b in table.bases:
        n = table.shots(b)
        rng = np.random.default_rng([int(seed), zlib.crc32(b.encode())])
        out[b] = rng.multinomial(n, table.counts(b) / n, size=replicates)
    return out


def _summarise(estimator, values, bad_disc, bad_sing, point, replicates) -> BootstrapSummary:
    kept = np.sort(values[~(bad_disc | bad_sing)])
    dropped = {"discriminant": int(bad_disc.sum()), "singular": int(bad_sing.sum())}
    if kept.size == 0:
        raise BootstrapUnavailable(f"all {replicates} {estimator} replicates were dropped: {dropped}")
    med, lo, hi = np.percentile(kept, [50, 2.5, 97.5])
    mean = std = None
    if estimator == "h_expectation":
        mean = float(np.mean(kept))
        std = float(np.std(kept, ddof=1)) if kept.size > 1 else 0.0
    return BootstrapSummary(
        estimator, replicates, point, float(med), float(lo), float(hi), dropped, mean, std
    )


def bootstrap(
    h: PauliSum,
    table: ShotTable,
    replicates: int = DEFAULT_REPLICATES,
    estimator: str = "qcm",
    seed: int = 0,
) -> BootstrapSummary:
    return bootstrap_many(h, table, replicates, (estimator,), seed)[estimator]


def replicate_values(
    h: PauliSum,
    table: ShotTable,
    replicates: int = DEFAULT_REPLICATES,
    estimators: Sequence[str] = ESTIMATORS,
    seed: int = 0,
) -> dict[str, tuple[float, np.ndarray, np.ndarray, np.ndarray]]:
    """Raw replicate values per estimator.

    Each entry is ``(point, values, discriminant_mask, singular_mask)``;
    masked replicates hold NaN.
    """
    if replicates < 100:
        raise ValueError("need at least 100 replicates")
    for est in estimators:
        if est not in ESTIMATORS:
            raise ValueError(f"unknown estimator {est!r}")
    ev = _Evaluator(h, table)
    counts = resample_counts(table, replicates, seed)
    freqs = {b: counts[b] / table.shots(b) for b in table.bases}
    point_freqs = _freqs(table, table.bases)
    out = {}
    for est in estimators:
        p, pd, ps = ev.evaluate(est, point_freqs)
        point = float(p[0]) if not (pd[0] or ps[0]) else float("nan")
        out[est] = (point, *ev.evaluate(est, freqs))
    return out


def bootstrap_many(
    h: PauliSum,
    table: ShotTable,
    replicates: int = DEFAULT_REPLICATES,
    estimators: Sequence[str] = ESTIMATORS,
    seed: int = 0,
) -> dict[str, BootstrapSummary]:
    """Bootstrap several estimators on the same resampled tables."""
    raw = replicate_values(h, table, replicates, estimators, seed)
    return {
        est: _summarise(est, vals, bad_disc, bad_sing, point, replicates)
        for est, (point, vals, bad_disc, bad_sing) in raw.items()
    }


def prefix_sizes(table: ShotTable, total: int) -> dict[str, int]:
    """Leading shots kept per basis when truncating to ``total`` shots,
    preserving the run's allocation ratios."""
    have = table.total
    if total > have:
        raise ValueError(f"prefix {total} exceeds the {have} shots available")
    sizes = {b: int(round(total * table.shots(b) / have)) for b in table.bases}
    small = [b for b, n in sizes.items() if n < 2]
    if small:
        raise ValueError(f"prefix {total} leaves fewer than 2 shots in bases {small}")
    return sizes


def prefix_analysis(
    h: PauliSum,
    table: ShotTable,
    totals: Sequence[int],
    replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
    estimators: Sequence[str] = ESTIMATORS,
) -> list[tuple[int, dict[str, BootstrapSummary]]]:
    """Bootstrap on the first ``N`` shots for each ``N`` in ``totals``."""
    if list(totals) != sorted(totals):
        raise ValueError("prefix totals must be ascending")
    out = []
    for total in totals:
        sub = table.truncate(prefix_sizes(table, total))
        out.append((int(total), bootstrap_many(h, sub, replicates, estimators, seed)))
    return out


PREFIX_COLUMNS = [
    "N", "estimator", "point", "median", "p2_5", "p97_5", "mean", "std",
    "dropped_discriminant", "dropped_singular",
]


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def prefix_csv(
    ladder: Sequence[tuple[int, dict[str, BootstrapSummary]]],
    path: str | Path | None = None,
    header_comment: str | None = None,
) -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PREFIX_COLUMNS)
    for n, summaries in ladder:
        for est, s in summaries.items():
            w.writerow([
                n, est, _fmt(s.point), _fmt(s.median), _fmt(s.p2_5), _fmt(s.p97_5),
                _fmt(s.mean), _fmt(s.std), s.dropped["discriminant"], s.dropped["singular"],
            ])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
