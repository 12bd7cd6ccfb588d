"""Sequential single-parameter VQE sweeps.

``theta1`` drives a lone ``Ry`` gate, so ``<H>(theta1)`` is a first-order
trigonometric polynomial and the three-point Rotosolve update is exact.
``theta2`` enters as ``Rz(phi) Rzz(-phi)`` with gate angle ``phi = theta2/2``;
``<H>`` is a second-order trigonometric polynomial in ``phi``, fitted from
five evaluations and minimised numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuits import HARTREE_FOCK_PARAMS, Params, ansatz_state, canonical_params, wrap_angle
from .encoding import HELIUM_STATES, decode, exact_ground
from .estimation import hamiltonian_expectation, uniform_split
from .pauli import PauliSum, group_into_bases
from .simulator import NoiseModel, measure_bases

KCAL_PER_MOL_HA = 1.5936e-3

Provider = Callable[[Params], float]

THETA2_ANGLES = (0.0, math.pi, math.pi / 2, -math.pi / 2, math.pi / 4)
GRID_POINTS = 4096
GOLDEN_ITERS = 60
_INVPHI = (math.sqrt(5) - 1) / 2


def exact_energy(h: PauliSum, p: Params) -> float:
    psi = ansatz_state(p)
    return float(np.real(np.vdot(psi, decode(h) @ psi)))


def exact_provider(h: PauliSum) -> Provider:
    m = decode(h)

    def provider(p: Params) -> float:
        psi = ansatz_state(p)
        return float(np.real(np.vdot(psi, m @ psi)))

    return provider


class SampledProvider:
    """Shot-based ``<H>`` with a uniform split over ``h``'s bases.

    Every call gets a fresh stream ``(seed, call index)``, so a run is
    reproducible from its seed.
    """

    def __init__(self, h: PauliSum, shots: int, noise: NoiseModel | None = None, seed=0):
        if shots < 1:
            raise ValueError("shots must be positive")
        self.h = h
        self.noise = noise
        self.seed = tuple(int(s) for s in np.atleast_1d(seed))
        self.split = uniform_split(shots, [str(b) for b, _ in group_into_bases(h)])
        self.calls = 0

    def __call__(self, p: Params) -> float:
        table = measure_bases(p, self.split, self.noise, seed=self.seed + (self.calls,))
        self.calls += 1
        return hamiltonian_expectation(self.h, table)[0]


def rotosolve_theta1(provider: Provider, current: Params) -> float:
    t1, t2 = current
    e0 = provider(Params(0.0, t2))
    ep = provider(Params(math.pi / 2, t2))
    em = provider(Params(-math.pi / 2, t2))
    y, x = 2 * e0 - ep - em, ep - em
    if abs(y) < 1e-14 and abs(x) < 1e-14:
        return t1
    return wrap_angle(-math.pi / 2 - math.atan2(y, x))


@dataclass(frozen=True)
class FitCoefficients:
    """``A0 + A1 cos x + A2 sin x + A3 cos 2x + A4 sin 2x``."""

    a0: float
    a1: float
    a2: float
    a3: float
    a4: float

    @classmethod
    def from_samples(cls, e0, epi, ehalf, emhalf, equarter) -> "FitCoefficients":
        a0 = 0.25 * (e0 + epi + ehalf + emhalf)
        a1 = 0.5 * (e0 - epi)
        a2 = 0.5 * (ehalf - emhalf)
        a3 = 0.25 * (e0 + epi - ehalf - emhalf)
        a4 = equarter - a0 - (a1 + a2) / math.sqrt(2)
        return cls(a0, a1, a2, a3, a4)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return (
            self.a0
            + self.a1 * np.cos(x)
            + self.a2 * np.sin(x)
            + self.a3 * np.cos(2 * x)
            + self.a4 * np.sin(2 * x)
        )

    def __iter__(self):
        return iter((self.a0, self.a1, self.a2, self.a3, self.a4))


def fit_theta2(provider: Provider, current: Params) -> FitCoefficients:
    """Fit ``<H>`` as a function of the gate angle ``phi = theta2 / 2``."""
    t1 = current.theta1
    samples = [provider(Params(t1, 2 * phi)) for phi in THETA2_ANGLES]
    return FitCoefficients.from_samples(*samples)


def minimize_theta2(fit: FitCoefficients) -> float:
    """Global minimiser of the fitted curve on ``[-pi, pi)``.

    Uniform grid, ties to the smallest ``|x|`` then the smaller value, then
    golden-section refinement inside the neighbouring grid cells. The grid
    point is kept unless the refinement is strictly lower.
    """
    step = 2 * math.pi / GRID_POINTS
    grid = -math.pi + step * np.arange(GRID_POINTS)
    vals = fit(grid)
    best = vals.min()
    ties = np.flatnonzero(vals <= best + 1e-12 * max(1.0, abs(best)))
    k = min(ties, key=lambda i: (abs(grid[i]), grid[i]))
    x0, f0 = float(grid[k]), float(vals[k])

    lo, hi = x0 - step, x0 + step
    c, d = hi - _INVPHI * (hi - lo), lo + _INVPHI * (hi - lo)
    fc, fd = float(fit(c)), float(fit(d))
    for _ in range(GOLDEN_ITERS):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = float(fit(c))
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = float(fit(d))
    x = 0.5 * (lo + hi)
    if float(fit(x)) < f0:
        return wrap_angle(x)
    return x0


@dataclass
class VqeConfig:
    sweeps: int = 3
    shots_per_expectation: int = 8192
    initial: Params = HARTREE_FOCK_PARAMS
    seed: int = 0
    provider: str = "exact"  # "exact" or "sampled"
    noise: NoiseModel | None = None
    track_exact: bool = True

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.provider not in ("exact", "sampled"):
            raise ValueError(f"unknown provider {self.provider!r}")
        if self.provider == "sampled" and self.shots_per_expectation < 1:
            raise ValueError("sampled provider needs shots >= 1")
        self.initial = Params(*self.initial)


@dataclass(frozen=True)
class SweepRecord:
    sweep: int
    params: Params
    energy_sampled: float
    energy_exact: float | None = None


def make_provider(cfg: VqeConfig, h: PauliSum) -> Provider:
    if cfg.provider == "exact":
        return exact_provider(h)
    return SampledProvider(h, cfg.shots_per_expectation, cfg.noise, cfg.seed)


def sweep(provider: Provider, p: Params) -> tuple[Params, float]:
    """One greedy pass: theta1 by Rotosolve, then theta2 by the 5-point fit.

    Returns the new parameters and the fitted curve's minimum value.
    """
    t1 = rotosolve_theta1(provider, p)
    fit = fit_theta2(provider, Params(t1, p.theta2))
    phi = minimize_theta2(fit)
    return canonical_params(t1, 2 * phi), float(fit(phi))


def run_vqe(
    cfg: VqeConfig, h: PauliSum, provider: Provider | None = None
) -> list[SweepRecord]:
    provider = provider or make_provider(cfg, h)
    exact = exact_provider(h) if cfg.track_exact else None
    p = cfg.initial
    out = []
    for k in range(1, cfg.sweeps + 1):
        p, e = sweep(provider, p)
        out.append(SweepRecord(k, p, e, exact(p) if exact else None))
    return out


def trajectory_csv(records: Sequence[SweepRecord], header_comment: str | None = None) -> str:
    lines = [f"# {header_comment}"] if header_comment else []
    lines.append("sweep,theta1,theta2,energy_sampled,energy_exact")
    for r in records:
        ex = "" if r.energy_exact is None else repr(r.energy_exact)
        lines.append(f"{r.sweep},{r.params.theta1!r},{r.params.theta2!r},{r.energy_sampled!r},{ex}")
    return "\n".join(lines) + "\n"


def restricted_ground(h: PauliSum, states: Sequence[int] = HELIUM_STATES) -> float:
    return exact_ground(decode(h), states)[0]


def success_probability(
    shots: int,
    sweeps: int,
    trials: int,
    seed: int = 0,
    h: PauliSum | None = None,
    initial: Params = HARTREE_FOCK_PARAMS,
    threshold: float = KCAL_PER_MOL_HA,
) -> float:
    """Fraction of noiseless sampled VQE runs whose final parameters give an
    exact ``<H>`` within ``threshold`` of the restricted ground energy."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if h is None:
        from .encoding import helium_hamiltonian

        h = helium_hamiltonian()
    e0 = restricted_ground(h)
    exact = exact_provider(h)
    hits = 0
    for t in range(trials):
        provider = SampledProvider(h, shots, None, (seed, t))
        cfg = VqeConfig(sweeps=sweeps, initial=initial, track_exact=False)
        final = run_vqe(cfg, h, provider)[-1].params
        hits += exact(final) - e0 <= threshold
    return hits / trials
