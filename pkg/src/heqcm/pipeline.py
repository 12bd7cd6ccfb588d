"""End-to-end ionisation-potential run: parameters, pilot, shot plan, noisy
sampling, bootstrap of both estimators, conversion to eV.

All energies are Hartree until ``IpResult`` is assembled. Every output file
carries the config hash and seed on its first line.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .bootstrap import (
    DEFAULT_REPLICATES,
    BootstrapSummary,
    bootstrap_many,
    prefix_analysis,
    prefix_csv,
    prefix_sizes,
)
from .circuits import OPTIMAL_PARAMS, Params, ansatz_state, measurement_circuit
from .encoding import HELIUM_STATES, decode, exact_ground, helium_hamiltonian
from .estimation import DEFAULT_PILOT, plan_shots, uniform_split
from .moments import qcm_energy_exact
from .optimizer import KCAL_PER_MOL_HA, SampledProvider, VqeConfig, exact_energy, run_vqe
from .pauli import PauliSum, group_into_bases
from .simulator import NoiseModel, helium_noise, measure_bases

HARTREE_TO_EV = 27.211386245988
CATION_ENERGY = -1.995072  # He+ in the same orbital basis
EXPERIMENTAL_IP_EV = 24.58737618
CHEM_ACC_EV = KCAL_PER_MOL_HA * HARTREE_TO_EV
DEFAULT_SHOTS = 776_900


class ConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


def parse_noise(spec: Any) -> NoiseModel | None:
    """``"none"``, ``"calibrated"``, ``"custom:<path>"`` or an inline dict."""
    if spec is None or spec == "none":
        return None
    if spec == "calibrated":
        return helium_noise()
    if isinstance(spec, Mapping):
        return NoiseModel.from_dict(spec)
    if isinstance(spec, str) and spec.startswith("custom:"):
        path = Path(spec[len("custom:"):])
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
        return NoiseModel.from_dict(data)
    raise ConfigError(f"unknown noise spec {spec!r}")


def parse_params(text: str | None) -> Params | None:
    if text is None:
        return None
    parts = str(text).split(",")
    try:
        t1, t2 = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"--params expects 'theta1,theta2', got {text!r}") from None
    return Params(t1, t2)


@dataclass
class RunConfig:
    hamiltonian: str | None = None  # None: the built-in helium Hamiltonian
    basis_states: tuple[int, ...] | None = HELIUM_STATES  # physical states; None = all
    noise: Any = "calibrated"
    seed: int = 0
    shots: int = DEFAULT_SHOTS
    pilot: int = DEFAULT_PILOT
    params: tuple[float, float] | None = tuple(OPTIMAL_PARAMS)
    vqe: bool = False
    sweeps: int = 3
    vqe_shots: int = 8192
    replicates: int = DEFAULT_REPLICATES
    cation_energy: float = CATION_ENERGY
    hartree_to_ev: float = HARTREE_TO_EV
    exact: bool = False
    ladder: bool = True
    out: str = "out"

    def validate(self) -> "RunConfig":
        if self.hamiltonian is not None and not Path(self.hamiltonian).is_file():
            raise ConfigError(f"hamiltonian file {self.hamiltonian} not found")
        parse_noise(self.noise)
        if self.pilot < 2:
            raise ConfigError("pilot must give at least 2 shots per basis")
        if not self.exact and self.shots < self.pilot:
            raise ConfigError(f"shot budget {self.shots} is below the pilot size {self.pilot}")
        if self.hartree_to_ev <= 0:
            raise ConfigError("hartree_to_ev must be positive")
        if self.replicates < 100:
            raise ConfigError("replicates must be >= 100")
        if self.sweeps < 1 or self.vqe_shots < 1:
            raise ConfigError("sweeps and vqe_shots must be positive")
        if self.params is None and not self.vqe:
            raise ConfigError("give params or enable vqe")
        if self.basis_states is not None:
            self.basis_states = tuple(int(i) for i in self.basis_states)
        if self.params is not None:
            self.params = tuple(float(x) for x in self.params)
            if len(self.params) != 2:
                raise ConfigError("params must be two angles")
        return self

    @classmethod
    def from_dict(cls, data: Mapping) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        try:
            return cls(**data).validate()
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data)

    def provenance_dict(self) -> dict:
        """Everything that affects results (the output directory does not)."""
        d = asdict(self)
        d.pop("out")
        for k in ("params", "basis_states"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.provenance_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def provenance(self) -> str:
        return f"heqcm config={self.config_hash()} seed={self.seed}"

    def load_hamiltonian(self) -> PauliSum:
        return helium_hamiltonian() if self.hamiltonian is None else PauliSum.load(self.hamiltonian)


def ip_ev(e_neutral: float, cation: float = CATION_ENERGY, to_ev: float = HARTREE_TO_EV) -> float:
    return (cation - e_neutral) * to_ev


@dataclass
class EstimatorResult:
    energy: dict
    ip_ev: float  # from the bootstrap median (point value when exact)
    ip_low: float | None
    ip_high: float | None
    deviation_ev: float
    chemically_accurate: bool
    interval_within_band: bool | None

    @property
    def ip_width(self) -> float | None:
        if self.ip_low is None:
            return None
        return self.ip_high - self.ip_low


def _band(ip: float) -> bool:
    return abs(ip - EXPERIMENTAL_IP_EV) <= CHEM_ACC_EV


def estimator_from_summary(s: BootstrapSummary, cation: float, to_ev: float) -> EstimatorResult:
    # IP falls as the energy rises, so the energy interval flips
    ip = ip_ev(s.median, cation, to_ev)
    lo, hi = ip_ev(s.p97_5, cation, to_ev), ip_ev(s.p2_5, cation, to_ev)
    energy = {
        "point": s.point,
        "median": s.median,
        "p2_5": s.p2_5,
        "p97_5": s.p97_5,
        "replicates": s.replicates,
        "dropped": dict(s.dropped),
    }
    if s.mean is not None:
        energy["mean"], energy["std"] = s.mean, s.std
    return EstimatorResult(
        energy, ip, lo, hi, ip - EXPERIMENTAL_IP_EV, _band(ip), _band(lo) and _band(hi)
    )


def estimator_from_value(e: float, cation: float, to_ev: float) -> EstimatorResult:
    ip = ip_ev(e, cation, to_ev)
    return EstimatorResult({"point": e}, ip, None, None, ip - EXPERIMENTAL_IP_EV, _band(ip), None)


@dataclass
class IpResult:
    params: Params
    exact_ground: float
    in_basis_ip_ev: float
    estimators: dict[str, EstimatorResult]
    plan: dict[str, int] = field(default_factory=dict)
    sigma: dict[str, float] = field(default_factory=dict)
    total_shots: int = 0

    def to_dict(self, provenance: Mapping | None = None) -> dict:
        doc = {}
        if provenance:
            doc["provenance"] = dict(provenance)
        doc.update(
            {
                "params": {"theta1": self.params.theta1, "theta2": self.params.theta2},
                "exact_ground_ha": self.exact_ground,
                "in_basis_ip_ev": self.in_basis_ip_ev,
                "experimental_ip_ev": EXPERIMENTAL_IP_EV,
                "chemical_accuracy_ev": CHEM_ACC_EV,
                "total_shots": self.total_shots,
                "plan": {b: {"shots": n, "sigma": self.sigma.get(b)} for b, n in self.plan.items()},
                "estimators": {},
            }
        )
        for name, r in self.estimators.items():
            doc["estimators"][name] = {
                "energy_ha": r.energy,
                "ip_ev": r.ip_ev,
                "ip_interval_ev": None if r.ip_low is None else [r.ip_low, r.ip_high],
                "ip_width_ev": r.ip_width,
                "deviation_ev": r.deviation_ev,
                "chemically_accurate": r.chemically_accurate,
                "interval_within_band": r.interval_within_band,
            }
        return doc


def dyadic_ladder(total: int, start_exp: int = 10) -> list[int]:
    out = []
    n = 2**start_exp
    while n < total:
        out.append(n)
        n *= 2
    out.append(total)
    return out


class _Stage:
    """Context manager that rewraps failures with the stage name."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, etype, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        return False


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def resolve_params(cfg: RunConfig, h: PauliSum) -> Params:
    if not cfg.vqe:
        return Params(*cfg.params)
    vcfg = VqeConfig(
        sweeps=cfg.sweeps,
        shots_per_expectation=cfg.vqe_shots,
        seed=cfg.seed,
        provider="sampled",
        noise=parse_noise(cfg.noise),
        track_exact=False,
    )
    provider = SampledProvider(h, cfg.vqe_shots, vcfg.noise, (cfg.seed, 2))
    return run_vqe(vcfg, h, provider)[-1].params


def cmd_ip(cfg: RunConfig, write: bool = True) -> IpResult:
    """Run the full pipeline and (optionally) write its outputs to ``cfg.out``.

    Files: ``shots.csv``, ``shot_plan.json``, ``prefix_ladder.csv``,
    ``ip_result.json``. Each is written as soon as its stage finishes.
    """
    cfg.validate()
    out = Path(cfg.out)
    prov = {"config_hash": cfg.config_hash(), "seed": cfg.seed}
    header = cfg.provenance()

    with _Stage("load"):
        h = cfg.load_hamiltonian()
        noise = parse_noise(cfg.noise)
        m = decode(h)
        e0 = exact_ground(m, cfg.basis_states)[0]
        in_basis = ip_ev(e0, cfg.cation_energy, cfg.hartree_to_ev)

    with _Stage("params"):
        p = resolve_params(cfg, h)

    if cfg.exact:
        with _Stage("exact"):
            psi = ansatz_state(p)
            est = {
                "exact": estimator_from_value(e0, cfg.cation_energy, cfg.hartree_to_ev),
                "qcm": estimator_from_value(
                    qcm_energy_exact(h, psi), cfg.cation_energy, cfg.hartree_to_ev
                ),
                "h_expectation": estimator_from_value(
                    exact_energy(h, p), cfg.cation_energy, cfg.hartree_to_ev
                ),
            }
            result = IpResult(p, e0, in_basis, est)
        if write:
            with _Stage("write"):
                _write(out / "ip_result.json", json.dumps(result.to_dict(prov), indent=2) + "\n")
        return result

    bases = [str(b) for b, _ in group_into_bases(h)]
    with _Stage("pilot"):
        pilot = measure_bases(p, uniform_split(cfg.pilot * len(bases), bases), noise, (cfg.seed, 0))
    with _Stage("plan"):
        plan = plan_shots(h, cfg.shots, pilot)
        if write:
            _write(out / "shot_plan.json", plan.to_json(provenance=prov) + "\n")
    with _Stage("sample"):
        table = measure_bases(p, plan.as_dict(), noise, (cfg.seed, 1))
        if write:
            table.to_csv(out / "shots.csv", header)
    with _Stage("prefix"):
        if cfg.ladder:
            totals = []
            for n in dyadic_ladder(table.total):
                try:
                    prefix_sizes(table, n)
                except ValueError:
                    continue
                totals.append(n)
            ladder = prefix_analysis(h, table, totals, cfg.replicates, cfg.seed)
            if write:
                _write(out / "prefix_ladder.csv", prefix_csv(ladder, None, header))
    with _Stage("bootstrap"):
        summaries = bootstrap_many(h, table, cfg.replicates, seed=cfg.seed)
        est = {
            k: estimator_from_summary(s, cfg.cation_energy, cfg.hartree_to_ev)
            for k, s in summaries.items()
        }
    result = IpResult(
        p, e0, in_basis, est, plan.as_dict(), dict(zip(plan.bases, plan.sigma)), table.total
    )
    if write:
        with _Stage("write"):
            _write(out / "ip_result.json", json.dumps(result.to_dict(prov), indent=2) + "\n")
    return result


def dump_circuits(p: Params, bases, path: Path) -> None:
    blocks = []
    for b in bases:
        c = measurement_circuit(p, b)
        blocks.append(f"# {c.label}\n{c.dump()}")
    _write(path, "\n".join(blocks) + "\n")


def study_grid(shots, sweeps, trials: int, seed: int) -> list[tuple[int, int, float]]:
    from .optimizer import success_probability

    return [
        (int(n), int(s), success_probability(int(n), int(s), trials, seed))
        for n in shots
        for s in sweeps
    ]


def ip_interval_widths(ladder) -> dict[str, list[tuple[int, float]]]:
    """``estimator -> [(N, energy interval width)]`` from a prefix ladder."""
    out: dict[str, list[tuple[int, float]]] = {}
    for n, summaries in ladder:
        for k, s in summaries.items():
            out.setdefault(k, []).append((n, s.width))
    return out


def loglog_slope(points) -> float:
    x = np.log([n for n, _ in points])
    y = np.log([w for _, w in points])
    return float(np.polyfit(x, y, 1)[0])
