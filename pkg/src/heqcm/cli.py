"""Command-line driver.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure
(no usable bootstrap replicates, discriminant or singular QCM), 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline as pl
from .bootstrap import BootstrapUnavailable
from .circuits import HARTREE_FOCK_PARAMS, ansatz_state
from .encoding import decode, encode, exact_ground, load_matrix, matrix_to_dict, pad_matrix
from .estimation import plan_shots, uniform_split
from .moments import DiscriminantError, QCMError, cumulants, exact_moments, hollenberg_witte, moments_from_shots
from .optimizer import VqeConfig, run_vqe, trajectory_csv
from .pauli import PauliSum, group_into_bases
from .simulator import ShotTable, measure_bases

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--noise", help="none | calibrated | custom:<path>")
    p.add_argument("--params", help="theta1,theta2")
    p.add_argument("--exact", action="store_true", help="exact expectations, no sampling")
    p.add_argument("--out", help="output directory (or file for single-output commands)")
    p.add_argument("--dump-circuits", action="store_true", help="also write the measurement circuits")
    p.add_argument("--hamiltonian", help="PauliSum JSON (default: built-in helium)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heqcm", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="matrix JSON <-> Pauli-sum JSON")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="matrix JSON to encode (zero-padded to a power of two)")
    src.add_argument("--decode", help="Pauli-sum JSON to decode")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("exact", help="diagonalise the Hamiltonian")
    _common(p)

    p = sub.add_parser("vqe", help="sequential Rotosolve sweeps")
    _common(p)
    p.add_argument("--sweeps", type=int, default=3)
    p.add_argument("--sampled", action="store_true", help="use shot-based expectations")

    p = sub.add_parser("qcm", help="moments, cumulants and the Hollenberg-Witte energy")
    _common(p)
    p.add_argument("--shots-file", help="shots CSV to evaluate instead of sampling")

    p = sub.add_parser("shot-plan", help="variance-weighted shot allocation")
    _common(p)
    p.add_argument("--total", type=int, required=True)
    p.add_argument("--pilot", type=int, default=pl.DEFAULT_PILOT, help="pilot shots per basis")

    p = sub.add_parser("study", help="VQE success probability over a grid")
    _common(p)
    p.add_argument("--sweeps", default="3", help="comma-separated sweep counts")
    p.add_argument("--trials", type=int, default=200)

    p = sub.add_parser("ip", help="full ionisation-potential pipeline")
    _common(p)
    p.add_argument("--replicates", type=int)
    return ap


def _run_config(args) -> pl.RunConfig:
    data = {}
    if getattr(args, "config", None):
        cfg = pl.RunConfig.load(args.config)
        data = cfg.__dict__.copy()
    overrides = {
        "seed": args.seed,
        "shots": args.shots,
        "noise": args.noise,
        "out": args.out,
        "hamiltonian": args.hamiltonian,
        "replicates": getattr(args, "replicates", None),
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.params is not None:
        data["params"] = tuple(pl.parse_params(args.params))
    if args.exact:
        data["exact"] = True
    return pl.RunConfig.from_dict(data)


def _emit(text: str, out: str | None, default_name: str | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if default_name and (path.is_dir() or not path.suffix):
        path = path / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def cmd_encode(args) -> None:
    if args.matrix:
        # CI matrices of any size are zero-padded into the unused states
        _emit(_json(encode(pad_matrix(load_matrix(args.matrix))).to_dict()), args.out)
    else:
        _emit(_json(matrix_to_dict(decode(PauliSum.load(args.decode)))), args.out)


def cmd_exact(args) -> None:
    cfg = _run_config(args)
    h = cfg.load_hamiltonian()
    m = decode(h)
    e_all = exact_ground(m)[0]
    e0, vec = exact_ground(m, cfg.basis_states)
    doc = {
        "provenance": {"config_hash": cfg.config_hash(), "seed": cfg.seed},
        "ground_energy_ha": e0,
        "ground_energy_unrestricted_ha": e_all,
        "ground_state": [float(x) for x in vec.real],
        "hartree_fock_energy_ha": float(m[0, 0].real),
        "in_basis_ip_ev": pl.ip_ev(e0, cfg.cation_energy, cfg.hartree_to_ev),
    }
    _emit(_json(doc), args.out, "exact.json")


def cmd_vqe(args) -> None:
    cfg = _run_config(args)
    h = cfg.load_hamiltonian()
    initial = pl.parse_params(args.params) or HARTREE_FOCK_PARAMS
    vcfg = VqeConfig(
        sweeps=args.sweeps,
        shots_per_expectation=args.shots or 8192,
        initial=initial,
        seed=cfg.seed,
        provider="sampled" if args.sampled else "exact",
        noise=pl.parse_noise(cfg.noise) if args.sampled else None,
    )
    records = run_vqe(vcfg, h)
    _emit(trajectory_csv(records, cfg.provenance()), args.out, "trajectory.csv")


def cmd_qcm(args) -> None:
    cfg = _run_config(args)
    h = cfg.load_hamiltonian()
    p = pl.Params(*cfg.params)
    if args.shots_file:
        table = ShotTable.from_csv(args.shots_file)
        mom = moments_from_shots(h, table)
        source = args.shots_file
    elif cfg.exact:
        mom = exact_moments(h, ansatz_state(p))
        source = "exact"
    else:
        bases = [str(b) for b, _ in group_into_bases(h)]
        table = measure_bases(p, uniform_split(args.shots or 8192, bases), pl.parse_noise(cfg.noise), cfg.seed)
        mom = moments_from_shots(h, table)
        source = "sampled"
    cum = cumulants(mom)
    errors = {"discriminant": 0, "singular": 0}
    failure = None
    try:
        e = hollenberg_witte(cum)
    except QCMError as exc:
        e, failure = None, exc
        errors["discriminant" if isinstance(exc, DiscriminantError) else "singular"] += 1
    doc = {
        "provenance": {"config_hash": cfg.config_hash(), "seed": cfg.seed},
        "source": source,
        "params": list(p),
        "moments": list(mom),
        "cumulants": list(cum),
        "qcm_energy": e,
        "h_expectation": mom.m1,
        "qcm_ip_ev": None if e is None else pl.ip_ev(e, cfg.cation_energy, cfg.hartree_to_ev),
        "errors": errors,
    }
    _emit(_json(doc), args.out, "qcm.json")
    _maybe_dump(args, cfg)
    if failure is not None:
        raise failure


def cmd_shot_plan(args) -> None:
    cfg = _run_config(args)
    h = cfg.load_hamiltonian()
    p = pl.Params(*cfg.params)
    bases = [str(b) for b, _ in group_into_bases(h)]
    pilot = measure_bases(p, uniform_split(args.pilot * len(bases), bases), pl.parse_noise(cfg.noise), (cfg.seed, 0))
    plan = plan_shots(h, args.total, pilot)
    prov = {"config_hash": cfg.config_hash(), "seed": cfg.seed}
    _emit(plan.to_json(provenance=prov) + "\n", args.out, "shot_plan.json")
    _maybe_dump(args, cfg)


def cmd_study(args) -> None:
    cfg = _run_config(args)
    shots = [args.shots or 4096]
    try:
        sweeps = [int(s) for s in args.sweeps.split(",")]
    except ValueError:
        raise pl.ConfigError(f"--sweeps expects integers, got {args.sweeps!r}") from None
    rows = pl.study_grid(shots, sweeps, args.trials, cfg.seed)
    lines = [f"# {cfg.provenance()}", "shots,sweeps,success_fraction"]
    lines += [f"{n},{s},{f!r}" for n, s, f in rows]
    _emit("\n".join(lines) + "\n", args.out, "study.csv")


def cmd_ip(args) -> None:
    cfg = _run_config(args)
    result = pl.cmd_ip(cfg)
    _maybe_dump(args, cfg)
    est = result.estimators
    for name, r in est.items():
        band = "within" if r.chemically_accurate else "outside"
        width = "" if r.ip_width is None else f" width {r.ip_width:.4f}"
        print(f"{name:14s} IP {r.ip_ev:.4f} eV{width} ({band} chemical accuracy)")


def _maybe_dump(args, cfg: pl.RunConfig) -> None:
    if args.dump_circuits:
        h = cfg.load_hamiltonian()
        bases = [str(b) for b, _ in group_into_bases(h)]
        pl.dump_circuits(pl.Params(*cfg.params), bases, Path(cfg.out) / "circuits.jsonl")


COMMANDS = {
    "encode": cmd_encode,
    "exact": cmd_exact,
    "vqe": cmd_vqe,
    "qcm": cmd_qcm,
    "shot-plan": cmd_shot_plan,
    "study": cmd_study,
    "ip": cmd_ip,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except pl.PipelineError as exc:
        print(f"heqcm: {exc}", file=sys.stderr)
        return _code(exc.cause)
    except Exception as exc:  # mapped to exit codes below
        print(f"heqcm: {exc}", file=sys.stderr)
        return _code(exc)
    return EXIT_OK


def _code(exc: BaseException) -> int:
    if isinstance(exc, (QCMError, BootstrapUnavailable)):
        return EXIT_NUMERIC
    if isinstance(exc, (FileNotFoundError, IsADirectoryError, PermissionError)):
        return EXIT_IO
    if isinstance(exc, (ValueError, KeyError)):
        return EXIT_CONFIG
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc


if __name__ == "__main__":
    sys.exit(main())
