import math

import numpy as np
import pytest

from heqcm.circuits import OPTIMAL_PARAMS, Circuit, Gate, Params, ansatz_native, measurement_circuit, run
from heqcm.simulator import (
    NoiseModel,
    ShotTable,
    calibrate_noise,
    evolve,
    helium_noise,
    measure_bases,
    sample_shots,
)
from oracles import noisy_distribution

CHI2_DF3_999 = 16.266  # 99.9% quantile of chi-square with 3 degrees of freedom


def chi_square(outcomes, p):
    n = len(outcomes)
    counts = np.bincount(outcomes, minlength=len(p))
    mask = p > 0
    assert counts[~mask].sum() == 0
    return float(np.sum((counts[mask] - n * p[mask]) ** 2 / (n * p[mask])))


def within_3_sigma(outcomes, p):
    n = len(outcomes)
    freq = np.bincount(outcomes, minlength=len(p)) / n
    sigma = np.sqrt(p * (1 - p) / n)
    return np.all(np.abs(freq - p) <= 3 * sigma + 1e-12)


def test_evolve_examples(rng):
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert np.array_equal(evolve(Circuit(2, ()), psi), psi)
    e0 = np.zeros(4, complex)
    e0[0] = 1
    out = evolve(ansatz_native(Params(-math.pi, 0)), e0)
    assert abs(abs(out[0]) - 1) < 1e-12
    for _ in range(100):
        p = Params(*rng.uniform(-math.pi, math.pi, 2))
        assert abs(np.linalg.norm(evolve(ansatz_native(p), e0)) - 1) < 1e-12
    with pytest.raises(ValueError):
        evolve(Circuit(2, ()), np.ones(8))


def test_calibration():
    m = calibrate_noise(0.0685, 1.85e-4, 8.8e-4)
    assert m.przz_a == pytest.approx(1.6516, abs=1e-4)
    assert m.przz_b == pytest.approx(0.1742, abs=1e-4)
    assert m.fault(math.pi / 2) == pytest.approx(8.8e-4, rel=1e-14)
    assert abs(m.fault(0.0685) - 1.85e-4) < 1e-9
    assert m.fault(-0.0685) == m.fault(0.0685)
    assert helium_noise() == m
    with pytest.raises(ValueError, match="singular"):
        calibrate_noise(math.pi / 2, 1e-4, 8.8e-4)


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(1.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        NoiseModel(0.1, -1.0, 0.0)
    with pytest.raises(ValueError):
        NoiseModel(0.5, 2.0, 0.5)  # fault(pi) = 1.25
    m = helium_noise()
    assert NoiseModel.from_dict(m.to_dict()) == m
    with pytest.raises(ValueError):
        NoiseModel.from_dict({"p2": 0.1, "bogus": 1})


def test_noiseless_zero_state():
    out = sample_shots(Circuit(2, (), "empty"), 1000, None, seed=3)
    assert np.all(out == 0)


def test_readout_only_flips():
    noise = NoiseModel(0.0, 0.0, 0.0, read_e01=0.5, read_e10=0.5)
    n = 100_000
    out = sample_shots(Circuit(2, (), "empty"), n, noise, seed=11)
    first = (out >> 1) & 1
    assert abs(first.mean() - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_asymmetric_readout_direction():
    noise = NoiseModel(0.0, 0.0, 0.0, read_e01=0.0, read_e10=0.3)
    c = Circuit(2, (Gate("X", (0,)),), "x0")
    out = sample_shots(c, 50_000, noise, seed=1)
    # qubit 0 is truly 1 and flips to 0 at rate read_e10; qubit 1 never flips
    assert np.all(out & 1 == 0)
    assert abs(np.mean(out >> 1 == 0) - 0.3) < 0.01


def test_calibrated_zz_matches_density_matrix(noise):
    c = measurement_circuit(OPTIMAL_PARAMS, "ZZ")
    p = noisy_distribution(c, noise)
    out = sample_shots(c, 100_000, noise, seed=5)
    assert within_3_sigma(out, p)
    assert chi_square(out, p) < CHI2_DF3_999


@pytest.mark.parametrize("basis", ["ZZ", "XZ", "ZX", "XX", "YY", "XY", "YZ"])
def test_strong_noise_matches_density_matrix(basis):
    noise = NoiseModel(0.4, 1.0, 0.5, read_e01=0.03, read_e10=0.08)
    c = measurement_circuit(Params(1.1, 2.3), basis)
    p = noisy_distribution(c, noise)
    out = sample_shots(c, 100_000, noise, seed=(9, 1))
    assert chi_square(out, p) < CHI2_DF3_999


def test_noiseless_chi_square_random_circuits(rng):
    for k in range(5):
        c = measurement_circuit(Params(*rng.uniform(-math.pi, math.pi, 2)), "ZX")
        p = np.abs(run(c)) ** 2
        out = sample_shots(c, 100_000, None, seed=k)
        assert chi_square(out, p) < CHI2_DF3_999


def test_noise_monotonicity():
    base = helium_noise()
    for basis in ["ZZ", "XZ", "ZX", "XX", "YY"]:
        c = measurement_circuit(OPTIMAL_PARAMS, basis)
        ideal = noisy_distribution(c, None)
        tvs = []
        for p2 in (1e-4, 8.8e-4, 1e-2):
            m = NoiseModel(p2, base.przz_a, base.przz_b, 0.0, 0.0)
            tvs.append(0.5 * np.abs(noisy_distribution(c, m) - ideal).sum())
        assert tvs[0] <= tvs[1] <= tvs[2]


def test_determinism_and_chunking(noise):
    c = measurement_circuit(OPTIMAL_PARAMS, "XZ")
    full = sample_shots(c, 3000, noise, seed=42)
    again = sample_shots(c, 3000, noise, seed=42)
    assert np.array_equal(full, again)
    parts = [sample_shots(c, n, noise, seed=42, start=s) for s, n in [(0, 7), (7, 1000), (1007, 1993)]]
    assert np.array_equal(np.concatenate(parts), full)
    assert not np.array_equal(sample_shots(c, 3000, noise, seed=43), full)
    with pytest.raises(ValueError):
        sample_shots(c, 0)


def test_measure_bases_order_independent(noise):
    a = measure_bases(OPTIMAL_PARAMS, {"ZZ": 500, "XX": 300}, noise, seed=4)
    b = measure_bases(OPTIMAL_PARAMS, {"XX": 300, "ZZ": 500}, noise, seed=4)
    for k in ("ZZ", "XX"):
        assert np.array_equal(a.outcomes[k], b.outcomes[k])
    assert a.total == 800 and a.shots("XX") == 300


def test_shot_table_csv_round_trip(tmp_path, noise):
    t = measure_bases(OPTIMAL_PARAMS, {"ZZ": 50, "YY": 20}, noise, seed=1)
    path = tmp_path / "shots.csv"
    text = t.to_csv(path, "run=abc seed=1")
    assert text.splitlines()[:3] == ["# run=abc seed=1", "basis,shot_index,outcome", f"ZZ,0,{t.outcomes['ZZ'][0]:02b}"]
    back = ShotTable.from_csv(path)
    assert back.bases == t.bases
    for b in t.bases:
        assert np.array_equal(back.outcomes[b], t.outcomes[b])
        assert back.counts(b).sum() == t.shots(b)


@pytest.mark.parametrize(
    "body, message",
    [
        ("basis,shot_index,outcome\nZZ,0,0x\n", ":2: field 'outcome'"),
        ("basis,shot_index,outcome\nZZ,0,00\nZZ,5,01\n", ":3: shot_index 5 out of order"),
        ("basis,shot_index,outcome\nZZ,0\n", ":2: expected 3 fields"),
        ("basis,shot_index,outcome\nZZ,a,00\n", ":2: field 'shot_index'"),
        ("basis,shot_index,outcome\nZZ,0,000\n", ":2: width mismatch"),
        ("b,c\nZZ,0,00\n", "missing header"),
    ],
)
def test_shot_table_parse_errors(body, message):
    with pytest.raises(ValueError, match=message):
        ShotTable.parse_csv(body, "f.csv")


def test_truncate_preserves_order(noise):
    t = measure_bases(OPTIMAL_PARAMS, {"ZZ": 100, "XX": 40}, noise, seed=2)
    s = t.truncate({"ZZ": 10, "XX": 4})
    assert np.array_equal(s.outcomes["ZZ"], t.outcomes["ZZ"][:10])
    assert s.total == 14
