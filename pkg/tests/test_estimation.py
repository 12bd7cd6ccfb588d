import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heqcm.circuits import HARTREE_FOCK_PARAMS, OPTIMAL_PARAMS, ansatz_state
from heqcm.encoding import HELIUM_STATES, decode, exact_ground
from heqcm.estimation import (
    CoverageError,
    allocate,
    default_floor,
    hamiltonian_expectation,
    pauli_expectation,
    plan_shots,
    uniform_split,
)
from heqcm.pauli import PauliSum, group_into_bases, pauli_matrix
from heqcm.simulator import ShotTable, measure_bases

BASES = ["ZZ", "XZ", "ZX", "XX", "YY"]


def test_pauli_expectation_examples():
    shots = np.array([0, 0, 0, 3])
    assert pauli_expectation(shots, "ZZ", "ZZ")[0] == 1.0
    assert pauli_expectation(shots, "ZZ", "IZ")[0] == 0.5
    assert pauli_expectation(shots, "ZZ", "ZI")[0] == 0.5
    assert pauli_expectation(shots, "XY", "II") == (1.0, 0.0)
    with pytest.raises(CoverageError):
        pauli_expectation(shots, "ZZ", "XZ")


def test_pauli_expectation_standard_error():
    shots = np.array([0, 2, 0, 2, 0, 0])
    mean, se = pauli_expectation(shots, "ZZ", "ZI")
    x = np.array([1, -1, 1, -1, 1, 1])
    assert mean == pytest.approx(x.mean())
    assert se == pytest.approx(x.std(ddof=1) / math.sqrt(6))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=50), st.sampled_from(["ZZ", "IZ", "ZI"]))
def test_pauli_expectation_bounded(shots, p):
    v, _ = pauli_expectation(np.array(shots), "ZZ", p)
    assert -1 <= v <= 1


@pytest.fixture(scope="module")
def big_noiseless():
    return measure_bases(OPTIMAL_PARAMS, uniform_split(1_000_000, BASES), None, seed=8)


def test_pauli_expectations_converge(h, big_noiseless):
    psi = ansatz_state(OPTIMAL_PARAMS)
    groups = group_into_bases(h)
    for basis, members in groups:
        for s in members:
            exact = float(np.real(np.vdot(psi, pauli_matrix(s) @ psi)))
            v, se = pauli_expectation(big_noiseless.outcomes[str(basis)], basis, s)
            assert abs(v - exact) <= 4 * se + 1e-12


def test_hamiltonian_expectation_hartree_fock(h):
    t = measure_bases(HARTREE_FOCK_PARAMS, uniform_split(20_000, BASES), None, seed=1)
    v, se = hamiltonian_expectation(h, t)
    assert abs(v - (-2.8615)) <= 4 * se
    # the diagonal group is deterministic at |00>
    assert np.all(t.outcomes["ZZ"] == 0)


def test_hamiltonian_expectation_identity(big_noiseless):
    assert hamiltonian_expectation(PauliSum({"II": 1.7}), big_noiseless) == (1.7, 0.0)


def test_hamiltonian_expectation_optimal(h, big_noiseless):
    v, se = hamiltonian_expectation(h, big_noiseless)
    e0, _ = exact_ground(decode(h), HELIUM_STATES)
    assert abs(v - e0) <= 4 * se
    psi = ansatz_state(OPTIMAL_PARAMS)
    exact = float(np.real(np.vdot(psi, decode(h) @ psi)))
    assert abs(v - exact) <= 4 * se


def test_hamiltonian_expectation_uncovered(h):
    t = measure_bases(OPTIMAL_PARAMS, {"ZZ": 10}, None)
    with pytest.raises(CoverageError):
        hamiltonian_expectation(h, t)


def test_hamiltonian_expectation_linear(h, rng):
    t = measure_bases(OPTIMAL_PARAMS, uniform_split(5000, BASES), None, seed=2)
    g = PauliSum({s: rng.normal() for s in h.strings})
    a, b = 0.7, -1.3
    combo = h * a + g * b
    lhs = hamiltonian_expectation(combo, t)[0]
    rhs = a * hamiltonian_expectation(h, t)[0] + b * hamiltonian_expectation(g, t)[0]
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_allocate_examples():
    assert allocate(7000, [3, 1, 1, 1, 1], 100) == [3000, 1000, 1000, 1000, 1000]
    assert allocate(1000, [2.0] * 5, 10) == [200] * 5
    with pytest.raises(ValueError):
        allocate(100, [1, 1, 1, 1, 1], 30)


def test_allocate_invariants(rng):
    for _ in range(200):
        m = int(rng.integers(2, 7))
        sigma = rng.exponential(size=m) * (rng.random(m) > 0.2)
        total = int(rng.integers(50, 5000))
        floor = default_floor(total, m)
        if total < m * floor:
            continue
        n = allocate(total, sigma, floor)
        assert sum(n) == total
        assert min(n) >= floor
        order = np.argsort(sigma)
        for i, j in zip(order, order[1:]):
            if sigma[j] > sigma[i]:
                assert n[j] >= n[i] or n[j] == floor


def _objective(sigma, n):
    return sum(s * s / k for s, k in zip(sigma, n))


def test_allocate_near_optimal_brute_force(rng):
    for _ in range(20):
        sigma = rng.uniform(0.1, 3.0, 3)
        total, floor = 40, 2
        allocs = [
            (a, b, total - a - b)
            for a, b in itertools.product(range(floor, total), repeat=2)
            if total - a - b >= floor
        ]
        best = min(allocs, key=lambda n: _objective(sigma, n))
        moves = [
            tuple(best[k] + (1 if k == i else -1 if k == j else 0) for k in range(3))
            for i in range(3)
            for j in range(3)
            if i != j
        ]
        bound = max(_objective(sigma, n) for n in moves if min(n) >= floor)
        got = allocate(total, sigma, floor)
        assert _objective(sigma, got) <= bound + 1e-12


def test_plan_shots_helium(h, noise):
    pilot = measure_bases(OPTIMAL_PARAMS, uniform_split(512 * 5, BASES), noise, seed=0)
    plan = plan_shots(h, 776_900, pilot)
    d = plan.as_dict()
    assert sum(d.values()) == 776_900
    assert max(d, key=d.get) == "ZZ"
    assert plan.bases[0] == "ZZ"
    assert all(n >= default_floor(776_900, 5) for n in d.values())


def test_plan_shots_equal_sigma_uniform():
    # two bases with identical single-term observables and mirrored outcomes
    h = PauliSum({"ZI": 1.0, "XI": 1.0})
    pilot = ShotTable(2, {"ZZ": np.array([0, 2] * 50), "XZ": np.array([2, 0] * 50)})
    plan = plan_shots(h, 1000, pilot)
    assert plan.shots == (500, 500)


def test_plan_shots_needs_pilot(h):
    pilot = ShotTable(2, {b: np.array([0]) for b in BASES})
    with pytest.raises(ValueError):
        plan_shots(h, 1000, pilot)


def test_shot_plan_json(h, noise):
    pilot = measure_bases(OPTIMAL_PARAMS, uniform_split(500, BASES), noise, seed=0)
    doc = plan_shots(h, 10_000, pilot).to_json()
    assert '"total": 10000' in doc and '"sigma"' in doc
