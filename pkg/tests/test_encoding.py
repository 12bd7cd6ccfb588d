import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian, random_symmetric
from heqcm.encoding import (
    HELIUM_STATES,
    decode,
    encode,
    exact_ground,
    load_matrix,
    matrix_from_dict,
    pad_matrix,
    save_matrix,
)
from heqcm.pauli import PauliSum
from oracles import brute_force_pauli_coeffs

# 3x3 CI block written out by hand from the helium Pauli coefficients
HAND_CI = np.array(
    [
        [-2.8615, 0.24782, 0.3096],
        [0.24782, 0.9071, 0.0758],
        [0.3096, 0.0758, 1.8199],
    ]
)
E_EXACT = -2.897325920436535  # frozen from a dense eigensolve of HAND_CI


def test_golden_constant_matches_hand_matrix():
    assert np.linalg.eigvalsh(HAND_CI)[0] == pytest.approx(E_EXACT, abs=1e-12)


def test_encode_examples():
    assert encode(np.eye(2)) == PauliSum({"I": 1.0})
    assert encode(np.diag([1.0, -1.0])) == PauliSum({"Z": 1.0})


def test_helium_round_trip(h):
    back = encode(decode(h))
    assert back.allclose(h, atol=1e-12)
    assert set(back.strings) == set(h.strings)


def test_decode_helium_matches_hand_block(h):
    m = decode(h)
    assert m[0, 0] == pytest.approx(-2.8615, abs=1e-12)
    assert np.allclose(m[:3, :3], HAND_CI, atol=1e-12)
    assert abs(m[3, 3]) <= 5e-4
    assert np.all(np.abs(m[3, :3]) <= 5e-4)


def test_decode_identity():
    assert np.allclose(decode(PauliSum({"II": 2.5})), 2.5 * np.eye(4))


def test_encode_matches_trace_formula(rng):
    for n in (1, 2, 3):
        m = random_hermitian(rng, 2**n)
        got = encode(m)
        want = brute_force_pauli_coeffs(m)
        assert set(got.strings) == set(want)
        for s, c in want.items():
            assert got.coeff(s) == pytest.approx(c.real, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_round_trips(n, seed):
    rng = np.random.default_rng(seed)
    m = random_hermitian(rng, 2**n)
    assert np.allclose(decode(encode(m)), m, atol=1e-10)
    hh = encode(m)
    assert encode(decode(hh)).allclose(hh, atol=1e-10)


def test_round_trip_100_real_symmetric(rng):
    worst = 0.0
    for _ in range(100):
        m = random_symmetric(rng, 4)
        worst = max(worst, np.max(np.abs(decode(encode(m)) - m)))
    assert worst <= 1e-10


def test_real_symmetric_support_is_even_y(rng):
    for n in (2, 3):
        for _ in range(20):
            hh = encode(random_symmetric(rng, 2**n))
            assert all(s.count("Y") % 2 == 0 for s in hh.strings)


def test_parseval(rng):
    for n in (1, 2, 3):
        m = random_hermitian(rng, 2**n)
        hh = encode(m)
        total = sum(c * c for _, c in hh) * 2**n
        assert total == pytest.approx(np.sum(np.abs(m) ** 2), abs=1e-10)


def test_encode_errors():
    with pytest.raises(ValueError, match="Hermitian"):
        encode(np.array([[0, 1], [0, 0]], dtype=float))
    with pytest.raises(ValueError, match="power of two"):
        encode(np.eye(3))


def test_pad_matrix():
    p = pad_matrix(HAND_CI)
    assert p.shape == (4, 4)
    assert np.all(p[3] == 0) and np.all(p[:, 3] == 0)
    assert pad_matrix(np.eye(4)).shape == (4, 4)


def test_exact_ground_examples(h):
    e, v = exact_ground(np.diag([0.0, 1.0, 2.0, 3.0]))
    assert e == 0.0
    assert np.allclose(v, [1, 0, 0, 0])
    e, v = exact_ground(decode(h), HELIUM_STATES)
    assert e == pytest.approx(E_EXACT, abs=1e-12)
    assert e == pytest.approx(-2.8974, abs=5e-4)
    assert v[3] == 0 and v[0] > 0
    assert np.linalg.norm(v) == pytest.approx(1.0)
    e_bits, _ = exact_ground(decode(h), ["00", "01", "10"])
    assert e_bits == e


def test_exact_ground_variational_bound(rng):
    for _ in range(20):
        m = random_symmetric(rng, 4)
        sub = [0, 2, 3]
        e, _ = exact_ground(m, sub)
        assert e <= min(m[i, i] for i in sub) + 1e-12


def test_matrix_file_round_trip(tmp_path, rng):
    m = random_hermitian(rng, 4)
    save_matrix(m, tmp_path / "m.json")
    assert np.allclose(load_matrix(tmp_path / "m.json"), m)
    real = matrix_from_dict({"dim": 2, "real": [[1, 0], [0, 2]]})
    assert real.dtype == float
    with pytest.raises(ValueError):
        matrix_from_dict({"dim": 3, "real": [[1, 0], [0, 2]]})
