import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quditgates.gates import cnot_general, haar_random, q_phi, swap
from quditgates.linalg import Gate
from quditgates.variant import (
    DeterminantContractError, analyze_det, circular_distance, det_phase, family_universality,
    root_of_unity_order, special_universality_verdict,
)


def order_loops(phi, nmax, tol):
    for n in range(1, nmax + 1):
        x = math.fmod(n * phi, 2 * math.pi)
        if min(x, 2 * math.pi - x) <= tol:
            return n
    return None


@pytest.mark.parametrize("phi", [0.0, 0.3, 1.0, np.pi / 2, 3.0, 5.5])
def test_det_phase_q_phi(phi):
    assert det_phase(q_phi(phi)) == pytest.approx(phi, abs=1e-12)


def test_det_phase_known_gates():
    assert det_phase(cnot_general(2)) == pytest.approx(np.pi)
    assert det_phase(swap(2)) == pytest.approx(np.pi)
    assert det_phase(np.eye(9)) == 0.0
    assert det_phase(q_phi(-1.0)) == pytest.approx(2 * np.pi - 1.0)


def test_det_phase_multiplicative(rng):
    for _ in range(10):
        a, b = haar_random(9, rng), haar_random(9, rng)
        diff = det_phase(a @ b) - det_phase(a) - det_phase(b)
        assert circular_distance(diff) <= 1e-10


@pytest.mark.parametrize("phi,order", [(np.pi, 2), (2 * np.pi / 3, 3), (np.pi / 2, 4), (0.0, 1)])
def test_root_orders(phi, order):
    assert root_of_unity_order(phi) == order == order_loops(phi, 10_000, 1e-9)


def test_one_radian_is_not_a_root():
    assert root_of_unity_order(1.0) is None
    assert order_loops(1.0, 10_000, 1e-9) is None


def test_root_order_respects_nmax():
    phi = 2 * np.pi / 7
    assert root_of_unity_order(phi, nmax=6) is None
    assert root_of_unity_order(phi, nmax=7) == 7
    with pytest.raises(ValueError):
        root_of_unity_order(phi, nmax=0)


@settings(max_examples=100, deadline=None)
@given(q=st.integers(1, 200), p=st.integers(0, 400))
def test_rational_angle_order(q, p):
    phi = 2 * np.pi * p / q
    assert root_of_unity_order(phi) == q // math.gcd(p, q)


def test_analyze_det_json():
    rec = analyze_det(q_phi(np.pi / 2)).to_json()
    assert rec["root_order"] == 4 and rec["nmax_searched"] == 10_000
    assert rec["phase"] == pytest.approx(np.pi / 2)


def test_special_verdict_q_one_radian():
    v = special_universality_verdict(q_phi(1.0))
    assert v.imprimitive and v.special_universal
    assert v.det_analysis.root_order is None
    assert "order <= 10000" in v.caveat
    assert v.su_closure_dim == 15 and v.expected_su_dims == (6, 15)


def test_special_verdict_cnot_root_of_unity():
    v = special_universality_verdict(cnot_general(2))
    assert v.imprimitive and not v.special_universal
    assert v.det_analysis.root_order == 2
    assert v.caveat is None
    assert v.su_closure_dim == 15


def test_special_verdict_swap():
    v = special_universality_verdict(swap(2))
    assert not v.imprimitive and not v.special_universal
    assert v.su_closure_dim == 6


def test_special_verdict_d3_dims(rng):
    v = special_universality_verdict(haar_random(9, rng))
    assert v.expected_su_dims == (16, 80)
    assert v.su_closure_dim == 80
    assert v.to_json()["det_analysis"]["nmax_searched"] == 10_000


def test_special_verdict_small_nmax_flips():
    # exp(2 pi i / 5) is found with nmax=5 but not with nmax=4
    g = q_phi(2 * np.pi / 5)
    assert not special_universality_verdict(g, nmax=5).special_universal
    assert special_universality_verdict(g, nmax=4).special_universal


def test_family_single_sample():
    fv = family_universality(q_phi, samples=[np.pi / 2])
    assert fv.universal and fv.witness_phi == pytest.approx(np.pi / 2)
    assert fv.samples == 1


def test_family_default_samples():
    fv = family_universality(q_phi)
    assert fv.samples == 64
    assert fv.universal and fv.witness_phi == pytest.approx(2 * np.pi / 64)
    assert len(fv.imprimitive_phis) == 63  # phi = 0 gives the identity


def test_family_of_scalars_is_not_universal():
    fv = family_universality(lambda phi: Gate(2, 2, np.exp(1j * phi / 4) * np.eye(4)))
    assert not fv.universal and fv.witness_phi is None and fv.imprimitive_phis == []


def test_family_of_products_is_not_universal():
    def member(phi):
        return Gate(2, 2, np.kron(np.diag([np.exp(1j * phi / 2), 1]), np.eye(2)))

    assert not family_universality(member).universal


def test_family_contract_violation():
    with pytest.raises(DeterminantContractError, match="phi=1"):
        family_universality(lambda phi: q_phi(2 * phi), samples=[0.0, 1.0])
