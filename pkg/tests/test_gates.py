import numpy as np
import pytest

from quditgates.gates import (
    GateSpec, KINDS, build_corpus, cnot_general, controlled_u, diagonal_gate, haar_gate,
    haar_random, is_scalar_operator, named_gates, q_phi, u_theta_phi,
)
from quditgates.linalg import unitarity_residual
from quditgates.primitivity import diagonal_primitivity, is_primitive, schmidt_ratios

SX = np.array([[0, 1], [1, 0]])


def test_cnot_d2_is_standard():
    expected = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    assert np.array_equal(cnot_general(2).matrix, expected)


def test_cnot_d3_modular_action():
    x = cnot_general(3).matrix
    assert x[1 * 3 + 0, 1 * 3 + 2] == 1  # |12> -> |10>
    assert np.sum(np.abs(x[:, 5])) == 1


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_cnot_order_divides_d(d):
    x = cnot_general(d).matrix
    assert np.allclose(np.linalg.matrix_power(x, d), np.eye(d * d))
    assert np.all((x == 0) | (x == 1))


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_cnot_imprimitive_with_bell_type_witness(d):
    x = cnot_general(d)
    assert not is_primitive(x).is_primitive
    inp = np.zeros(d)
    inp[:2] = 1 / np.sqrt(2)
    out = x.matrix @ np.kron(inp, np.eye(d)[0])
    expected = np.zeros(d * d)
    expected[0] = expected[d + 1] = 1 / np.sqrt(2)
    assert np.allclose(out, expected)


def test_controlled_identity():
    assert np.allclose(controlled_u(np.eye(3)).matrix, np.eye(9))


def test_controlled_scalar_primitive():
    assert is_primitive(controlled_u(np.exp(0.3j) * np.eye(2))).is_primitive


def test_controlled_sigma_x_imprimitive():
    v = is_primitive(controlled_u(SX))
    assert not v.is_primitive
    r1, r2 = schmidt_ratios(controlled_u(SX))
    assert r1 > 0.5 and r2 > 0.5


def test_controlled_block_structure(rng):
    u = haar_random(3, rng)
    m = controlled_u(u).matrix
    assert np.allclose(m[:3, :3], u)
    assert np.allclose(m[3:, 3:], np.eye(6))
    assert np.allclose(m[:3, 3:], 0) and np.allclose(m[3:, :3], 0)


@pytest.mark.parametrize("d", [2, 3])
def test_controlled_primitive_iff_scalar(d, rng):
    cases = [haar_random(d, rng) for _ in range(5)]
    cases += [np.exp(1j * rng.uniform(0, 6)) * np.eye(d) for _ in range(5)]
    for u in cases:
        assert is_primitive(controlled_u(u)).is_primitive == is_scalar_operator(u)


def test_q_phi_zero_is_identity():
    assert np.array_equal(q_phi(0).matrix, np.eye(4))


@pytest.mark.parametrize("phi", [0.1, 1.0, np.pi / 2, 3.0, -2.0])
def test_q_phi_det(phi):
    assert np.linalg.det(q_phi(phi).matrix) == pytest.approx(np.exp(1j * phi))
    assert q_phi(phi).matrix[3, 3] == pytest.approx(np.exp(1j * phi))


def test_diagonal_separable_is_product(rng):
    a, b = rng.uniform(0, 6, 3), rng.uniform(0, 6, 3)
    g = diagonal_gate(a[:, None] + b[None, :])
    assert np.allclose(g.matrix, np.kron(np.diag(np.exp(1j * a)), np.diag(np.exp(1j * b))))


def test_diagonal_bad_size():
    with pytest.raises(ValueError):
        diagonal_gate([0, 1, 2])


def test_u_theta_phi_values():
    assert np.allclose(u_theta_phi(0, 1.3).matrix, np.eye(2))
    assert np.allclose(u_theta_phi(np.pi / 2, 0).matrix, -1j * SX)


def test_u_theta_phi_special_on_grid():
    for theta in np.linspace(-4, 4, 17):
        for phi in np.linspace(-4, 4, 17):
            assert np.linalg.det(u_theta_phi(theta, phi).matrix) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("m", [1, 2, 4, 9])
def test_haar_unitary_and_deterministic(m):
    u = haar_random(m, 7)
    assert unitarity_residual(u) <= 1e-12
    assert np.array_equal(u, haar_random(m, 7))
    if m > 1:
        assert not np.array_equal(u, haar_random(m, 8))


def test_haar_gates_imprimitive_d2():
    assert not any(is_primitive(haar_gate(2, seed=s)).is_primitive for s in range(100))


@pytest.mark.parametrize("d", [2, 3])
def test_diagonal_routes_agree(d, rng):
    for k in range(50):
        thetas = rng.uniform(0, 2 * np.pi, (d, d))
        if k % 5 == 0:
            thetas = thetas[:, :1] + thetas[:1, :]
        assert diagonal_primitivity(thetas)[0] == is_primitive(diagonal_gate(thetas)).is_primitive


def test_scalar_detection_tolerance():
    assert is_scalar_operator(np.exp(2j) * np.eye(3))
    assert not is_scalar_operator(np.diag([1, 1, 1 + 1e-6j]) / abs(1 + 1e-6j))


def test_constructors_unitary():
    for name, g in named_gates().items():
        assert unitarity_residual(g.matrix) <= 1e-10, name


@pytest.mark.parametrize("kind", KINDS)
def test_gate_spec_builds(kind):
    params = {
        "q_phi": [1.0], "u_theta_phi": [0.3, 0.2], "diagonal": [0, 0, 0, 1.0],
        "controlled_u": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]],
    }.get(kind, [])
    spec = GateSpec(kind, 2, params, seed=3)
    g = spec.build()
    assert g.d == 2
    assert GateSpec.from_json(spec.to_json()).build().matrix.tolist() == g.matrix.tolist()


def test_gate_spec_validation():
    with pytest.raises(ValueError, match="unknown"):
        GateSpec("toffoli")
    with pytest.raises(ValueError):
        GateSpec("q_phi", params=[])
    with pytest.raises(ValueError):
        GateSpec("q_phi", params=[float("nan")])
    with pytest.raises(ValueError):
        GateSpec("diagonal", d=3, params=[0] * 4)


def test_corpus_composition(corpus):
    assert len(corpus) == 200
    assert {e.gate.d for e in corpus} == {2, 3}
    assert len({e.family for e in corpus}) == 8
    again = build_corpus(200, seed=0)
    assert all(np.array_equal(a.gate.matrix, b.gate.matrix) for a, b in zip(corpus, again))
