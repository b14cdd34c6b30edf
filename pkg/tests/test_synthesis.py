import json

import numpy as np
import pytest
from scipy.linalg import expm

from quditgates.gates import cnot_general, haar_special, swap
from quditgates.linalg import dist_up_to_phase, embed2, u_basis
from quditgates.synthesis import (
    Circuit, EntanglerLayer, LocalLayer, NoConvergenceError, PrimitiveEntanglerError, ansatz,
    circuit_cost, circuit_unitary, cost_gradient, gradient_check, synthesize,
)

CNOT = cnot_general(2).matrix


def haar_target(d, seed):
    return haar_special(d * d, seed)


def unitary_oracle(c: Circuit) -> np.ndarray:
    """Layer product rebuilt with scipy expm and explicit krons."""
    d = c.d
    basis = u_basis(d)
    u = np.eye(d * d, dtype=complex)
    for l in c.layers:
        if isinstance(l, LocalLayer):
            g = expm(sum(p * b for p, b in zip(l.params, basis)))
            m = np.kron(g, np.eye(d)) if l.slot == 1 else np.kron(np.eye(d), g)
        else:
            m = c.entangler if tuple(l.orientation) == (1, 2) else embed2(c.entangler, 2, 1, 2)
        u = u @ m
    return u


def random_circuit(d, k, rng):
    c = ansatz(d, cnot_general(d), k)
    return c.with_params(rng.normal(size=c.params.size))


def test_empty_circuit_is_identity():
    c = Circuit(2, CNOT, [])
    assert np.array_equal(circuit_unitary(c).matrix, np.eye(4))


def test_single_entangler():
    assert np.array_equal(circuit_unitary(Circuit(2, CNOT, [EntanglerLayer((1, 2))])).matrix, CNOT)
    flipped = circuit_unitary(Circuit(2, CNOT, [EntanglerLayer((2, 1))])).matrix
    assert np.allclose(flipped, swap(2).matrix @ CNOT @ swap(2).matrix)


def test_zero_params_give_identity_locals():
    c = ansatz(3, cnot_general(3), 0)
    assert c.params.size == 18
    assert np.allclose(circuit_unitary(c).matrix, np.eye(9))


def test_ansatz_layout():
    c = ansatz(2, CNOT, 3)
    ents = [l.orientation for l in c.layers if isinstance(l, EntanglerLayer)]
    assert ents == [(1, 2), (2, 1), (1, 2)]
    assert c.num_entanglers == 3 and len(c.layers) == 11
    assert [l.orientation for l in ansatz(2, CNOT, 2, first=(2, 1)).layers
            if isinstance(l, EntanglerLayer)] == [(2, 1), (1, 2)]


@pytest.mark.parametrize("d,k", [(2, 0), (2, 2), (3, 1)])
def test_unitary_matches_oracle(d, k, rng):
    c = random_circuit(d, k, rng)
    assert np.max(np.abs(circuit_unitary(c).matrix - unitary_oracle(c))) <= 1e-10


def test_local_layer_exp_is_unitary(rng):
    for d in (2, 3):
        c = random_circuit(d, 2, rng)
        u = circuit_unitary(c).matrix
        assert np.max(np.abs(u.conj().T @ u - np.eye(d * d))) <= 1e-10


def test_with_params_shape_check():
    with pytest.raises(ValueError):
        ansatz(2, CNOT, 1).with_params(np.zeros(3))


def test_target_equal_to_entangler():
    res = synthesize(cnot_general(2), cnot_general(2), max_entanglers=1)
    assert res.cost <= 1e-12 and res.converged
    res3 = synthesize(cnot_general(3), cnot_general(3), max_entanglers=1)
    assert res3.cost <= 1e-12


def test_three_cnots_make_swap():
    flipped = swap(2).matrix @ CNOT @ swap(2).matrix
    assert np.array_equal(CNOT @ flipped @ CNOT, swap(2).matrix)


def test_swap_synthesis():
    res = synthesize(swap(2), cnot_general(2), max_entanglers=3)
    assert res.cost <= 1e-9
    assert res.circuit.num_entanglers == 3
    assert dist_up_to_phase(circuit_unitary(res.circuit).matrix, swap(2).matrix) <= 1e-9
    assert res.to_json()["entanglers"] == 3


@pytest.mark.parametrize("d,k", [(2, 1), (2, 3), (3, 1)])
def test_gradient_matches_finite_differences(d, k, rng):
    c = random_circuit(d, k, rng)
    target = haar_target(d, 5)
    assert gradient_check(c, target) <= 1e-5


def test_gradient_error_scales_quadratically(rng):
    c = random_circuit(2, 2, rng)
    target = haar_target(2, 1)
    ratio = gradient_check(c, target, h=1e-3) / gradient_check(c, target, h=5e-4)
    assert 3.5 <= ratio <= 4.5


def test_gradient_vanishes_at_exact_solution():
    c = ansatz(2, CNOT, 1)
    assert circuit_cost(c, CNOT) <= 1e-15
    assert np.max(np.abs(cost_gradient(c, CNOT))) <= 1e-12


def test_cost_is_phase_invariant(rng):
    c = random_circuit(2, 2, rng)
    target = haar_target(2, 3)
    base = circuit_cost(c, target)
    for theta in (0.4, 2.0, -3.1):
        assert abs(circuit_cost(c, np.exp(1j * theta) * target) - base) <= 1e-14


def test_history_cumulative_best_is_monotone():
    res = synthesize(haar_target(2, 2), cnot_general(2), max_entanglers=3)
    so_far = [h["best_cost_so_far"] for h in res.history]
    assert all(b <= a for a, b in zip(so_far, so_far[1:]))
    assert so_far[-1] == res.cost
    assert [h["entanglers"] for h in res.history] == list(range(len(res.history)))


def test_primitive_entangler_rejected():
    with pytest.raises(PrimitiveEntanglerError):
        synthesize(cnot_general(2), swap(2))


def test_no_convergence_carries_best():
    target = haar_target(2, 0)
    with pytest.raises(NoConvergenceError) as info:
        synthesize(target, cnot_general(2), max_entanglers=0, restarts=2)
    best = info.value.result
    assert not best.converged and best.cost > 1e-8
    assert best.cost == pytest.approx(circuit_cost(best.circuit, target), abs=1e-12)
    soft = synthesize(target, cnot_general(2), max_entanglers=0, restarts=2, raise_on_failure=False)
    assert soft.cost == best.cost


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        synthesize(cnot_general(3), cnot_general(2))


def test_circuit_json_round_trip(rng):
    c = random_circuit(2, 2, rng)
    back = Circuit.from_json(json.loads(json.dumps(c.to_json())), CNOT)
    assert np.array_equal(circuit_unitary(back).matrix, circuit_unitary(c).matrix)
    with pytest.raises(ValueError):
        Circuit.from_json({"d": 2, "layers": [{"type": "measure"}]}, CNOT)
