"""Universality of 2-qudit gates together with all 1-qudit gates."""

__version__ = "0.1.0"

from .gates import (
    GateSpec, cnot_general, controlled_u, diagonal_gate, haar_gate, haar_random,
    q_phi, swap, u_theta_phi,
)
from .lie import (
    LieBasis, basis_h, block_project, conjugate_basis, lie_closure, normalizes_h,
    universality_report,
)
from .linalg import (
    Gate, InvalidGateError, dist_up_to_phase, embed1, embed2, kron, load_gate,
    operator_schmidt, reshuffle, save_gate,
)
from .primitivity import (
    coefficient_test, diagonal_primitivity, entangling_witness, factor_primitive,
    is_primitive,
)
from .synthesis import Circuit, circuit_unitary, gradient_check, synthesize
from .variant import (
    det_phase, family_universality, root_of_unity_order, special_universality_verdict,
)
