"""Primitivity of 2-qudit gates.

A 2-qudit gate is primitive when it sends every product state to a product
state; equivalently it is ``S (x) T`` or ``(S (x) T) P`` with ``P`` the swap.
Three independent routes are provided: the Schmidt-rank test on the
reshuffled matrix (and on ``V P``), the brute-force quadratic coefficient
equations, and the phase criterion for diagonal gates.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

import numpy as np
from scipy.linalg import polar
from scipy.optimize import minimize

from .linalg import Gate, _two_slot, dist_up_to_phase, entanglement_entropy, reshuffle, swap_matrix

PRIMITIVITY_TOL = 1e-7
BORDERLINE_FACTOR = 100.0
ENTROPY_FLOOR = 1e-6
COEFF_TOL = 1e-7
ANGLE_TOL = 1e-7


def default_tol() -> float:
    """Primitivity threshold, overridable through ``QUDIT_TOL``."""
    env = os.environ.get("QUDIT_TOL")
    return float(env) if env else PRIMITIVITY_TOL


class NotPrimitiveError(ValueError):
    pass


class NotImprimitiveError(ValueError):
    pass


class WitnessNotFoundError(RuntimeError):
    pass


@dataclass(frozen=True)
class Factorization:
    s: Gate
    t: Gate
    swap_flag: bool
    phase: float

    def matrix(self) -> np.ndarray:
        m = np.exp(1j * self.phase) * np.kron(self.s.matrix, self.t.matrix)
        return m @ swap_matrix(self.s.d) if self.swap_flag else m


@dataclass(frozen=True)
class Witness:
    x: np.ndarray
    y: np.ndarray
    output_entropy: float


@dataclass(frozen=True)
class PrimitivityVerdict:
    is_primitive: bool
    factorization: Factorization | None
    witness: Witness | None
    residual_schmidt: float
    residual_coeff: float
    borderline: bool
    tol: float

    def to_json(self) -> dict:
        f, w = self.factorization, self.witness
        return {
            "primitive": self.is_primitive,
            "swap": f.swap_flag if f else None,
            "phase": f.phase if f else None,
            "residuals": {"schmidt": self.residual_schmidt, "coeff": self.residual_coeff},
            "witness": None if w is None else {
                "x": [[z.real, z.imag] for z in w.x.tolist()],
                "y": [[z.real, z.imag] for z in w.y.tolist()],
                "output_entropy": w.output_entropy,
            },
            "borderline": self.borderline,
            "tol": self.tol,
        }


def schmidt_ratios(v) -> tuple[float, float]:
    """``sigma_2 / sigma_1`` of ``reshuffle(V)`` and of ``reshuffle(V P)``."""
    m, d = _two_slot(v)
    out = []
    for mat in (m, m @ swap_matrix(d)):
        s = np.linalg.svd(reshuffle(mat), compute_uv=False)
        out.append(float(s[1] / s[0]))
    return out[0], out[1]


def coefficient_residuals(v) -> tuple[float, float]:
    """Max residuals of the two families of quadratic coefficient equations.

    With ``a, b, c, e`` standing for the barred indices,
    (i)  ``V[ij,kl] V[ab,ce] - V[ib,ke] V[aj,cl]``
    (ii) ``V[ij,kl] V[ab,ce] - V[ib,cl] V[aj,ke]``
    over every index 8-tuple.
    """
    m, d = _two_slot(v)
    t = m.reshape(d, d, d, d)
    lhs = np.einsum("ijkl,abce->ijklabce", t, t)
    r1 = np.max(np.abs(lhs - np.einsum("ibke,ajcl->ijklabce", t, t)))
    r2 = np.max(np.abs(lhs - np.einsum("ibcl,ajke->ijklabce", t, t)))
    return float(r1), float(r2)


def coefficient_test(v, tol: float = COEFF_TOL) -> tuple[bool, bool, float, float]:
    r1, r2 = coefficient_residuals(v)
    return r1 <= tol, r2 <= tol, r1, r2


def wrap_angle(phi: float) -> float:
    """Map to ``[0, 2 pi)``; values a hair below ``2 pi`` snap to 0."""
    phi = float(np.mod(phi, 2 * np.pi))
    return 0.0 if phi > 2 * np.pi - 1e-12 else phi


def _circ(x):
    return np.abs(np.angle(np.exp(1j * np.asarray(x))))


def diagonal_primitivity(thetas, tol: float = ANGLE_TOL) -> tuple[bool, float]:
    """Phase criterion for ``V|jk> = exp(i theta_jk)|jk>``.

    Primitive iff ``theta_jk + theta_pq = theta_jq + theta_pk (mod 2 pi)`` for
    all ``j, k, p, q``.
    """
    t = np.asarray(thetas, dtype=float)
    d = int(round(np.sqrt(t.size)))
    t = t.reshape(d, d)
    # axes j, k, p, q
    combo = (t[:, :, None, None] + t[None, None, :, :]
             - t[:, None, None, :] - t.T[None, :, :, None])
    worst = float(np.max(_circ(combo)))
    return worst <= tol, worst


def _fix_phase(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Rotate ``m`` so the first nonzero entry of column 0 is real positive."""
    col = m[:, 0]
    k = int(np.argmax(np.abs(col) > 1e-8 * np.max(np.abs(col))))
    alpha = float(np.angle(col[k]))
    return m * np.exp(-1j * alpha), alpha


def _factor_product(m: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    u, s, wh = np.linalg.svd(reshuffle(m))
    a = np.sqrt(d) * u[:, 0].reshape(d, d)
    b = np.sqrt(d) * wh[0, :].reshape(d, d)
    # snap to the nearest unitaries; exact for genuine products
    a, _ = polar(a)
    b, _ = polar(b)
    a, _ = _fix_phase(a)
    b, _ = _fix_phase(b)
    return a, b


def factor_primitive(v, tol: float | None = None) -> Factorization:
    """Write a primitive ``V`` as ``e^{i phase} (S (x) T)`` or ``e^{i phase} (S (x) T) P``.

    ``S`` and ``T`` are unitary with the first nonzero entry of their first
    column real and positive; the leftover phase goes to ``phase``.
    """
    tol = default_tol() if tol is None else tol
    m, d = _two_slot(v)
    r_direct, r_swapped = schmidt_ratios(m)
    if min(r_direct, r_swapped) > tol:
        raise NotPrimitiveError(
            f"gate is not primitive: sigma2/sigma1 = {r_direct:.3e} (V), {r_swapped:.3e} (VP)"
        )
    swap_flag = r_swapped < r_direct
    target = m @ swap_matrix(d) if swap_flag else m
    a, b = _factor_product(target, d)
    phase = wrap_angle(float(np.angle(np.vdot(np.kron(a, b), target))))
    return Factorization(Gate(d, 1, a), Gate(d, 1, b), swap_flag, phase)


def _probe_states(d: int) -> list[np.ndarray]:
    states = [np.eye(d, dtype=complex)[j] for j in range(d)]
    for phase in (1.0, 1j):
        for j, p in itertools.combinations(range(d), 2):
            s = np.zeros(d, dtype=complex)
            s[j], s[p] = 1 / np.sqrt(2), phase / np.sqrt(2)
            states.append(s)
    return states


def _unpack(z: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    x = z[:d] + 1j * z[d:2 * d]
    y = z[2 * d:3 * d] + 1j * z[3 * d:]
    return x / np.linalg.norm(x), y / np.linalg.norm(y)


def entangling_witness(v, tol: float | None = None,
                       entropy_floor: float = ENTROPY_FLOOR) -> Witness:
    """Find a product input that ``v`` maps to an entangled output.

    A grid over basis states and equal-weight two-level superpositions is
    scanned first, then the best pair is refined with Nelder-Mead over the
    product-state manifold.
    """
    m, d = _two_slot(v)
    tol = default_tol() if tol is None else tol
    if min(schmidt_ratios(m)) <= tol:
        raise NotImprimitiveError("gate is primitive; no entangling witness exists")

    def entropy(x, y):
        return entanglement_entropy(m @ np.kron(x, y), d)

    probes = _probe_states(d)
    best = (-1.0, probes[0], probes[0])
    for x in probes:
        for y in probes:
            e = entropy(x, y)
            if e > best[0]:
                best = (e, x, y)
    e0, x0, y0 = best

    if e0 < np.log(d) - 1e-12:
        z0 = np.concatenate([x0.real, x0.imag, y0.real, y0.imag])
        res = minimize(lambda z: -entropy(*_unpack(z, d)), z0, method="Nelder-Mead",
                       options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 100 * d})
        if -res.fun > e0 + 1e-9:
            x0, y0 = _unpack(res.x, d)
            e0 = entropy(x0, y0)
    if e0 <= entropy_floor:
        raise WitnessNotFoundError(
            f"best product input reached entropy {e0:.3e} <= floor {entropy_floor:.1e}"
        )
    return Witness(x0, y0, e0)


def is_primitive(v, tol: float | None = None) -> PrimitivityVerdict:
    """Decide primitivity by the Schmidt-rank route and attach evidence.

    Primitive iff ``min(sigma2/sigma1)`` over ``V`` and ``V P`` is at most
    ``tol``.  Gates within a factor of 100 of the threshold are flagged
    ``borderline``.  An imprimitive gate whose witness search cannot clear the
    entropy floor is reported without a witness and flagged borderline.
    """
    m, d = _two_slot(v)
    tol = default_tol() if tol is None else tol
    r_schmidt = min(schmidt_ratios(m))
    r1, r2 = coefficient_residuals(m)
    primitive = r_schmidt <= tol
    borderline = tol / BORDERLINE_FACTOR <= r_schmidt <= tol * BORDERLINE_FACTOR
    factorization = witness = None
    if primitive:
        factorization = factor_primitive(m, tol)
    else:
        try:
            witness = entangling_witness(m, tol)
        except WitnessNotFoundError:
            borderline = True
    return PrimitivityVerdict(primitive, factorization, witness, r_schmidt,
                              min(r1, r2), borderline, tol)


def reconstruction_distance(v, f: Factorization) -> float:
    return dist_up_to_phase(f.matrix(), v)
