"""Numerical circuit synthesis over {all 1-qudit gates, V}.

Circuits have the shape ``L (E L)^k``: each ``L`` is a pair of parameterized
1-qudit gates (one per slot) and each ``E`` is the fixed entangler placed as
``V(1,2)`` or ``V(2,1)``.  A 1-qudit gate is ``exp(sum_k p_k B_k)`` over an
orthonormal anti-hermitian basis ``B_k`` of u(d), so every slot carries
``d**2`` real parameters.  Layers multiply left to right in list order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
from scipy.optimize import minimize

from .linalg import Gate, _two_slot, dist_up_to_phase, embed2, u_basis
from .primitivity import default_tol, is_primitive

logger = logging.getLogger(__name__)

MAX_ITER = 5000
GTOL = 1e-9


class PrimitiveEntanglerError(ValueError):
    """The entangler is primitive, so generic targets are out of reach."""


class NoConvergenceError(RuntimeError):
    def __init__(self, result: SynthesisResult):
        super().__init__(f"synthesis did not reach tol: best cost {result.cost:.3e}")
        self.result = result


@dataclass
class LocalLayer:
    slot: int
    params: np.ndarray


@dataclass
class EntanglerLayer:
    orientation: tuple[int, int]


Layer = Union[LocalLayer, EntanglerLayer]


@dataclass
class Circuit:
    d: int
    entangler: np.ndarray
    layers: list[Layer] = field(default_factory=list)
    n: int = 2

    @property
    def params(self) -> np.ndarray:
        chunks = [l.params for l in self.layers if isinstance(l, LocalLayer)]
        return np.concatenate(chunks) if chunks else np.zeros(0)

    @property
    def num_entanglers(self) -> int:
        return sum(isinstance(l, EntanglerLayer) for l in self.layers)

    def with_params(self, params) -> Circuit:
        params = np.asarray(params, dtype=float)
        k = self.d**2
        n_local = sum(isinstance(l, LocalLayer) for l in self.layers)
        if params.shape != (n_local * k,):
            raise ValueError(f"expected {n_local * k} parameters, got {params.shape}")
        layers, pos = [], 0
        for l in self.layers:
            if isinstance(l, LocalLayer):
                layers.append(LocalLayer(l.slot, params[pos:pos + k].copy()))
                pos += k
            else:
                layers.append(l)
        return replace(self, layers=layers)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "layers": [
                {"type": "local", "slot": l.slot, "params": l.params.tolist()}
                if isinstance(l, LocalLayer)
                else {"type": "entangler", "orientation": list(l.orientation)}
                for l in self.layers
            ],
        }

    @classmethod
    def from_json(cls, obj: dict, entangler) -> Circuit:
        layers: list[Layer] = []
        for rec in obj["layers"]:
            if rec["type"] == "local":
                layers.append(LocalLayer(int(rec["slot"]), np.asarray(rec["params"], dtype=float)))
            elif rec["type"] == "entangler":
                layers.append(EntanglerLayer(tuple(rec["orientation"])))
            else:
                raise ValueError(f"unknown layer type {rec['type']!r}")
        m, _ = _two_slot(entangler)
        return cls(int(obj["d"]), m, layers)


def ansatz(d: int, entangler, k: int, first: tuple[int, int] = (1, 2)) -> Circuit:
    """``L (E L)^k`` with orientations alternating from ``first``; all parameters zero."""
    m, _ = _two_slot(entangler)
    other = (first[1], first[0])

    def local_pair():
        return [LocalLayer(1, np.zeros(d * d)), LocalLayer(2, np.zeros(d * d))]

    layers: list[Layer] = local_pair()
    for j in range(k):
        layers.append(EntanglerLayer(first if j % 2 == 0 else other))
        layers += local_pair()
    return Circuit(d, m, layers)


class _LocalExp:
    """``exp(A)`` for ``A = sum p_k B_k`` plus its exact differential in each ``B_k``."""

    def __init__(self, basis: np.ndarray, params: np.ndarray):
        a = np.tensordot(params, basis, axes=1)
        lam, w = np.linalg.eigh(-1j * a)  # A = i W diag(lam) W^dag
        self.w = w
        e = np.exp(1j * lam)
        self.u = (w * e) @ w.conj().T
        diff = 1j * (lam[:, None] - lam[None, :])
        small = np.abs(diff) < 1e-8
        safe = np.where(small, 1.0, diff)
        ratio = np.where(small, 1.0 + diff / 2, np.expm1(diff) / safe)
        self.phi = e[None, :] * ratio  # divided differences of exp at (lam_a, lam_b)
        self.basis_w = np.einsum("ai,kab,bj->kij", w.conj(), basis, w)

    def directional(self, n_mat: np.ndarray) -> np.ndarray:
        """``tr(N dU/dp_k)`` for every ``k``."""
        nt = self.w.conj().T @ n_mat @ self.w
        return np.einsum("ji,ij,kij->k", nt, self.phi, self.basis_w)


def _slot_matrix(u: np.ndarray, slot: int, d: int) -> np.ndarray:
    return np.kron(u, np.eye(d)) if slot == 1 else np.kron(np.eye(d), u)


def _partial_trace_for(n_mat: np.ndarray, slot: int, d: int) -> np.ndarray:
    """``K`` with ``tr(N (X on slot)) = tr(K X)``."""
    t = n_mat.reshape(d, d, d, d)
    return np.einsum("ajbj->ab", t) if slot == 1 else np.einsum("jajb->ab", t)


class _Evaluator:
    def __init__(self, circuit: Circuit, target: np.ndarray):
        self.c = circuit
        self.d = circuit.d
        self.dim = self.d**2
        self.target_h = np.asarray(target).conj().T
        self.basis = np.array(u_basis(self.d))
        ent = circuit.entangler
        self.ent = {(1, 2): ent, (2, 1): embed2(ent, 2, 1, 2)}

    def _layer_mats(self, params):
        k = self.d**2
        mats, locs, pos = [], [], 0
        for l in self.c.layers:
            if isinstance(l, LocalLayer):
                le = _LocalExp(self.basis, params[pos:pos + k])
                mats.append(_slot_matrix(le.u, l.slot, self.d))
                locs.append((len(mats) - 1, l.slot, le))
                pos += k
            else:
                mats.append(self.ent[tuple(l.orientation)])
        return mats, locs

    def unitary(self, params) -> np.ndarray:
        u = np.eye(self.dim, dtype=complex)
        for m in self._layer_mats(params)[0]:
            u = u @ m
        return u

    def cost(self, params) -> float:
        w = np.trace(self.target_h @ self.unitary(params))
        return 1.0 - abs(w) / self.dim

    def cost_and_grad(self, params):
        mats, locs = self._layer_mats(params)
        nl = len(mats)
        prefix = [np.eye(self.dim, dtype=complex)]
        for m in mats:
            prefix.append(prefix[-1] @ m)
        suffix = [np.eye(self.dim, dtype=complex)] * (nl + 1)
        for j in range(nl - 1, -1, -1):
            suffix[j] = mats[j] @ suffix[j + 1]
        w = np.trace(self.target_h @ prefix[-1])
        aw = abs(w)
        cost = 1.0 - aw / self.dim
        grads = []
        for j, slot, le in locs:
            n_mat = suffix[j + 1] @ self.target_h @ prefix[j]
            dw = le.directional(_partial_trace_for(n_mat, slot, self.d))
            if aw == 0:
                grads.append(np.zeros_like(dw.real))
            else:
                grads.append(-np.real(np.conj(w) * dw) / (aw * self.dim))
        grad = np.concatenate(grads) if grads else np.zeros(0)
        return cost, grad


def circuit_unitary(c: Circuit) -> Gate:
    ev = _Evaluator(c, np.eye(c.d**2))
    return Gate(c.d, 2, ev.unitary(c.params))


def circuit_cost(c: Circuit, target) -> float:
    m, _ = _two_slot(target)
    return dist_up_to_phase(circuit_unitary(c), m)


def cost_gradient(c: Circuit, target) -> np.ndarray:
    m, _ = _two_slot(target)
    return _Evaluator(c, m).cost_and_grad(c.params)[1]


def gradient_check(c: Circuit, target, h: float = 1e-5) -> float:
    """Max discrepancy between the analytic gradient and central differences.

    Relative to the largest finite-difference component (floored at 1e-8).
    """
    m, _ = _two_slot(target)
    ev = _Evaluator(c, m)
    p = c.params
    _, g = ev.cost_and_grad(p)
    fd = np.empty_like(p)
    for k in range(p.size):
        e = np.zeros_like(p)
        e[k] = h
        fd[k] = (ev.cost(p + e) - ev.cost(p - e)) / (2 * h)
    scale = max(float(np.max(np.abs(fd))) if fd.size else 0.0, 1e-8)
    return float(np.max(np.abs(g - fd))) / scale if p.size else 0.0


@dataclass
class SynthesisResult:
    circuit: Circuit
    cost: float
    iterations: int
    restarts_used: int
    converged: bool
    tol: float
    seed: int
    history: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "circuit": self.circuit.to_json(),
            "cost": self.cost,
            "iterations": self.iterations,
            "restarts_used": self.restarts_used,
            "converged": self.converged,
            "entanglers": self.circuit.num_entanglers,
            "tol": self.tol,
            "seed": self.seed,
            "history": self.history,
        }


def optimize_structure(circuit: Circuit, target, restarts: int = 20, tol: float = 1e-8,
                       seed: int = 0, max_iter: int = MAX_ITER, tag: tuple = ()) -> tuple:
    """Minimize the phase-invariant infidelity over a fixed circuit layout.

    Restart 0 starts from all-zero parameters, later ones from seeded
    Gaussian draws.  Stops at the first restart whose cost is within ``tol``.
    Returns ``(best_circuit, best_cost, iterations, restarts_run)``; ties go to
    the lower restart index.
    """
    m, _ = _two_slot(target)
    ev = _Evaluator(circuit, m)
    n_par = circuit.params.size
    best = (None, np.inf, 0)
    run = 0
    for r in range(restarts):
        run = r + 1
        rng = np.random.default_rng([seed, *tag, r])
        x0 = np.zeros(n_par) if r == 0 else rng.normal(size=n_par)
        if n_par == 0:
            x, it = x0, 0
        else:
            res = minimize(ev.cost_and_grad, x0, jac=True, method="L-BFGS-B",
                           options={"maxiter": max_iter, "gtol": GTOL, "ftol": 1e-16, "maxcor": 30})
            x, it = res.x, int(res.nit)
        cost = dist_up_to_phase(ev.unitary(x), m)
        if cost < best[1]:
            best = (x, cost, it)
        if cost <= tol:
            break
    return circuit.with_params(best[0]), best[1], best[2], run


def synthesize(target, v, max_entanglers: int = 3, restarts: int = 20, tol: float = 1e-8,
               seed: int = 0, max_iter: int = MAX_ITER, prim_tol: float | None = None,
               raise_on_failure: bool = True) -> SynthesisResult:
    """Compile ``target`` into ``L (E L)^k`` circuits over the entangler ``v``.

    Tries ``k = 0 .. max_entanglers``; for each ``k >= 1`` both alternating
    orientation schedules are optimized.  Returns as soon as some structure
    reaches ``tol``.  Raises :class:`PrimitiveEntanglerError` for a primitive
    ``v`` and :class:`NoConvergenceError` (carrying the best result) if nothing
    converges, unless ``raise_on_failure`` is false.
    """
    tm, d = _two_slot(target)
    vm, dv = _two_slot(v)
    if d != dv:
        raise ValueError(f"target has d={d} but entangler has d={dv}")
    Gate(d, 2, tm)
    prim_tol = default_tol() if prim_tol is None else prim_tol
    verdict = is_primitive(vm, prim_tol)
    if verdict.is_primitive:
        raise PrimitiveEntanglerError(
            f"entangler is primitive (sigma2/sigma1 = {verdict.residual_schmidt:.3e}); "
            "it cannot generate all 2-qudit gates with local gates"
        )

    best: SynthesisResult | None = None
    history = []
    for k in range(max_entanglers + 1):
        starts = [(1, 2)] if k == 0 else [(1, 2), (2, 1)]
        k_best = np.inf
        for first in starts:
            c = ansatz(d, vm, k, first)
            circ, cost, it, used = optimize_structure(c, tm, restarts, tol, seed, max_iter,
                                                      tag=(k, first[0]))
            logger.debug("k=%d first=%s cost=%.3e restarts=%d", k, first, cost, used)
            k_best = min(k_best, cost)
            if best is None or cost < best.cost:
                best = SynthesisResult(circ, cost, it, used, cost <= tol, tol, seed)
            if cost <= tol:
                break
        history.append({"entanglers": k, "best_cost": float(k_best),
                        "best_cost_so_far": float(best.cost)})
        if best.converged:
            break
    best.history = history
    if not best.converged and raise_on_failure:
        raise NoConvergenceError(best)
    return best
