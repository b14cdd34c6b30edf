"""Lie-algebra machinery on u(d^2).

The local-gate algebra ``h = {X (x) I + I (x) Y : X, Y in u(d)}`` has
dimension ``2 d^2 - 1``.  Conjugating it by a 2-qudit gate ``V`` and taking
the bracket closure yields either ``h`` again (``V`` primitive) or all of
u(d^2) (``V`` imprimitive); nothing in between exists.  Elements are stored
as real vectors ``concat(Re X, Im X)`` so the inner product ``Re tr(a^dag b)``
becomes the Euclidean one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import _two_slot, hermitian_basis
from .primitivity import default_tol, is_primitive

CLOSURE_TOL = 1e-8
MAX_ROUNDS = 50
ANTIHERMITIAN_TOL = 1e-10
LEAK_TOL = 1e-7


class ClosureError(RuntimeError):
    pass


def _to_vec(x: np.ndarray) -> np.ndarray:
    return np.concatenate([x.real.ravel(), x.imag.ravel()])


def _to_mat(v: np.ndarray, size: int) -> np.ndarray:
    half = size * size
    return (v[:half] + 1j * v[half:]).reshape(size, size)


def _check_antihermitian(x: np.ndarray) -> None:
    err = float(np.max(np.abs(x + x.conj().T)))
    if err > ANTIHERMITIAN_TOL * max(1.0, float(np.max(np.abs(x)))):
        raise ValueError(f"matrix is not anti-hermitian (max|X + X^dag| = {err:.3e})")


def _orthonormalize_into(q: list[np.ndarray], vecs, tol: float,
                         normalize: bool = True) -> list[np.ndarray]:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Appends to ``q`` the normalized components of ``vecs`` that stick out of
    the current span by more than ``tol``.  With ``normalize`` each input is
    scaled to unit norm first; without it the test is on the absolute
    residual, which keeps roundoff in tiny inputs from being amplified.
    Returns the newly admitted vectors.
    """
    admitted: list[np.ndarray] = []
    base = np.array(q) if q else None
    for v in vecs:
        nrm = np.linalg.norm(v)
        if nrm == 0:
            continue
        w = v / nrm if normalize else np.array(v, dtype=float)
        for _ in range(2):
            if base is not None:
                w = w - base.T @ (base @ w)
            for b in admitted:
                w = w - (b @ w) * b
        r = np.linalg.norm(w)
        if r > tol:
            w = w / r
            admitted.append(w)
    q.extend(admitted)
    return admitted


@dataclass(frozen=True)
class LieBasis:
    """Orthonormal anti-hermitian basis of a real subspace of u(d2)."""

    d2: int
    vectors: np.ndarray  # (dim, 2 * d2**2), orthonormal rows

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def elements(self) -> list[np.ndarray]:
        return [_to_mat(v, self.d2) for v in self.vectors]

    def __len__(self) -> int:
        return self.dim

    @classmethod
    def from_matrices(cls, mats, tol: float = CLOSURE_TOL) -> LieBasis:
        mats = [np.asarray(m, dtype=complex) for m in mats]
        for m in mats:
            _check_antihermitian(m)
        size = mats[0].shape[0]
        q: list[np.ndarray] = []
        _orthonormalize_into(q, [_to_vec(m) for m in mats], tol)
        return cls(size, np.array(q).reshape(len(q), 2 * size * size))

    def out_of_span(self, x: np.ndarray) -> float:
        """Norm of the component of ``x`` orthogonal to the span."""
        v = _to_vec(np.asarray(x, dtype=complex))
        return float(np.linalg.norm(v - self.vectors.T @ (self.vectors @ v)))

    def gram(self) -> np.ndarray:
        return self.vectors @ self.vectors.T


def basis_h(d: int) -> LieBasis:
    """Orthonormal basis of the local algebra: ``iI``, then ``iG (x) I``, then ``I (x) iG``."""
    eye = np.eye(d)
    mats = [1j * np.eye(d * d) / d]
    mats += [1j * np.kron(g, eye) / np.sqrt(d) for g in hermitian_basis(d)]
    mats += [1j * np.kron(eye, g) / np.sqrt(d) for g in hermitian_basis(d)]
    return LieBasis(d * d, np.array([_to_vec(m) for m in mats]))


def basis_su_h(d: int) -> LieBasis:
    """Traceless part of the local algebra (``p1 + p2``), dimension ``2 (d^2 - 1)``."""
    b = basis_h(d)
    return LieBasis(b.d2, b.vectors[1:])


def conjugate_basis(v, b: LieBasis) -> LieBasis:
    """Basis of ``V b V^-1``, re-orthonormalized."""
    m, _ = _two_slot(v)
    if m.shape[0] != b.d2:
        raise ValueError(f"gate size {m.shape[0]} does not match basis size {b.d2}")
    mats = [m @ x @ m.conj().T for x in b.elements]
    return LieBasis.from_matrices(mats)


def lie_closure(generators, tol: float = CLOSURE_TOL, max_rounds: int = MAX_ROUNDS) -> LieBasis:
    """Smallest real Lie algebra containing ``generators``.

    Breadth-first: each round brackets the elements admitted in the previous
    round against the whole current basis.  Basis elements have unit norm,
    so brackets are on a unit scale; a bracket is admitted if its absolute
    out-of-span component exceeds ``tol``.  Normalizing brackets first would
    blow roundoff in nearly commuting pairs up past ``tol``.
    """
    if isinstance(generators, LieBasis):
        generators = generators.elements
    mats = [np.asarray(g, dtype=complex) for g in generators]
    if not mats:
        raise ValueError("no generators")
    size = mats[0].shape[0]
    if any(g.shape != (size, size) for g in mats):
        raise ValueError("generators differ in size")
    for g in mats:
        _check_antihermitian(g)
    cap = size * size

    q: list[np.ndarray] = []
    frontier = _orthonormalize_into(q, [_to_vec(g) for g in mats], tol)
    rounds = 0
    while frontier and len(q) < cap:
        rounds += 1
        if rounds > max_rounds:
            raise ClosureError(f"closure did not stabilize in {max_rounds} rounds (dim {len(q)})")
        basis_mats = np.array([_to_mat(v, size) for v in q])
        new_frontier = []
        for f in frontier:
            fm = _to_mat(f, size)
            brackets = fm @ basis_mats - basis_mats @ fm
            vecs = np.concatenate([brackets.real.reshape(len(basis_mats), -1),
                                   brackets.imag.reshape(len(basis_mats), -1)], axis=1)
            vecs = vecs[np.linalg.norm(vecs, axis=1) > tol]
            qa = np.array(q)
            # block projection twice against the current span
            for _ in range(2):
                vecs = vecs - (vecs @ qa.T) @ qa
            cand = vecs[np.linalg.norm(vecs, axis=1) > tol]
            if len(cand):
                new_frontier += _orthonormalize_into(q, cand, tol, normalize=False)
            if len(q) > cap:
                raise ClosureError(f"closure exceeded the dimension cap {cap}")
            if len(q) == cap:
                break
        frontier = new_frontier
    return LieBasis(size, np.array(q))


@dataclass(frozen=True)
class BlockDecomposition:
    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray

    def parts(self) -> tuple[np.ndarray, ...]:
        return (self.p0, self.p1, self.p2, self.p3)


def _partial_traces(xi: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    t = xi.reshape(d, d, d, d)
    return np.einsum("ajbj->ab", t), np.einsum("jajb->ab", t)


def block_project(xi, d: int, check: bool = True) -> BlockDecomposition:
    """Split ``xi`` into scalar, ``X (x) I``, ``I (x) Y`` and remainder parts."""
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (d * d, d * d):
        raise ValueError(f"expected a {d * d} x {d * d} matrix")
    if check:
        _check_antihermitian(xi)
    eye = np.eye(d)
    scalar = np.trace(xi) / (d * d)
    tr2, tr1 = _partial_traces(xi, d)
    x = tr2 / d - scalar * eye
    y = tr1 / d - scalar * eye
    p0 = scalar * np.eye(d * d)
    p1 = np.kron(x, eye)
    p2 = np.kron(eye, y)
    return BlockDecomposition(p0, p1, p2, xi - p0 - p1 - p2)


def normalizes_h(r, tol: float = LEAK_TOL) -> tuple[bool, float]:
    """Whether conjugation by ``r`` keeps the local algebra in place.

    Returns the verdict and the largest p3 leak over the basis of ``h``.
    """
    m, d = _two_slot(r)
    leak = 0.0
    for b in basis_h(d).elements:
        c = m @ b @ m.conj().T
        leak = max(leak, float(np.linalg.norm(block_project(c, d, check=False).p3)))
    return leak <= tol, leak


@dataclass(frozen=True)
class UniversalityReport:
    d: int
    imprimitive: bool
    closure_dim: int
    expected_dims: tuple[int, int]
    universal: bool
    consistent: bool
    tol: float

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "imprimitive": self.imprimitive,
            "closure_dim": self.closure_dim,
            "expected_dims": list(self.expected_dims),
            "universal": self.universal,
            "consistent": self.consistent,
            "tol": self.tol,
        }


def closure_with_conjugate(v, special: bool = False, tol: float = CLOSURE_TOL) -> LieBasis:
    """Closure of ``h`` together with ``V h V^-1`` (traceless version if ``special``)."""
    m, d = _two_slot(v)
    h = basis_su_h(d) if special else basis_h(d)
    return lie_closure(h.elements + conjugate_basis(m, h).elements, tol)


def universality_report(v, tol: float | None = None) -> UniversalityReport:
    """All-1-qudit-gates universality verdict with its Lie-closure certificate.

    ``consistent`` records that the closure dimension is the one predicted by
    the primitivity verdict (``2 d^2 - 1`` if primitive, ``d^4`` otherwise).
    """
    m, d = _two_slot(v)
    tol = default_tol() if tol is None else tol
    imprimitive = not is_primitive(m, tol).is_primitive
    dim = closure_with_conjugate(m).dim
    lo, hi = 2 * d * d - 1, d**4
    consistent = dim == (hi if imprimitive else lo)
    return UniversalityReport(d, imprimitive, dim, (lo, hi), imprimitive, consistent, tol)
