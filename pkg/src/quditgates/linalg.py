"""Dense complex-matrix kernel for qudit gates.

Basis convention: row index is the bra, column index is the ket, and the
computational basis of ``n`` slots is ordered mixed-radix big-endian, so
``|i_1 ... i_n>`` sits at index ``sum_k i_k d**(n-k)``.  For a 2-qudit gate
``V[i*d + j, k*d + l] = <ij|V|kl>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

UNITARITY_TOL = 1e-8
ALGEBRA_TOL = 1e-10
RANK_TOL = 1e-9
MAX_DIM = 4096


class InvalidGateError(ValueError):
    """Raised when a matrix cannot be accepted as a gate.

    ``residual`` holds the unitarity residual when that was the reason.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


def unitarity_residual(m: np.ndarray) -> float:
    """Max-entry norm of ``U^dag U - I``."""
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


@dataclass(frozen=True, eq=False)
class Gate:
    """A unitary on ``n`` slots of local dimension ``d``."""

    d: int
    n: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.d < 2:
            raise InvalidGateError(f"local dimension must be >= 2, got {self.d}")
        if self.n < 1:
            raise InvalidGateError(f"slot count must be >= 1, got {self.n}")
        dim = self.d**self.n
        if dim > MAX_DIM:
            raise InvalidGateError(f"d**n = {dim} exceeds the dense limit {MAX_DIM}")
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (dim, dim):
            raise InvalidGateError(
                f"matrix shape {m.shape} does not match d={self.d}, n={self.n}"
            )
        if not np.all(np.isfinite(m)):
            raise InvalidGateError("matrix has non-finite entries")
        res = unitarity_residual(m)
        if res > UNITARITY_TOL:
            raise InvalidGateError(
                f"matrix is not unitary: max|U^dag U - I| = {res:.3e}", residual=res
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.d**self.n

    def __matmul__(self, other: Gate) -> Gate:
        if (self.d, self.n) != (other.d, other.n):
            raise ValueError("gate shapes differ")
        return Gate(self.d, self.n, self.matrix @ other.matrix)

    def dagger(self) -> Gate:
        return Gate(self.d, self.n, self.matrix.conj().T)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "matrix": [[[z.real, z.imag] for z in row] for row in self.matrix.tolist()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> Gate:
        try:
            d, n, rows = int(obj["d"]), int(obj["n"]), obj["matrix"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidGateError(f"malformed gate record: {exc}") from exc
        if not isinstance(rows, list) or any(len(r) != len(rows) for r in rows):
            raise InvalidGateError("matrix is not square")
        try:
            m = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
        except (TypeError, ValueError) as exc:
            raise InvalidGateError(f"matrix entries must be [re, im] pairs: {exc}") from exc
        return cls(d, n, m.reshape(len(rows), len(rows)))


def load_gate(path: str | Path) -> Gate:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidGateError(f"{path}: not valid JSON ({exc})") from exc
    return Gate.from_json(obj)


def save_gate(gate: Gate, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(gate.to_json(), fh)
        fh.write("\n")


def _mat(x) -> np.ndarray:
    return x.matrix if isinstance(x, Gate) else np.asarray(x, dtype=complex)


def _two_slot(v) -> tuple[np.ndarray, int]:
    if isinstance(v, Gate):
        if v.n != 2:
            raise ValueError(f"expected a 2-qudit gate, got n={v.n}")
        return v.matrix, v.d
    m = np.asarray(v, dtype=complex)
    d = int(round(np.sqrt(m.shape[0])))
    if m.shape != (d * d, d * d):
        raise ValueError(f"matrix of shape {m.shape} is not a 2-slot operator")
    return m, d


def kron(a, b) -> np.ndarray:
    return np.kron(_mat(a), _mat(b))


def swap_matrix(d: int) -> np.ndarray:
    """The swap ``P|xy> = |yx>`` on two qudits."""
    p = np.zeros((d * d, d * d), dtype=complex)
    for x in range(d):
        for y in range(d):
            p[y * d + x, x * d + y] = 1.0
    return p


def reshuffle(v) -> np.ndarray:
    """Rearrange ``V_{ij,kl}`` into ``M[(i d + k), (j d + l)]``.

    ``M`` has rank one exactly when ``V = A (x) B``; applying the map twice
    gives back ``V``.
    """
    m, d = _two_slot(v)
    return m.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def singular_values(m: np.ndarray) -> np.ndarray:
    return np.linalg.svd(m, compute_uv=False)


def numerical_rank(sigma: np.ndarray, rank_tol: float = RANK_TOL) -> int:
    if sigma.size == 0 or sigma[0] == 0:
        return 0
    return int(np.count_nonzero(sigma > rank_tol * sigma[0]))


@dataclass(frozen=True)
class SchmidtData:
    """Operator Schmidt decomposition ``V = sum_m s_m A_m (x) B_m``."""

    singular_values: np.ndarray
    left_factors: tuple[np.ndarray, ...]
    right_factors: tuple[np.ndarray, ...]

    def rank(self, rank_tol: float = RANK_TOL) -> int:
        return numerical_rank(self.singular_values, rank_tol)

    def reconstruct(self, terms: int | None = None) -> np.ndarray:
        terms = len(self.singular_values) if terms is None else terms
        d = self.left_factors[0].shape[0]
        out = np.zeros((d * d, d * d), dtype=complex)
        for s, a, b in zip(self.singular_values[:terms], self.left_factors, self.right_factors):
            out += s * np.kron(a, b)
        return out


def operator_schmidt(v) -> SchmidtData:
    m, d = _two_slot(v)
    u, s, wh = np.linalg.svd(reshuffle(m))
    left = tuple(u[:, k].reshape(d, d) for k in range(d * d))
    right = tuple(wh[k, :].reshape(d, d) for k in range(d * d))
    return SchmidtData(s, left, right)


def embed1(a, slot: int, n: int) -> np.ndarray:
    """``A(l)``: act with the 1-qudit ``a`` on slot ``slot`` (1-based) of ``n``."""
    a = _mat(a)
    if not 1 <= slot <= n:
        raise ValueError(f"slot {slot} out of range 1..{n}")
    d = a.shape[0]
    left = np.eye(d ** (slot - 1))
    right = np.eye(d ** (n - slot))
    return np.kron(np.kron(left, a), right)


def embed2(b, p: int, q: int, n: int) -> np.ndarray:
    """``B(p, q)``: act with the 2-qudit ``b`` on slots ``p`` and ``q`` (1-based).

    Slot ``p`` receives the first tensor factor of ``b``.
    """
    m, d = _two_slot(b)
    if p == q:
        raise ValueError("slots must differ")
    if not (1 <= p <= n and 1 <= q <= n):
        raise ValueError(f"slots ({p}, {q}) out of range 1..{n}")
    rest = [s for s in range(n) if s not in (p - 1, q - 1)]
    order = [p - 1, q - 1] + rest
    full = np.kron(m, np.eye(d ** (n - 2))).reshape((d,) * (2 * n))
    # axis a of ``full`` belongs to slot order[a]; put slots back in place
    inv = list(np.argsort(order))
    full = full.transpose(inv + [x + n for x in inv])
    return full.reshape(d**n, d**n)


def dist_up_to_phase(u, w) -> float:
    """``1 - |tr(u^dag w)| / dim``; zero exactly when ``u = e^{it} w``."""
    u, w = _mat(u), _mat(w)
    if u.shape != w.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {w.shape}")
    val = 1.0 - abs(np.vdot(u, w)) / u.shape[0]
    return float(min(max(val, 0.0), 1.0))


def entanglement_entropy(psi: np.ndarray, d: int) -> float:
    """Von Neumann entropy (nats) of either half of a 2-qudit pure state."""
    s = np.linalg.svd(np.asarray(psi).reshape(d, d), compute_uv=False)
    p = s**2
    p = p[p > 1e-300] / p.sum()
    return float(max(-np.sum(p * np.log(p)), 0.0))


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal (Frobenius) basis of traceless hermitian ``d x d`` matrices."""
    out = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            out.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k], m[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            out.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        out.append(np.diag(diag / np.linalg.norm(diag)).astype(complex))
    return out


def u_basis(d: int) -> list[np.ndarray]:
    """Orthonormal basis of u(d) under ``Re tr(a^dag b)``: ``iI/sqrt(d)`` then ``iG``."""
    return [1j * np.eye(d) / np.sqrt(d)] + [1j * g for g in hermitian_basis(d)]
