"""Named gates and Haar sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.stats import unitary_group

from .linalg import Gate, swap_matrix

KINDS = ("cnot", "controlled_u", "diagonal", "q_phi", "u_theta_phi", "swap", "haar", "identity")


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def identity(d: int, n: int = 2) -> Gate:
    return Gate(d, n, np.eye(d**n))


def swap(d: int) -> Gate:
    return Gate(d, 2, swap_matrix(d))


def cnot_general(d: int) -> Gate:
    """``X|ij> = |i, i+j mod d>``."""
    m = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            m[i * d + (i + j) % d, i * d + j] = 1.0
    return Gate(d, 2, m)


def controlled_u(u) -> Gate:
    """``X_U``: apply ``u`` to the target when the control is ``|0>``, else identity."""
    u = u.matrix if isinstance(u, Gate) else np.asarray(u, dtype=complex)
    d = u.shape[0]
    proj0 = np.zeros((d, d))
    proj0[0, 0] = 1.0
    return Gate(d, 2, np.kron(proj0, u) + np.kron(np.eye(d) - proj0, np.eye(d)))


def diagonal_gate(thetas) -> Gate:
    """``V|jk> = exp(i thetas[j, k]) |jk>`` from a ``d x d`` grid (or flat ``d**2`` list)."""
    t = np.asarray(thetas, dtype=float)
    d = int(round(np.sqrt(t.size)))
    if d * d != t.size or d < 2:
        raise ValueError(f"need d**2 angles, got {t.size}")
    return Gate(d, 2, np.diag(np.exp(1j * t.reshape(-1))))


def q_phi(phi: float) -> Gate:
    return Gate(2, 2, np.diag([1, 1, 1, np.exp(1j * phi)]))


def u_theta_phi(theta: float, phi: float) -> Gate:
    c, s = np.cos(theta), np.sin(theta)
    return Gate(2, 1, np.array([
        [c, -1j * np.exp(1j * phi) * s],
        [-1j * np.exp(-1j * phi) * s, c],
    ]))


def haar_random(m: int, seed=None) -> np.ndarray:
    """Haar-distributed ``m x m`` unitary; deterministic for a given seed."""
    if m == 1:
        return np.exp(2j * np.pi * _rng(seed).random()).reshape(1, 1)
    return unitary_group.rvs(m, random_state=_rng(seed))


def haar_gate(d: int, n: int = 2, seed=None) -> Gate:
    return Gate(d, n, haar_random(d**n, seed))


def haar_special(m: int, seed=None) -> np.ndarray:
    u = haar_random(m, seed)
    return u / np.linalg.det(u) ** (1.0 / m)


def is_scalar_operator(u, tol: float = 1e-8) -> bool:
    """True when ``u = e^{i theta} I``, with theta fitted from ``arg(tr u / d)``."""
    u = u.matrix if isinstance(u, Gate) else np.asarray(u, dtype=complex)
    d = u.shape[0]
    theta = np.angle(np.trace(u) / d)
    return float(np.max(np.abs(u - np.exp(1j * theta) * np.eye(d)))) <= tol


@dataclass
class GateSpec:
    """Serializable recipe for a gate, e.g. ``{"kind": "q_phi", "params": [1.57]}``."""

    kind: str
    d: int = 2
    params: list[Any] = field(default_factory=list)
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        arity = {"q_phi": 1, "u_theta_phi": 2, "diagonal": self.d**2}
        if self.kind in arity and len(self.params) != arity[self.kind]:
            raise ValueError(
                f"{self.kind} takes {arity[self.kind]} parameter(s), got {len(self.params)}"
            )
        if self.kind in ("q_phi", "u_theta_phi", "diagonal"):
            if not np.all(np.isfinite(np.asarray(self.params, dtype=float))):
                raise ValueError("angles must be finite")

    @classmethod
    def from_json(cls, obj: dict) -> GateSpec:
        return cls(
            kind=obj["kind"],
            d=int(obj.get("d", 2)),
            params=list(obj.get("params", [])),
            seed=obj.get("seed"),
        )

    def to_json(self) -> dict:
        out = {"kind": self.kind, "d": self.d, "params": self.params}
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    def build(self) -> Gate:
        k, d, p = self.kind, self.d, self.params
        if k == "cnot":
            return cnot_general(d)
        if k == "swap":
            return swap(d)
        if k == "identity":
            return identity(d, int(p[0]) if p else 2)
        if k == "q_phi":
            return q_phi(float(p[0]))
        if k == "u_theta_phi":
            return u_theta_phi(float(p[0]), float(p[1]))
        if k == "diagonal":
            return diagonal_gate(np.asarray(p, dtype=float).reshape(d, d))
        if k == "haar":
            return haar_gate(d, int(p[0]) if p else 2, seed=self.seed)
        # controlled_u: params is a d x d matrix of [re, im] pairs
        u = np.array([[complex(re, im) for re, im in row] for row in p], dtype=complex)
        return controlled_u(u)


@dataclass(frozen=True)
class CorpusEntry:
    label: str
    gate: Gate
    family: str
    expected_primitive: bool | None


def build_corpus(size: int = 200, seed: int = 0, dims: Sequence[int] = (2, 3)) -> list[CorpusEntry]:
    """Mixed test corpus of 2-qudit gates over the given local dimensions.

    Families rotate through Haar, ``S(x)T``, ``(S(x)T)P``, random and separable
    diagonals, generalized CNOT dressed by locals, and controlled-U.
    """
    rng = np.random.default_rng(seed)
    families = ("haar", "product", "product_swap", "diag_random", "diag_separable",
                "cnot_dressed", "controlled_random", "controlled_scalar")
    out: list[CorpusEntry] = []
    idx = 0
    while len(out) < size:
        fam = families[idx % len(families)]
        d = dims[(idx // len(families)) % len(dims)]
        idx += 1
        if fam == "haar":
            g, prim = Gate(d, 2, haar_random(d * d, rng)), False
        elif fam == "product":
            g, prim = Gate(d, 2, np.kron(haar_random(d, rng), haar_random(d, rng))), True
        elif fam == "product_swap":
            st = np.kron(haar_random(d, rng), haar_random(d, rng))
            g, prim = Gate(d, 2, st @ swap_matrix(d)), True
        elif fam == "diag_random":
            g, prim = diagonal_gate(rng.uniform(0, 2 * np.pi, (d, d))), False
        elif fam == "diag_separable":
            a, b = rng.uniform(0, 2 * np.pi, d), rng.uniform(0, 2 * np.pi, d)
            g, prim = diagonal_gate(a[:, None] + b[None, :]), True
        elif fam == "cnot_dressed":
            left = np.kron(haar_random(d, rng), haar_random(d, rng))
            right = np.kron(haar_random(d, rng), haar_random(d, rng))
            g, prim = Gate(d, 2, left @ cnot_general(d).matrix @ right), False
        elif fam == "controlled_random":
            g, prim = controlled_u(haar_random(d, rng)), False
        else:
            g, prim = controlled_u(np.exp(1j * rng.uniform(0, 2 * np.pi)) * np.eye(d)), True
        out.append(CorpusEntry(f"{fam}_d{d}_{idx - 1}", g, fam, prim))
    return out


def named_gates() -> dict[str, Gate]:
    """The gates the CLI ``corpus`` command writes out."""
    gates = {
        "cnot_d2": cnot_general(2),
        "cnot_d3": cnot_general(3),
        "cnot_d4": cnot_general(4),
        "swap_d2": swap(2),
        "swap_d3": swap(3),
        "identity_d2": identity(2),
        "q_phi_0": q_phi(0.0),
        "q_phi_pi_2": q_phi(np.pi / 2),
        "q_phi_pi": q_phi(np.pi),
        "q_phi_1rad": q_phi(1.0),
        "controlled_x": controlled_u(np.array([[0, 1], [1, 0]])),
        "controlled_phase_scalar": controlled_u(np.exp(0.7j) * np.eye(2)),
    }
    for s in range(3):
        gates[f"haar_d2_seed{s}"] = haar_gate(2, seed=s)
    return gates
