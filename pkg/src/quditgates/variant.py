"""Universality when the 1-qudit gates are restricted to determinant one.

With special 1-qudit gates the determinants of everything generated are
powers of ``det V``, so the verdict additionally needs ``det V`` not to be a
root of unity.  Floating point cannot certify that, so the scan is bounded by
``nmax`` and every verdict resting on it carries a caveat.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .lie import closure_with_conjugate
from .linalg import Gate, _mat, _two_slot
from .primitivity import default_tol, is_primitive, wrap_angle

NMAX = 10_000
ROOT_TOL = 1e-9
DET_CONTRACT_TOL = 1e-8
FAMILY_SAMPLES = 64


class DeterminantContractError(ValueError):
    pass


def det_phase(v) -> float:
    """``arg det V`` in ``[0, 2 pi)``."""
    sign, _ = np.linalg.slogdet(_mat(v))
    return wrap_angle(float(np.angle(sign)))


def circular_distance(phi) -> np.ndarray:
    return np.abs(np.angle(np.exp(1j * np.asarray(phi, dtype=float))))


def root_of_unity_order(phi: float, nmax: int = NMAX, tol: float = ROOT_TOL) -> int | None:
    """Smallest ``n <= nmax`` with ``n * phi`` within ``tol`` of ``0 mod 2 pi``.

    ``None`` only means no such order up to ``nmax``.
    """
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    n = np.arange(1, nmax + 1)
    hits = np.nonzero(circular_distance(n * phi) <= tol)[0]
    return int(n[hits[0]]) if hits.size else None


@dataclass(frozen=True)
class DetAnalysis:
    phase: float
    root_order: int | None
    nmax_searched: int
    tol: float

    def to_json(self) -> dict:
        return {"phase": self.phase, "root_order": self.root_order,
                "nmax_searched": self.nmax_searched, "tol": self.tol}


def analyze_det(v, nmax: int = NMAX, tol: float = ROOT_TOL) -> DetAnalysis:
    phase = det_phase(v)
    return DetAnalysis(phase, root_of_unity_order(phase, nmax, tol), nmax, tol)


@dataclass(frozen=True)
class SpecialVerdict:
    imprimitive: bool
    det_analysis: DetAnalysis
    special_universal: bool
    caveat: str | None
    su_closure_dim: int
    expected_su_dims: tuple[int, int]
    tol: float

    def to_json(self) -> dict:
        return {
            "imprimitive": self.imprimitive,
            "det_analysis": self.det_analysis.to_json(),
            "special_universal": self.special_universal,
            "caveat": self.caveat,
            "su_closure_dim": self.su_closure_dim,
            "expected_su_dims": list(self.expected_su_dims),
            "tol": self.tol,
        }


def special_universality_verdict(v, nmax: int = NMAX, tol_root: float = ROOT_TOL,
                                 tol: float | None = None) -> SpecialVerdict:
    """Verdict for ``{special 1-qudit gates, V}``: imprimitive and ``det V`` not a root of unity."""
    m, d = _two_slot(v)
    tol = default_tol() if tol is None else tol
    imprimitive = not is_primitive(m, tol).is_primitive
    det = analyze_det(m, nmax, tol_root)
    universal = imprimitive and det.root_order is None
    caveat = None
    if imprimitive and det.root_order is None:
        caveat = (f"det V = exp(i*{det.phase:.12g}) is not a root of unity of order <= {nmax} "
                  f"(tolerance {tol_root:g}); higher orders cannot be excluded in floating point")
    su_dim = closure_with_conjugate(m, special=True).dim
    return SpecialVerdict(imprimitive, det, universal, caveat, su_dim,
                          (2 * (d * d - 1), d**4 - 1), tol)


@dataclass(frozen=True)
class FamilyVerdict:
    universal: bool
    witness_phi: float | None
    imprimitive_phis: list[float] = field(default_factory=list)
    samples: int = 0

    def to_json(self) -> dict:
        return {"universal": self.universal, "witness_phi": self.witness_phi,
                "imprimitive_phis": self.imprimitive_phis, "samples": self.samples}


def family_universality(family: Callable[[float], Gate], samples: Sequence[float] | None = None,
                        tol: float | None = None) -> FamilyVerdict:
    """Exact universality of ``{special 1-qudit gates} + {Q_phi}``.

    ``family`` maps ``phi`` to a 2-qudit gate with ``det = e^{i phi}``; the
    collection is exactly universal as soon as one sampled member is
    imprimitive.  Defaults to 64 equispaced angles.
    """
    if samples is None:
        samples = np.linspace(0, 2 * np.pi, FAMILY_SAMPLES, endpoint=False)
    tol = default_tol() if tol is None else tol
    hits = []
    for phi in samples:
        g = family(float(phi))
        off = float(abs(np.linalg.det(_mat(g)) - np.exp(1j * phi)))
        if off > DET_CONTRACT_TOL:
            raise DeterminantContractError(
                f"family member at phi={phi:.12g} has |det - e^(i phi)| = {off:.3e}"
            )
        if not is_primitive(g, tol).is_primitive:
            hits.append(float(phi))
    return FamilyVerdict(bool(hits), hits[0] if hits else None, hits, len(samples))
