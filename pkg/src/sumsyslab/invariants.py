"""Elementary sets, their Gram-metric subspaces, and subspace limit diagnostics.

The operator-algebra side of the type question is replaced throughout by the
equivalent subspace condition: full liminf on a sequence of sets together
with vanishing complement diagnostics.  A finite grid cannot decide a
limsup, so verdicts report plateau behaviour and cross-kernel contrast
ratios, never an absolute type certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import GramMap
from .sumsys import SumSystemInstance, snap_to_grid, space
from .units import yprime_norm


@dataclass(frozen=True)
class ElementarySet:
    """Finite union of disjoint closed subintervals of [0, 1], kept sorted."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        iv = tuple(sorted((float(a), float(b)) for a, b in self.intervals))
        for a, b in iv:
            if not (0.0 <= a < b <= 1.0):
                raise ValueError("intervals must be nondegenerate inside [0, 1]")
        for (_, b1), (a2, _) in zip(iv[:-1], iv[1:]):
            if a2 < b1 - 1e-12:
                raise ValueError("intervals must be pairwise disjoint")
        object.__setattr__(self, "intervals", iv)

    @property
    def measure(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def complement(self) -> "ElementarySet":
        out = []
        cursor = 0.0
        for a, b in self.intervals:
            if a > cursor + 1e-12:
                out.append((cursor, a))
            cursor = max(cursor, b)
        if cursor < 1.0 - 1e-12:
            out.append((cursor, 1.0))
        return ElementarySet(tuple(out))

    def cell_indices(self, h: float) -> np.ndarray:
        idx: list[int] = []
        for a, b in self.intervals:
            ka = snap_to_grid(a, h, "set endpoint")
            kb = snap_to_grid(b, h, "set endpoint")
            idx.extend(range(ka, kb))
        return np.asarray(sorted(set(idx)), dtype=int)


EMPTY_SET = ElementarySet(())
FULL_SET = ElementarySet(((0.0, 1.0),))


def subspace_projector(sys: SumSystemInstance, E: ElementarySet) -> GramMap:
    """Gram-orthogonal projector onto the span of cell indicators inside E.

    P = B (B^T K B)^{-1} B^T K with B the cell-selection embedding; P is
    idempotent and K-self-adjoint.
    """
    amb = space(sys, 0.0, 1.0).space
    sel = E.cell_indices(sys.h)
    if len(sel) == 0:
        return GramMap(amb, amb, np.zeros((amb.dim, amb.dim)))
    K = amb.gram
    B = np.zeros((amb.dim, len(sel)))
    B[sel, np.arange(len(sel))] = 1.0
    M = B.T @ K @ B
    cond = np.linalg.cond(M)
    if cond > 1e12:
        raise np.linalg.LinAlgError(f"projector system ill-conditioned: cond {cond:.3e}")
    P = B @ np.linalg.solve(M, B.T @ K)
    return GramMap(amb, amb, P)


@dataclass
class SubspaceDiag:
    set_sequence: list[ElementarySet]
    probe_residuals: np.ndarray  # probe x step, ||(I - P_n) x||_K
    liminf_full: bool
    tolerance: float
    complement_norms: np.ndarray | None = None


def _gram_norm(K: np.ndarray, v: np.ndarray) -> float:
    return float(math.sqrt(max(v @ K @ v, 0.0)))


def liminf_residuals(sys: SumSystemInstance, seq: list[ElementarySet],
                     probes: list[np.ndarray], tol: float = 1e-6) -> SubspaceDiag:
    """Per step and probe, the distance from the probe to the set's subspace.

    The liminf-full flag is set when every probe residual has decayed below
    tol by the final step.
    """
    amb = space(sys, 0.0, 1.0).space
    K = amb.gram
    res = np.empty((len(probes), len(seq)))
    for j, E in enumerate(seq):
        P = subspace_projector(sys, E).matrix
        for i, x in enumerate(probes):
            res[i, j] = _gram_norm(K, x - P @ x)
    liminf_full = bool(np.all(res[:, -1] <= tol)) if len(seq) else False
    return SubspaceDiag(list(seq), res, liminf_full, tol)


def limsup_diagnostic(sys: SumSystemInstance, seq: list[ElementarySet],
                      probes: list[np.ndarray]) -> dict:
    """Complement-side mass per step: projections onto G(E_n^c) and ||y'_{E_n^c}||.

    Persistent non-decaying complement mass witnesses a nonzero subspace
    limsup along the complements.
    """
    amb = space(sys, 0.0, 1.0).space
    K = amb.gram
    proj = np.empty((len(probes), len(seq)))
    ynorm = np.empty(len(seq))
    for j, E in enumerate(seq):
        comp = E.complement()
        P = subspace_projector(sys, comp).matrix
        for i, x in enumerate(probes):
            proj[i, j] = _gram_norm(K, P @ x)
        ynorm[j] = yprime_norm(sys, comp)
    return {"projection_norms": proj, "yprime_norms": ynorm}


def cantor_sequence(depth: int, keep_fraction: float, h: float) -> list[ElementarySet]:
    """Increasing sets whose complements are nested centered holes.

    Step n shrinks each hole of the previous complement to a centered closed
    subinterval, so measure(E_n^c) = (1 - keep_fraction)^(n+1) before
    snapping; endpoints snap to the grid, at most one cell per hole end.
    """
    if not 0.0 < keep_fraction < 1.0:
        raise ValueError("keep_fraction must lie in (0, 1)")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    out: list[ElementarySet] = []
    holes: list[tuple[float, float]] = [(0.0, 1.0)]
    for n in range(depth + 1):
        new_holes = []
        for a, b in holes:
            width = (b - a) * (1.0 - keep_fraction)
            mid = 0.5 * (a + b)
            ka = round((mid - 0.5 * width) / h)
            kb = round((mid + 0.5 * width) / h)
            if kb <= ka:
                raise ValueError(
                    f"grid exhausted at step {n}: hole below one cell at h={h!r}"
                )
            new_holes.append((ka * h, kb * h))
        holes = new_holes
        complement = ElementarySet(tuple(holes))
        out.append(complement.complement())
    return out


def default_probes(sys: SumSystemInstance, seq: list[ElementarySet],
                   n_eigvecs: int = 8) -> list[np.ndarray]:
    """Full indicator, leading Gram eigenvectors, and the complements' y' vectors."""
    amb = space(sys, 0.0, 1.0).space
    probes = [np.ones(amb.dim)]
    ev, evec = np.linalg.eigh(amb.gram)
    order = np.argsort(ev)[::-1]
    for i in order[:n_eigvecs]:
        probes.append(evec[:, i].copy())
    from .units import y_prime

    for E in seq:
        comp = E.complement()
        if comp.intervals:
            probes.append(y_prime(sys, comp).coords)
    return probes


@dataclass
class Verdict:
    verdict: str
    liminf_full: bool
    complement_final: float
    complement_initial: float
    plateau_ratio: float
    thresholds: dict = field(default_factory=dict)


CONSISTENT_TYPE_I = "consistent-with-type-I"
TYPE_III_SIGNATURE = "type-III-signature"
INCONCLUSIVE = "inconclusive"


def classify(sys: SumSystemInstance, seq: list[ElementarySet],
             probes: list[np.ndarray], liminf_tol: float = 1e-6,
             decay_tol: float = 0.25, plateau_tol: float = 0.5) -> Verdict:
    """Three-way verdict from liminf fullness and complement-mass behaviour.

    All thresholds are configuration, not claims: liminf-full plus decaying
    complement diagnostics reads consistent-with-type-I; liminf-full with a
    final-quarter plateau above plateau_tol of the initial mass reads
    type-III-signature; anything else is inconclusive.
    """
    if not seq:
        return Verdict(INCONCLUSIVE, False, float("nan"), float("nan"), float("nan"),
                       {"liminf_tol": liminf_tol, "decay_tol": decay_tol,
                        "plateau_tol": plateau_tol, "note": "empty sequence"})
    lim = liminf_residuals(sys, seq, probes, tol=liminf_tol)
    comp = limsup_diagnostic(sys, seq, probes)
    y = comp["yprime_norms"]
    initial, final = float(y[0]), float(y[-1])
    q = max(1, len(seq) // 4)
    plateau = float(np.max(y[-q:])) / initial if initial > 0 else 0.0
    thresholds = {"liminf_tol": liminf_tol, "decay_tol": decay_tol, "plateau_tol": plateau_tol}
    if lim.liminf_full and (initial == 0.0 or final / initial <= decay_tol):
        verdict = CONSISTENT_TYPE_I
    elif lim.liminf_full and plateau >= plateau_tol:
        verdict = TYPE_III_SIGNATURE
    else:
        verdict = INCONCLUSIVE
    return Verdict(verdict, lim.liminf_full, final, initial, plateau, thresholds)
