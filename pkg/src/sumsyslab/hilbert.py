"""Finite-dimensional real Hilbert spaces with explicit Gram matrices.

All adjoints are metric adjoints: for M mapping (G1, K1) to (G2, K2) the
adjoint matrix is K1^{-1} M^T K2, never a bare transpose.  Discretized
kernel spaces with strongly non-Euclidean Grams are the intended users.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

PD_FLOOR = 1e-12
INV_FLOOR = 1e-10
SYM_RTOL = 1e-12


@dataclass
class GramSpace:
    """A real inner-product space presented by a basis and a Gram matrix."""

    dim: int
    gram: np.ndarray
    label: str = ""
    pd_floor: float = PD_FLOOR
    _chol: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        K = np.asarray(self.gram, dtype=float)
        if K.shape != (self.dim, self.dim):
            raise ValueError(f"gram must be {self.dim}x{self.dim}, got {K.shape}")
        scale = np.abs(K).max()
        if scale > 0 and np.abs(K - K.T).max() > SYM_RTOL * scale:
            raise ValueError("gram is not symmetric within tolerance")
        K = 0.5 * (K + K.T)
        ev = np.linalg.eigvalsh(K)
        if ev[0] <= self.pd_floor * ev[-1]:
            raise ValueError(
                f"gram is not positive definite: min eig {ev[0]:.3e} vs max {ev[-1]:.3e}"
            )
        self.gram = K

    @property
    def orthonormal_factor(self) -> np.ndarray:
        """Upper-triangular R with gram = R^T R; x -> R x maps to Euclidean coords."""
        if self._chol is None:
            self._chol = np.linalg.cholesky(self.gram).T
        return self._chol

    def norm(self, x: np.ndarray) -> float:
        return float(np.sqrt(max(inner(self, x, x), 0.0)))


def same_space(a: GramSpace, b: GramSpace) -> bool:
    return a is b or (a.dim == b.dim and np.array_equal(a.gram, b.gram))


def euclidean_space(dim: int, label: str = "") -> GramSpace:
    return GramSpace(dim, np.eye(dim), label=label)


def direct_sum_spaces(parts: Sequence[GramSpace], label: str = "") -> GramSpace:
    """Block-diagonal Gram: the abstract orthogonal direct sum of the parts."""
    gram = scipy.linalg.block_diag(*[p.gram for p in parts])
    return GramSpace(sum(p.dim for p in parts), gram, label=label)


def inner(space: GramSpace, x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (space.dim,) or y.shape != (space.dim,):
        raise ValueError("vector length does not match space dimension")
    return float(x @ space.gram @ y)


@dataclass
class GramMap:
    """Linear map between GramSpaces, stored as a target.dim x source.dim matrix."""

    source: GramSpace
    target: GramSpace
    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        if M.shape != (self.target.dim, self.source.dim):
            raise ValueError(
                f"matrix must be {self.target.dim}x{self.source.dim}, got {M.shape}"
            )
        self.matrix = M

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)


def identity_map(space: GramSpace) -> GramMap:
    return GramMap(space, space, np.eye(space.dim))


def adjoint(m: GramMap) -> GramMap:
    """Metric adjoint: inner(tgt, Mx, y) = inner(src, x, M*y) for all x, y."""
    mat = np.linalg.solve(m.source.gram, m.matrix.T @ m.target.gram)
    return GramMap(m.target, m.source, mat)


def compose(b: GramMap, a: GramMap) -> GramMap:
    if not same_space(a.target, b.source):
        raise ValueError("composition needs matching inner spaces")
    return GramMap(a.source, b.target, b.matrix @ a.matrix)


def direct_sum_maps(maps: Sequence[GramMap]) -> GramMap:
    src = direct_sum_spaces([m.source for m in maps])
    tgt = direct_sum_spaces([m.target for m in maps])
    return GramMap(src, tgt, scipy.linalg.block_diag(*[m.matrix for m in maps]))


def inverse(m: GramMap) -> GramMap:
    return GramMap(m.target, m.source, np.linalg.inv(m.matrix))


def euclidean_matrix(m: GramMap) -> np.ndarray:
    """Matrix of m between the Cholesky-orthonormalized coordinates."""
    R_src = m.source.orthonormal_factor
    R_tgt = m.target.orthonormal_factor
    return R_tgt @ scipy.linalg.solve_triangular(R_src.T, m.matrix.T, lower=True).T


@dataclass
class SClassReport:
    """Outcome of the Hilbert-Schmidt-perturbation-of-a-unitary membership check."""

    smallest_singular: float
    largest_singular: float
    hs_defect: float
    invertible: bool
    verdict: bool


def singular_values(m: GramMap) -> np.ndarray:
    """Metric singular values (eigenvalues of the positive polar part), descending."""
    return np.linalg.svd(euclidean_matrix(m), compute_uv=False)


def s_class_check(m: GramMap, inv_floor: float = INV_FLOOR) -> SClassReport:
    """Report invertibility and the defect sum (sigma_i - 1)^2 over metric singular values.

    inv_floor is relative to the largest singular value; maps below it are
    reported non-invertible rather than regularized.
    """
    if m.source.dim != m.target.dim:
        return SClassReport(0.0, float(singular_values(m).max(initial=0.0)), np.inf, False, False)
    sv = singular_values(m)
    hs = float(np.sum((sv - 1.0) ** 2))
    invertible = bool(sv[-1] > inv_floor * sv[0])
    return SClassReport(float(sv[-1]), float(sv[0]), hs, invertible, invertible and np.isfinite(hs))


def polar_parts(m: GramMap) -> tuple[GramMap, GramMap]:
    """Split m = U A0 with U a metric isometry and A0 metric-self-adjoint positive."""
    rep = s_class_check(m)
    if not rep.invertible:
        raise ValueError("polar decomposition needs an invertible map")
    R_src = m.source.orthonormal_factor
    R_tgt = m.target.orthonormal_factor
    E = euclidean_matrix(m)
    W, sv, Vt = np.linalg.svd(E)
    U_e = W @ Vt
    P_e = Vt.T @ np.diag(sv) @ Vt
    inv_R_src = scipy.linalg.solve_triangular(R_src, np.eye(m.source.dim))
    inv_R_tgt = scipy.linalg.solve_triangular(R_tgt, np.eye(m.target.dim))
    U = GramMap(m.source, m.target, inv_R_tgt @ U_e @ R_src)
    A0 = GramMap(m.source, m.source, inv_R_src @ P_e @ R_src)
    return U, A0


@dataclass
class ComplexVector:
    """u + iv in the complexification, both parts in source-space coordinates."""

    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        self.re = np.asarray(self.re, dtype=float)
        self.im = np.asarray(self.im, dtype=float)
        if self.re.shape != self.im.shape:
            raise ValueError("re and im must have equal length")

    def norm_sq(self, space: GramSpace) -> float:
        return inner(space, self.re, self.re) + inner(space, self.im, self.im)


def symplectic_extend(a: GramMap, z: ComplexVector) -> ComplexVector:
    """u + iv  ->  A u + i (A^{-1})* v; preserves Im of the complexified inner product."""
    rep = s_class_check(a)
    if not rep.invertible:
        raise ValueError("symplectic extension needs an invertible map")
    re = a.matrix @ z.re
    im = adjoint(inverse(a)).matrix @ z.im
    return ComplexVector(re, im)


def complexified_inner(space: GramSpace, z: ComplexVector, w: ComplexVector) -> complex:
    """Linear in the first argument, conjugate-linear in the second."""
    rr = inner(space, z.re, w.re)
    ii = inner(space, z.im, w.im)
    ir = inner(space, z.im, w.re)
    ri = inner(space, z.re, w.im)
    return complex(rr + ii, ir - ri)


def quasi_orthogonality_defect(parts: Sequence[np.ndarray], g: GramSpace) -> float:
    """Defect of the addition map from the abstract direct sum of the parts onto g.

    Each part is a dim(g) x k basis matrix in g-coordinates.  Zero exactly
    when the parts are mutually orthogonal in g and jointly spanning.
    """
    bases = [np.atleast_2d(np.asarray(p, dtype=float)) for p in parts]
    for p in bases:
        if p.shape[0] != g.dim:
            raise ValueError("part basis must be expressed in g-coordinates")
    spaces = [GramSpace(p.shape[1], p.T @ g.gram @ p) for p in bases]
    src = direct_sum_spaces(spaces)
    addition = GramMap(src, g, np.hstack(bases))
    rep = s_class_check(addition)
    if not rep.verdict:
        raise ValueError("parts do not span g: addition map is not invertible")
    return rep.hs_defect
