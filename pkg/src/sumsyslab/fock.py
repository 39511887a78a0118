"""Truncated symmetric Fock space over the complexification of a GramSpace.

Truncation is by total particle number, so second-quantized unitaries stay
exactly unitary at every cutoff while Weyl operators are only approximately
unitary; operators carry an exact_up_to marker recording the sector below
which identities are asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from .hilbert import GramSpace, euclidean_space


@lru_cache(maxsize=None)
def occupation_basis(d: int, N: int) -> tuple[tuple[int, ...], ...]:
    """Occupation multi-indices (n_1..n_d) with total <= N.

    Graded lexicographic: ascending total particle number, within a sector
    descending lexicographic, so the vacuum comes first.
    """
    if d < 1 or N < 0:
        raise ValueError("need d >= 1 and N >= 0")
    out: list[tuple[int, ...]] = []
    for total in range(N + 1):
        sector: list[tuple[int, ...]] = []

        def fill(prefix: list[int], remaining: int, slots: int) -> None:
            if slots == 1:
                sector.append(tuple(prefix) + (remaining,))
                return
            for k in range(remaining + 1):
                prefix.append(k)
                fill(prefix, remaining - k, slots - 1)
                prefix.pop()

        fill([], total, d)
        sector.sort(reverse=True)
        out.extend(sector)
    return tuple(out)


@dataclass
class FockSpace:
    """Bosonic Fock space with d modes truncated at total particle number N."""

    modes: int
    cutoff: int
    base: GramSpace = None  # type: ignore[assignment]
    basis: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.base is None:
            self.base = euclidean_space(self.modes)
        if self.base.dim != self.modes:
            raise ValueError("base space dimension must equal the number of modes")
        self.basis = occupation_basis(self.modes, self.cutoff)
        self.index = {b: i for i, b in enumerate(self.basis)}
        totals = np.array([sum(b) for b in self.basis])
        self._sector_end = np.searchsorted(totals, np.arange(self.cutoff + 1), side="right")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def sector_dim(self, sector: int) -> int:
        """Number of basis states with total particle number <= sector."""
        return int(self._sector_end[min(sector, self.cutoff)])

    def to_modes(self, coords: np.ndarray) -> np.ndarray:
        """Base-space coordinates (complex ok) to orthonormal mode coordinates."""
        return self.base.orthonormal_factor @ np.asarray(coords)


@dataclass
class FockVector:
    space: FockSpace
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.space.dim,):
            raise ValueError("coefficient length must equal the space dimension")
        self.coeffs = c

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


@dataclass
class FockOperator:
    source: FockSpace
    target: FockSpace
    matrix: np.ndarray
    exact_up_to: int = 0

    def __post_init__(self):
        M = np.asarray(self.matrix)
        if M.shape != (self.target.dim, self.source.dim):
            raise ValueError("operator shape does not match source/target bases")
        self.matrix = M


def vacuum(space: FockSpace) -> FockVector:
    c = np.zeros(space.dim, dtype=complex)
    c[0] = 1.0
    return FockVector(space, c)


def exponential_vector(x: np.ndarray, space: FockSpace) -> FockVector:
    """Coherent vector with occupation coefficients prod x_i^{n_i} / sqrt(prod n_i!).

    x must be given in an orthonormal mode basis of the complexified base.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape != (space.modes,):
        raise ValueError("mode vector length must equal the number of modes")
    coeffs = np.empty(space.dim, dtype=complex)
    for i, n in enumerate(space.basis):
        c = 1.0 + 0.0j
        for xi, ni in zip(x, n):
            if ni:
                c *= xi ** ni / math.sqrt(math.factorial(ni))
        coeffs[i] = c
    return FockVector(space, coeffs)


def mode_inner(x: np.ndarray, y: np.ndarray) -> complex:
    """Mode-space inner product, linear in the first argument."""
    return complex(np.sum(np.asarray(x) * np.conj(np.asarray(y))))


def exp_inner(x: np.ndarray, y: np.ndarray, N: int) -> complex:
    """Truncated <e(x), e(y)> = sum_{n<=N} <x,y>^n / n!, converging to exp<x,y>."""
    z = mode_inner(x, y)
    total = 0.0 + 0.0j
    term = 1.0 + 0.0j
    for n in range(N + 1):
        if n > 0:
            term *= z / n
        total += term
    return total


@lru_cache(maxsize=None)
def _creation_cached(d: int, N: int) -> tuple[np.ndarray, ...]:
    basis = occupation_basis(d, N)
    index = {b: i for i, b in enumerate(basis)}
    D = len(basis)
    ops = []
    for i in range(d):
        a = np.zeros((D, D))
        for col, b in enumerate(basis):
            if sum(b) + 1 > N:
                continue  # rows beyond the cutoff are dropped
            up = list(b)
            up[i] += 1
            a[index[tuple(up)], col] = math.sqrt(b[i] + 1)
        ops.append(a)
    return tuple(ops)


def ladder_matrices(space: FockSpace) -> tuple[list[FockOperator], list[FockOperator]]:
    """Per-mode creation and annihilation operators; annihilation is the adjoint."""
    creation = [
        FockOperator(space, space, a.copy(), exact_up_to=space.cutoff - 1)
        for a in _creation_cached(space.modes, space.cutoff)
    ]
    annihilation = [
        FockOperator(space, space, op.matrix.T.copy(), exact_up_to=space.cutoff - 1)
        for op in creation
    ]
    return creation, annihilation


def weyl(x: np.ndarray, space: FockSpace) -> FockOperator:
    """exp(sum_i x_i a_i^dag - conj(x_i) a_i) on the truncated space.

    Satisfies W(x) e(y) = exp(-|x|^2/2 - <y,x>) e(y+x) in the cutoff limit;
    keep |x|^2 <= N/4 if the low sectors are meant to be trustworthy.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape != (space.modes,):
        raise ValueError("mode vector length must equal the number of modes")
    create = _creation_cached(space.modes, space.cutoff)
    gen = np.zeros((space.dim, space.dim), dtype=complex)
    for xi, a in zip(x, create):
        gen += xi * a - np.conj(xi) * a.T
    return FockOperator(space, space, scipy.linalg.expm(gen), exact_up_to=space.cutoff)


def second_quantize(u: np.ndarray, space: FockSpace, target: FockSpace | None = None,
                    unitary_tol: float = 1e-10) -> FockOperator:
    """Block-graded lift of a unitary mode map: Exp(U) e(x) = e(Ux).

    The sector-n block is the symmetrized n-th tensor power of u, built by
    transforming creation operators, so the result is exactly unitary and
    vacuum-preserving at every cutoff.
    """
    u = np.asarray(u)
    target = target or space
    if target.modes != space.modes or target.cutoff != space.cutoff:
        raise ValueError("source and target must share mode count and cutoff")
    if u.shape != (space.modes, space.modes):
        raise ValueError("mode map must be square over the modes")
    if np.abs(u.conj().T @ u - np.eye(space.modes)).max() > unitary_tol:
        raise ValueError("mode map is not unitary within tolerance")
    create = _creation_cached(space.modes, space.cutoff)
    transformed = [
        sum(u[j, i] * create[j] for j in range(space.modes)) for i in range(space.modes)
    ]
    dtype = complex if np.iscomplexobj(u) else float
    out = np.zeros((space.dim, space.dim), dtype=dtype)
    out[0, 0] = 1.0
    for col, b in enumerate(space.basis):
        if sum(b) == 0:
            continue
        i = next(k for k in range(space.modes) if b[k] > 0)
        parent = list(b)
        parent[i] -= 1
        pcol = space.index[tuple(parent)]
        out[:, col] = (transformed[i] @ out[:, pcol]) / math.sqrt(b[i])
    return FockOperator(space, target, out, exact_up_to=space.cutoff)


def restricted_norm(matrix: np.ndarray, space: FockSpace, sector: int) -> float:
    """Largest singular value of the block with row and column totals <= sector.

    Full-matrix norms are dominated by meaningless cutoff-edge rows, so
    residuals are always reported on sector-square blocks.
    """
    k = space.sector_dim(sector)
    block = matrix[:k, :k]
    if block.size == 0:
        return 0.0
    return float(np.linalg.norm(block, 2))


def ccr_residual(space: FockSpace, x: np.ndarray, y: np.ndarray, sector: int,
                 phase_sign: int = 1) -> float:
    """Residual of W(x) W(y) = exp(phase_sign * i * Im<x,y>) W(x+y) on a sector block.

    <x,y> is linear in the first argument.  The constructed operators satisfy
    the identity with phase_sign=+1, equivalently exp(-i Im<x,y>) under the
    opposite (conjugate-linear-in-first) convention.
    """
    Wx = weyl(x, space).matrix
    Wy = weyl(y, space).matrix
    Wxy = weyl(np.asarray(x) + np.asarray(y), space).matrix
    phase = np.exp(phase_sign * 1j * np.imag(mode_inner(x, y)))
    return restricted_norm(Wx @ Wy - phase * Wxy, space, sector)
