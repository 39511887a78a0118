"""Additive units of a sum system at a fixed grid resolution.

The real unit is the indicator family; the imaginary one is defined through
the moment linear system Gram * y = m, which normalizes the unit pairing to
<x_1, y_1> = 1.  The continuum object is a limit; each solve reports the
Gram condition number and residual so the finite proxy can be judged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import Kernel, fourier_coeff
from .sumsys import SumSystemInstance, snap_to_grid, space


@dataclass
class MomentSolve:
    coords: np.ndarray
    condition: float
    residual: float


def real_unit(sys: SumSystemInstance, t: float) -> np.ndarray:
    """Indicator of (0, t) in cell coordinates; additivity is a grid identity."""
    kt = snap_to_grid(t, sys.h, "unit time")
    return np.ones(kt)


def moment_vector(sys: SumSystemInstance, t: float, within: float | None = None) -> np.ndarray:
    """(m_t)_i = Lebesgue measure of cell_i intersected with (0, t)."""
    kt = snap_to_grid(t, sys.h, "unit time")
    kd = kt if within is None else snap_to_grid(within, sys.h, "ambient length")
    m = np.zeros(kd)
    m[:kt] = sys.h
    return m


def solve_moment(sys: SumSystemInstance, m: np.ndarray,
                 interval: tuple[float, float]) -> MomentSolve:
    K = space(sys, *interval).space.gram
    y = np.linalg.solve(K, m)
    residual = float(np.abs(K @ y - m).max())
    condition = float(np.linalg.cond(K))
    return MomentSolve(y, condition, residual)


def imaginary_unit(sys: SumSystemInstance, t: float) -> MomentSolve:
    """Solve Gram * y_t = m_t on (0, t); for the Lebesgue kernel y_t = x_t exactly."""
    m = moment_vector(sys, t)
    return solve_moment(sys, m, (0.0, t))


def unit_pairing(sys: SumSystemInstance, t: float) -> float:
    """<x_t, y_t> under the kernel Gram; equals t up to the solve tolerance."""
    x = real_unit(sys, t)
    sol = imaginary_unit(sys, t)
    K = space(sys, 0.0, t).space.gram
    return float(x @ K @ sol.coords)


def y_prime(sys: SumSystemInstance, elementary, within: tuple[float, float] = (0.0, 1.0)) -> MomentSolve:
    """The vector pairing as <x_(s1,s2), y'_E> = measure((s1,s2) cap E).

    Solves the ambient Gram against the masked moment vector, which also
    makes it orthogonal to every step function supported in the complement.
    """
    d = snap_to_grid(within[1] - within[0], sys.h, "ambient length")
    m = np.zeros(d)
    for (a, b) in elementary.intervals:
        ka = snap_to_grid(a - within[0], sys.h, "set endpoint")
        kb = snap_to_grid(b - within[0], sys.h, "set endpoint")
        m[ka:kb] = sys.h
    return solve_moment(sys, m, within)


def yprime_norm(sys: SumSystemInstance, elementary,
                within: tuple[float, float] = (0.0, 1.0)) -> float:
    if not elementary.intervals:
        return 0.0
    sol = y_prime(sys, elementary, within)
    K = space(sys, *within).space.gram
    return float(math.sqrt(max(sol.coords @ K @ sol.coords, 0.0)))


def yprime_boundedness_probe(sys: SumSystemInstance, sets,
                             within: tuple[float, float] = (0.0, 1.0)) -> dict:
    norms = [yprime_norm(sys, E, within) for E in sets]
    return {"norms": norms, "max": max(norms) if norms else 0.0}


@dataclass
class SeriesTable:
    checkpoints: list[int]
    partial_sums: list[float]
    blocks: list[float]
    block_ratios: list[float]
    zero_term: float
    converging: bool


def existence_series(k: Kernel, n_max: int, t0: float = 1.0) -> SeriesTable:
    """Partial sums of sum_{0<|n|<=N} |e^{i n t0} - 1|^2 / (n^2 B^(n)^2).

    Blocks are sums over dyadic ranges (2^j, 2^(j+1)]; the convergence flag
    requires the tail half of the blocks to decrease strictly.  The n = 0
    term is included as its removable-singularity limit t0^2 / B^(0)^2.
    """
    if not k.is_singular:
        raise ValueError("the series diagnostic needs the singular kernel")
    if n_max < 4:
        raise ValueError("n_max too small for a dyadic table")
    n_blocks = int(math.floor(math.log2(n_max)))
    top = 2 ** n_blocks
    ns = np.arange(1, top + 1)
    bh = np.array([fourier_coeff(k, int(n)) for n in ns])
    terms = 2.0 * (2.0 * (1.0 - np.cos(ns * t0))) / (ns ** 2 * bh ** 2)
    zero_term = t0 ** 2 / fourier_coeff(k, 0) ** 2
    checkpoints, partial_sums, blocks = [], [], []
    running = zero_term + float(terms[0])  # n = +-1 folded into the base
    for j in range(n_blocks):
        lo, hi = 2 ** j, 2 ** (j + 1)
        block = float(terms[lo:hi].sum())
        running += block
        checkpoints.append(hi)
        blocks.append(block)
        partial_sums.append(running)
    ratios = [blocks[i + 1] / blocks[i] for i in range(len(blocks) - 1)]
    tail = blocks[len(blocks) // 2:]
    converging = all(b < a for a, b in zip(tail[:-1], tail[1:]))
    return SeriesTable(checkpoints, partial_sums, blocks, ratios, zero_term, converging)
