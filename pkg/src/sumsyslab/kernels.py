"""Translation-invariant positive-definite kernels on the line.

Two variants: the plain Lebesgue inner product (no pointwise kernel), and
the singular family B(t) = 1/(|t| ln^alpha(1/|t|)) near zero, continued
beyond eps by a slope-matched exponential tail.  Both pieces are convex and
decreasing, so the assembled B is positive definite by Polya's criterion.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.linalg import toeplitz

STANDARD_L2 = "standard_l2"
TSIRELSON = "tsirelson"

CELL_TOL = 1e-12  # absolute quadrature tolerance per cell integral
FOURIER_TOL = 1e-8  # the head error bound carries a factor n, so it is conservative


@dataclass
class Kernel:
    variant: str
    alpha: float = 0.0
    eps: float | None = None
    decay_rate: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.variant == STANDARD_L2:
            self.eps = None
            return
        if self.variant != TSIRELSON:
            raise ValueError(f"unknown kernel variant {self.variant!r}")
        if not 1.0 < self.alpha <= 4.0:
            raise ValueError(
                "alpha must lie in (1, 4]: alpha <= 1 breaks integrability of the "
                "singularity and large alpha is numerically inert"
            )
        if self.eps is None:
            # guarantees t ln^alpha(1/t) increasing on (0, eps], hence B decreasing
            self.eps = math.exp(-(self.alpha + 1.0))
        if not 0.0 < self.eps < math.exp(-self.alpha):
            raise ValueError("eps must lie in (0, e^-alpha)")
        L = -math.log(self.eps)
        self.b_eps = 1.0 / (self.eps * L ** self.alpha)
        # tail B(eps) e^{-kappa (t-eps)} with kappa = -B'(eps)/B(eps): C^1 match
        self.decay_rate = (L - self.alpha) / (self.eps * L)

    @property
    def is_singular(self) -> bool:
        return self.variant == TSIRELSON


def standard_l2() -> Kernel:
    return Kernel(STANDARD_L2)


def tsirelson(alpha: float, eps: float | None = None) -> Kernel:
    return Kernel(TSIRELSON, alpha=alpha, eps=eps)


def kernel_eval(k: Kernel, t: float) -> float:
    """Pointwise B(t); even in t, undefined at 0."""
    if not k.is_singular:
        raise ValueError("the Lebesgue variant has no pointwise kernel")
    t = abs(float(t))
    if t == 0.0:
        raise ValueError("B has an integrable singularity at 0")
    if t <= k.eps:
        return 1.0 / (t * (-math.log(t)) ** k.alpha)
    return k.b_eps * math.exp(-k.decay_rate * (t - k.eps))


def singular_law_antiderivative(alpha: float, s: float) -> float:
    """int_0^s dt / (t ln^alpha(1/t)) = (-ln s)^{1-alpha} / (alpha-1) for s in (0,1)."""
    if not 0.0 < s < 1.0:
        raise ValueError("the closed form holds for s in (0, 1)")
    return (-math.log(s)) ** (1.0 - alpha) / (alpha - 1.0)


def kernel_antiderivative(k: Kernel, s: float) -> float:
    """F(s) = int_0^s B(u) du, closed form on both pieces; F(0) = 0."""
    if not k.is_singular:
        raise ValueError("the Lebesgue variant has no pointwise kernel")
    if s <= 0.0:
        return 0.0
    if s <= k.eps:
        return singular_law_antiderivative(k.alpha, s)
    f_eps = singular_law_antiderivative(k.alpha, k.eps)
    return f_eps + k.b_eps / k.decay_rate * (1.0 - math.exp(-k.decay_rate * (s - k.eps)))


def _signed_antiderivative(k: Kernel, u: float) -> float:
    # odd extension: d/du F(u) = B(u) on both half-lines
    return math.copysign(kernel_antiderivative(k, abs(u)), u) if u else 0.0


def _overlap_weight(c1: tuple[float, float], c2: tuple[float, float]):
    """Piecewise-linear density of s - t over cell_1 x cell_2.

    w(u) = measure{ s in c1 : s - u in c2 }; returns the breakpoints of w.
    """
    l1, r1 = c1
    l2, r2 = c2
    pts = sorted({l1 - r2, r1 - r2, l1 - l2, r1 - l2})
    return pts


def kernel_cell_integral(k: Kernel, cell_i: tuple[float, float],
                         cell_j: tuple[float, float]) -> float:
    """Double integral of B(s - t) over cell_i x cell_j.

    Reduced to int w(u) B(u) du with the trapezoidal overlap weight w.  On
    pieces touching the singularity, integration by parts against the closed
    form F turns it into a single well-behaved quadrature; far pieces use
    plain adaptive quadrature.
    """
    (l1, r1), (l2, r2) = cell_i, cell_j
    if r1 <= l1 or r2 <= l2:
        raise ValueError("cells must be nondegenerate finite intervals")
    if not k.is_singular:
        lo, hi = max(l1, l2), min(r1, r2)
        return max(0.0, hi - lo)

    def w(u: float) -> float:
        return max(0.0, min(r1, r2 + u) - max(l1, l2 + u))

    pts = _overlap_weight(cell_i, cell_j)
    cuts = sorted(set(pts) | {p for p in (0.0, k.eps, -k.eps) if pts[0] < p < pts[-1]})
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if w(0.5 * (a + b)) == 0.0:
            continue
        wa, wb = w(a), w(b)
        slope = (wb - wa) / (b - a)
        if -k.eps <= a and b <= k.eps:
            # by parts: int w B = [w F] - slope * int F, with F smooth through 0
            boundary = wb * _signed_antiderivative(k, b) - wa * _signed_antiderivative(k, a)
            bulk, _ = integrate.quad(lambda u: _signed_antiderivative(k, u), a, b,
                                     epsabs=CELL_TOL, limit=200)
            total += boundary - slope * bulk
        else:
            val, _ = integrate.quad(lambda u: w(u) * kernel_eval(k, u), a, b,
                                    epsabs=CELL_TOL, limit=200)
            total += val
    return total


@dataclass
class KernelGram:
    kernel: Kernel
    interval: tuple[float, float]
    h: float
    matrix: np.ndarray
    quad_error: float = 0.0


def _toeplitz_entries(k: Kernel, h: float, d: int) -> tuple[np.ndarray, float]:
    """Entry(offset) for cells of width h; offset 0..d-1.

    entry(0) = 2 int_0^h F;  entry(j) = int_{jh}^{jh+h} F - int_{jh-h}^{jh} F.
    """
    ent = np.empty(d)
    err_acc = 0.0

    def int_f(a: float, b: float) -> float:
        nonlocal err_acc
        val, err = integrate.quad(lambda u: kernel_antiderivative(k, u), a, b,
                                  epsabs=CELL_TOL, limit=200)
        err_acc += err
        return val

    ent[0] = 2.0 * int_f(0.0, h)
    for j in range(1, d):
        dd = j * h
        ent[j] = int_f(dd, dd + h) - int_f(dd - h, dd)
    return ent, err_acc


def gram_matrix(k: Kernel, interval: tuple[float, float], h: float) -> KernelGram:
    """Gram of cell-indicator functions on a uniform grid; Toeplitz by
    translation invariance.  The Lebesgue variant gives h*I exactly."""
    a, b = interval
    if b <= a:
        raise ValueError("interval must be nondegenerate")
    n_cells = (b - a) / h
    d = int(round(n_cells))
    if abs(n_cells - d) > 1e-9 or d < 1:
        raise ValueError("interval length must be an integral multiple of h")
    if not k.is_singular:
        return KernelGram(k, interval, h, h * np.eye(d))
    ent, err = _toeplitz_entries(k, h, d)
    return KernelGram(k, interval, h, toeplitz(ent), quad_error=err)


def fourier_coeff(k: Kernel, n: int) -> float:
    """B^(n) = int_R B(t) cos(nt) dt, the line transform sampled at integers.

    Head integral by parts against F with oscillatory-aware quadrature, tail
    in closed form.  Raises if the achieved quadrature bound is too loose.
    """
    val, err = fourier_coeff_with_error(k, n)
    if err > FOURIER_TOL:
        raise RuntimeError(f"fourier quadrature did not converge: bound {err:.3e}")
    return val


def fourier_coeff_with_error(k: Kernel, n: int) -> tuple[float, float]:
    if not k.is_singular:
        raise ValueError("the Lebesgue variant has no pointwise kernel")
    n = abs(int(n))
    f_eps = kernel_antiderivative(k, k.eps)
    tail_mass = k.b_eps / k.decay_rate
    if n == 0:
        return 2.0 * (f_eps + tail_mass), 0.0
    # int_0^eps B cos = F(eps) cos(n eps) + n int_0^eps F(t) sin(nt) dt
    cycles = int(n * k.eps / (2.0 * math.pi)) + 1
    osc, err = integrate.quad(lambda t: kernel_antiderivative(k, t), 0.0, k.eps,
                              weight="sin", wvar=n, epsabs=1e-13,
                              limit=max(200, 2 * cycles))
    head = f_eps * math.cos(n * k.eps) + n * osc
    kap = k.decay_rate
    tail = k.b_eps * (kap * math.cos(n * k.eps) - n * math.sin(n * k.eps)) / (kap ** 2 + n ** 2)
    return 2.0 * (head + tail), 2.0 * n * err


def export_gram_csv(gram: KernelGram, path) -> None:
    """Row-major CSV with kernel parameters as #-prefixed header comments."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# variant = {gram.kernel.variant}\n")
        if gram.kernel.is_singular:
            fh.write(f"# alpha = {gram.kernel.alpha!r}\n")
            fh.write(f"# eps = {gram.kernel.eps!r}\n")
            fh.write(f"# decay_rate = {gram.kernel.decay_rate!r}\n")
        fh.write(f"# interval = {gram.interval[0]!r},{gram.interval[1]!r}\n")
        fh.write(f"# h = {gram.h!r}\n")
        fh.write(f"# quad_error = {gram.quad_error!r}\n")
        writer = csv.writer(fh)
        for row in gram.matrix:
            writer.writerow([repr(float(v)) for v in row])
