"""Numerical laboratory for sum systems and their Fock-space exponentials.

Finite-dimensional Gram-metric linear algebra, truncated symmetric Fock
spaces with Weyl operators and second quantization, dilation blocks and
the unitary implementing Hilbert-Schmidt perturbations on Fock space,
singular translation-invariant kernels, and subspace limit diagnostics
separating direct-sum behaviour from quasi-direct-sum behaviour.
"""

__version__ = "0.1.0"

from .hilbert import (
    GramSpace,
    GramMap,
    SClassReport,
    ComplexVector,
    inner,
    adjoint,
    compose,
    direct_sum_spaces,
    s_class_check,
    polar_parts,
    symplectic_extend,
    quasi_orthogonality_defect,
)
from .fock import (
    FockSpace,
    FockVector,
    FockOperator,
    occupation_basis,
    exponential_vector,
    exp_inner,
    ladder_matrices,
    weyl,
    second_quantize,
)
from .shale import (
    DilationBlock,
    ModeFrame,
    mode_function,
    dilation_block,
    mode_frame,
    gamma,
    verify_intertwining,
    verify_functorial,
    adjoint_residual,
    verify_weak_continuity,
)
from .kernels import Kernel, KernelGram, kernel_eval, kernel_antiderivative, kernel_cell_integral, gram_matrix, fourier_coeff
from .sumsys import SumSystemInstance, IntervalSpace
from .invariants import ElementarySet, cantor_sequence
