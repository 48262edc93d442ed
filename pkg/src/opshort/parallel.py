"""Parallel sums of PSD matrices and the operator inequalities around them.

The parallel sum A : B is defined through the bilateral shorted operator of
the block matrix [[A, A], [A, A + B]] relative to the first-summand corner;
for positive definite inputs it agrees with (A^-1 + B^-1)^-1, which is kept
as an independent cross-check route rather than folded into the primary one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .douglas import reduced_solution
from .errors import InternalInvariantViolation, NotPositiveDefinite, NotPSD, ShapeMismatch
from .numkit import DEFAULT_TOL, Tol, as_matrix, opnorm
from .shorting import partition, shorted

__all__ = [
    "ParallelSumResult",
    "Lemma69Result",
    "ParallelEquationSolution",
    "parallel_sum",
    "hansen_inequality_check",
    "lemma_69_check",
    "solve_parallel_equation",
]

# epsilon grid for the regularized trend report
_REG_EPS = (1e-4, 1e-6)


def _psd_part(a, tol: Tol, name: str) -> np.ndarray:
    """Validate Hermitian + PSD (up to the eigenvalue clamp); return the
    Hermitian part."""
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise NotPSD(f"{name} must be square, got shape {m.shape}")
    if opnorm(m - m.conj().T) > tol.residual_rel * opnorm(m):
        raise NotPSD(f"{name} is not Hermitian within residual_rel * ||{name}||")
    h = (m + m.conj().T) / 2.0
    if h.shape[0]:
        w = np.linalg.eigvalsh(h)
        clamp = tol.eig_clamp_rel * float(np.abs(w).max())
        if float(w.min()) < -clamp:
            raise NotPSD(
                f"{name} has eigenvalue {w.min():.6e} below the PSD clamp"
            )
    return h


def _is_pd(h: np.ndarray, tol: Tol) -> bool:
    if h.shape[0] == 0:
        return False
    w = np.linalg.eigvalsh(h)
    return float(w.min()) > tol.eig_clamp_rel * float(np.abs(w).max())


def _clamp_result_psd(value: np.ndarray, scale: float, tol: Tol) -> np.ndarray:
    """Snap a computed parallel sum back onto the PSD cone.

    ``scale`` is the input scale ||A|| + ||B|| (a zero result carries only
    round-off, so its own norm cannot calibrate the clamp).  Eigenvalues in
    [-clamp, 0) are round-off and become 0; anything below the clamp means
    the computation itself broke an invariant.
    """
    h = (value + value.conj().T) / 2.0
    if h.shape[0] == 0:
        return h
    w, v = np.linalg.eigh(h)
    clamp = tol.eig_clamp_rel * max(scale, float(np.abs(w).max()))
    if float(w.min()) < -clamp:
        raise InternalInvariantViolation(
            f"parallel sum came out indefinite: eigenvalue {w.min():.6e}"
        )
    w = np.where(w < 0.0, 0.0, w)
    out = (v * w) @ v.conj().T
    return (out + out.conj().T) / 2.0


def _coordinate_projector(total: int, count: int) -> np.ndarray:
    p = np.zeros((total, total), dtype=np.complex128)
    for i in range(count):
        p[i, i] = 1.0
    return p


def _pd_formula(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.linalg.inv(np.linalg.inv(a) + np.linalg.inv(b))
    return (out + out.conj().T) / 2.0


@dataclass(frozen=True)
class ParallelSumResult:
    """Parallel sum with provenance.

    ``route`` names the route that produced ``value`` (always the
    shorted-block construction); ``route_agreement`` is the maximum deviation
    between that value and any cross-check route that ran (0.0 when none
    did).  ``regularized`` maps epsilon to the deviation of the regularized
    sum (A + eps I) : (B + eps I) from ``value``, reported for its trend,
    never folded into the agreement number.
    """

    value: np.ndarray
    route: str
    route_agreement: float
    regularized: dict


def parallel_sum(a, b, tol: Tol = DEFAULT_TOL) -> ParallelSumResult:
    """Parallel sum A : B of two PSD matrices of the same size.

    Parameters
    ----------
    a, b : array_like
        Hermitian PSD matrices, n x n.
    tol : Tol

    Raises
    ------
    NotPSD
        If either input fails the PSD check.
    ShapeMismatch
        If the shapes differ.
    """
    ah = _psd_part(a, tol, "A")
    bh = _psd_part(b, tol, "B")
    if ah.shape != bh.shape:
        raise ShapeMismatch(f"A is {ah.shape} but B is {bh.shape}")
    n = ah.shape[0]
    big = np.block([[ah, ah], [ah, ah + bh]])
    corner = _coordinate_projector(2 * n, n)
    blk = partition(big, corner, corner, tol)
    res = shorted(blk, tol)
    # the ambient shorted matrix is [[A:B, 0], [0, 0]]; the corner block is
    # basis-independent, unlike the core's internal coordinates
    value = _clamp_result_psd(res.shorted[:n, :n], opnorm(ah) + opnorm(bh), tol)

    agreement = 0.0
    if _is_pd(ah, tol) and _is_pd(bh, tol):
        agreement = opnorm(_pd_formula(ah, bh) - value)

    eye = np.eye(n, dtype=np.complex128)
    regularized = {
        eps: opnorm(_pd_formula(ah + eps * eye, bh + eps * eye) - value)
        for eps in _REG_EPS
    }
    return ParallelSumResult(
        value=value,
        route="shorted_block",
        route_agreement=float(agreement),
        regularized=regularized,
    )


def hansen_inequality_check(a, b, c, tol: Tol = DEFAULT_TOL) -> float:
    """Smallest eigenvalue of C* A C + (I - C)* B (I - C) - A : B.

    The inequality says this is nonnegative for every square C; the caller
    decides what slack to allow for round-off.
    """
    ah = _psd_part(a, tol, "A")
    bh = _psd_part(b, tol, "B")
    cm = as_matrix(c, "C")
    if ah.shape != bh.shape:
        raise ShapeMismatch(f"A is {ah.shape} but B is {bh.shape}")
    if cm.shape != ah.shape:
        raise ShapeMismatch(f"C must match A's shape {ah.shape}, got {cm.shape}")
    n = ah.shape[0]
    if n == 0:
        return 0.0
    ps = parallel_sum(ah, bh, tol).value
    eye = np.eye(n, dtype=np.complex128)
    rhs = cm.conj().T @ ah @ cm + (eye - cm).conj().T @ bh @ (eye - cm)
    diff = rhs - ps
    diff = (diff + diff.conj().T) / 2.0
    return float(np.linalg.eigvalsh(diff).min())


@dataclass(frozen=True)
class Lemma69Result:
    """Outcome of the inverse-shift inequality check.

    ``lambda_min`` is the smallest eigenvalue of
    Y* Y + (I - Y)* X^-1 (I - Y) - (I + X)^-1, which is >= 0 for positive
    definite X; ``equality_gap`` is ||Y - (I + X)^-1||, which is 0 exactly
    at the minimizing Y.
    """

    lambda_min: float
    equality_gap: float


def lemma_69_check(x, y, tol: Tol = DEFAULT_TOL) -> Lemma69Result:
    """Evaluate the inequality (I + X)^-1 <= Y* Y + (I - Y)* X^-1 (I - Y).

    Parameters
    ----------
    x : array_like
        Hermitian positive definite matrix.
    y : array_like
        Arbitrary square matrix of the same size.

    Raises
    ------
    NotPositiveDefinite
        If X is not Hermitian positive definite beyond the clamp.
    """
    xm = as_matrix(x, "X")
    if xm.shape[0] != xm.shape[1]:
        raise NotPositiveDefinite(f"X must be square, got shape {xm.shape}")
    if opnorm(xm - xm.conj().T) > tol.residual_rel * opnorm(xm):
        raise NotPositiveDefinite("X is not Hermitian within residual_rel * ||X||")
    xh = (xm + xm.conj().T) / 2.0
    n = xh.shape[0]
    if n == 0:
        return Lemma69Result(lambda_min=0.0, equality_gap=0.0)
    w = np.linalg.eigvalsh(xh)
    if float(w.min()) <= tol.eig_clamp_rel * float(np.abs(w).max()):
        raise NotPositiveDefinite(
            f"X has smallest eigenvalue {w.min():.6e}; positive definiteness "
            "within the clamp is required"
        )
    ym = as_matrix(y, "Y")
    if ym.shape != xh.shape:
        raise ShapeMismatch(f"Y must match X's shape {xh.shape}, got {ym.shape}")
    eye = np.eye(n, dtype=np.complex128)
    lhs = np.linalg.inv(eye + xh)
    rhs = ym.conj().T @ ym + (eye - ym).conj().T @ np.linalg.inv(xh) @ (eye - ym)
    diff = rhs - lhs
    diff = (diff + diff.conj().T) / 2.0
    return Lemma69Result(
        lambda_min=float(np.linalg.eigvalsh(diff).min()),
        equality_gap=opnorm(ym - lhs),
    )


@dataclass(frozen=True)
class ParallelEquationSolution:
    """Reduced solution X of (A + B) X = B together with its certificate.

    At this X the quadratic form X* A X + (I - X)* B (I - X) attains the
    parallel sum A : B; ``diagnostics`` records the equation residual, the
    solve residual, ||X||, and the condition number of A + B on its range.
    """

    X: np.ndarray
    norm: float
    diagnostics: dict


def solve_parallel_equation(a, b, tol: Tol = DEFAULT_TOL) -> ParallelEquationSolution:
    """Solve (A + B) X = B in the reduced sense and certify the variational
    identity X* A X + (I - X)* B (I - X) = A : B.

    Raises
    ------
    InternalInvariantViolation
        If the certified identity misses by more than
        1e-8 * (||A|| + ||B||); for PSD inputs this bound cannot fail
        mathematically, only numerically.
    """
    ah = _psd_part(a, tol, "A")
    bh = _psd_part(b, tol, "B")
    if ah.shape != bh.shape:
        raise ShapeMismatch(f"A is {ah.shape} but B is {bh.shape}")
    n = ah.shape[0]
    total = ah + bh
    sol = reduced_solution(total, bh, tol)
    x = sol.D
    ps = parallel_sum(ah, bh, tol).value
    eye = np.eye(n, dtype=np.complex128)
    attained = x.conj().T @ ah @ x + (eye - x).conj().T @ bh @ (eye - x)
    eq_residual = opnorm(attained - ps)
    bound = 1e-8 * (opnorm(ah) + opnorm(bh))
    if eq_residual > bound:
        raise InternalInvariantViolation(
            f"variational identity missed by {eq_residual:.3e} (bound {bound:.3e})"
        )
    if n:
        s = np.linalg.svd(total, compute_uv=False)
        r = 0 if s.size == 0 or s[0] == 0.0 else int(np.count_nonzero(s > tol.rank_rel * s[0]))
        cond_on_range = float(s[0] / s[r - 1]) if r else 0.0
    else:
        cond_on_range = 0.0
    return ParallelEquationSolution(
        X=x,
        norm=opnorm(x),
        diagnostics={
            "equation_residual": float(eq_residual),
            "solve_residual": float(sol.residual),
            "norm_X": opnorm(x),
            "cond_on_range": cond_on_range,
        },
    )
