"""Finite truncation lab: a family of PSD pairs whose parallel sum vanishes
identically while every solution object blows up with the dimension.

The d-th kit truncates a weighted-shift construction to d modes with weights
t_i = 1/i.  With S = diag(t) it carries

    A0 = [[I, S], [S, S^2]]      (rank d, range increasingly tangent to B0's)
    B0 = [[I, 0], [0, 0]]        (rank d, the first-coordinate corner)

plus closed forms for (A0 + B0)^(1/2), for the unique solution X of
(A0 + B0)^(1/2) X = B0 (which has norm exactly 1 at every d), and for the
4d x 4d block operator [[B0, B0], [B0, A0 + B0]] whose shorted corner is
A0 : B0 = 0.  Meanwhile the plain strong solution of (A0 + B0) X = B0 has
norm sqrt(1 + d^2), and cond(A0 + B0) grows like d^2: divergence you can
plot, against identities that stay exact.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles

from .douglas import reduced_solution
from .errors import InternalInvariantViolation
from .numkit import DEFAULT_TOL, Tol, opnorm, psd_power, range_basis
from .parallel import parallel_sum
from .shorting import partition, shorted

__all__ = [
    "CounterexampleKit",
    "SweepRow",
    "CSV_COLUMNS",
    "DEFAULT_SWEEP_DIMS",
    "make_kit",
    "sqrt_a0_closed_form",
    "kit_block_projector",
    "divergence_sweep",
    "sweep_to_csv",
    "verify_closed_forms",
    "ClosedFormReport",
]

DEFAULT_SWEEP_DIMS = (8, 16, 32, 64, 128, 256)

CSV_COLUMNS = (
    "d",
    "norm_strong_solution",
    "norm_weak_solutions",
    "norm_parallel_sum",
    "shorted_norm",
    "cond_ApB",
    "min_principal_angle",
)


@dataclass(frozen=True)
class CounterexampleKit:
    """All matrices of the d-mode truncation (see module docstring)."""

    d: int
    S: np.ndarray
    A0: np.ndarray
    B0: np.ndarray
    sqrtAB: np.ndarray
    Xunique: np.ndarray
    bigT: np.ndarray


def _weights(d: int) -> np.ndarray:
    return 1.0 / np.arange(1, d + 1, dtype=np.float64)


def _f(t: np.ndarray) -> np.ndarray:
    # per-mode normalizer of the closed-form square root
    return np.sqrt(t * t + 2.0 * t + 2.0)


def make_kit(d: int) -> CounterexampleKit:
    """Build the d-mode kit and fail fast if a closed form is off.

    Parameters
    ----------
    d : int
        Number of modes, d >= 1.

    Raises
    ------
    InternalInvariantViolation
        If sqrtAB^2 != A0 + B0 or sqrtAB @ Xunique != B0 beyond 1e-10;
        every sweep metric silently depends on these two identities.
    """
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"d must be an integer >= 1, got {d!r}")
    t = _weights(d)
    eye = np.eye(d)
    zero = np.zeros((d, d))
    s_mat = np.diag(t)
    a0 = np.block([[eye, s_mat], [s_mat, np.diag(t * t)]])
    b0 = np.block([[eye, zero], [zero, zero]])
    f = _f(t)
    sqrt_ab = np.block(
        [
            [np.diag((t + 2.0) / f), np.diag(t / f)],
            [np.diag(t / f), np.diag(t * (t + 1.0) / f)],
        ]
    )
    x_unique = np.block([[np.diag((t + 1.0) / f), zero], [np.diag(-1.0 / f), zero]])
    apb = a0 + b0
    big_t = np.block([[b0, b0], [b0, apb]])

    gap_sq = opnorm(sqrt_ab @ sqrt_ab - apb)
    if gap_sq > 1e-10 * opnorm(apb):
        raise InternalInvariantViolation(
            f"closed-form square root off by {gap_sq:.3e} at d={d}"
        )
    gap_x = opnorm(sqrt_ab @ x_unique - b0)
    if gap_x > 1e-10:
        raise InternalInvariantViolation(
            f"closed-form unique solution off by {gap_x:.3e} at d={d}"
        )
    return CounterexampleKit(
        d=d, S=s_mat, A0=a0, B0=b0, sqrtAB=sqrt_ab, Xunique=x_unique, bigT=big_t
    )


def sqrt_a0_closed_form(d: int) -> np.ndarray:
    """Closed form of A0^(1/2): per mode, [[1, t], [t, t^2]] / sqrt(1 + t^2)."""
    t = _weights(d)
    g = 1.0 / np.sqrt(1.0 + t * t)
    return np.block(
        [[np.diag(g), np.diag(g * t)], [np.diag(g * t), np.diag(g * t * t)]]
    )


def kit_block_projector(d: int) -> np.ndarray:
    """Projector onto the first 2d of 4d coordinates (the M = N corner of bigT)."""
    p = np.zeros((4 * d, 4 * d))
    for i in range(2 * d):
        p[i, i] = 1.0
    return p


@dataclass(frozen=True)
class SweepRow:
    """One dimension's worth of divergence diagnostics."""

    d: int
    norm_strong_solution: float
    norm_weak_solutions: float
    norm_parallel_sum: float
    shorted_norm: float
    cond_ApB: float
    min_principal_angle: float


def _sweep_row(d: int, tol: Tol) -> SweepRow:
    kit = make_kit(d)
    apb = kit.A0 + kit.B0

    strong = reduced_solution(apb, kit.B0, tol)

    proj = kit_block_projector(d)
    blk = partition(kit.bigT, proj, proj, tol)
    short = shorted(blk, tol)
    wd = short.witnesses
    norm_weak = max(opnorm(wd.E), opnorm(wd.F), opnorm(wd.Etilde), opnorm(wd.Ftilde))

    psum = parallel_sum(kit.A0, kit.B0, tol)

    svals = np.linalg.svd(apb, compute_uv=False)
    cond = float(svals[0] / svals[-1])

    angles = subspace_angles(range_basis(kit.A0, tol), range_basis(kit.B0, tol))
    min_angle = float(angles.min()) if angles.size else 0.0

    return SweepRow(
        d=d,
        norm_strong_solution=opnorm(strong.D),
        norm_weak_solutions=norm_weak,
        norm_parallel_sum=opnorm(psum.value),
        shorted_norm=opnorm(short.shorted),
        cond_ApB=cond,
        min_principal_angle=min_angle,
    )


def divergence_sweep(dims=None, tol: Tol = DEFAULT_TOL, max_workers: int | None = None):
    """Run the divergence diagnostics over a grid of dimensions.

    Parameters
    ----------
    dims : sequence of int, optional
        Strictly ascending dimensions, default (8, 16, 32, 64, 128, 256).
    tol : Tol
    max_workers : int, optional
        Rows are independent; values > 1 run them in a thread pool.  Output
        order follows ``dims`` regardless of completion order.

    Returns
    -------
    list of SweepRow
    """
    if dims is None:
        dims = DEFAULT_SWEEP_DIMS
    dims = [int(d) for d in dims]
    if not dims:
        raise ValueError("dims must be non-empty")
    if any(d < 1 for d in dims):
        raise ValueError("all dims must be >= 1")
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise ValueError("dims must be strictly ascending")
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(lambda d: _sweep_row(d, tol), dims))
    return [_sweep_row(d, tol) for d in dims]


def sweep_to_csv(rows) -> str:
    """Render sweep rows as CSV with the fixed column schema (deterministic bytes)."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                [str(row.d)]
                + [
                    repr(float(getattr(row, name)))
                    for name in CSV_COLUMNS[1:]
                ]
            )
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ClosedFormReport:
    """Residuals of every closed form against its numerically computed twin."""

    d: int
    residuals: dict
    passed: bool


def verify_closed_forms(d: int, tol: Tol = DEFAULT_TOL) -> ClosedFormReport:
    """Cross-check the kit's closed forms against direct numerics at one d."""
    kit = make_kit(d)
    apb = kit.A0 + kit.B0
    sq_a0 = sqrt_a0_closed_form(d)
    residuals = {
        "sqrt_sum_squares_back": opnorm(kit.sqrtAB @ kit.sqrtAB - apb),
        "sqrt_sum_vs_psd_power": opnorm(psd_power(apb, 0.5, tol) - kit.sqrtAB),
        "unique_solution_equation": opnorm(kit.sqrtAB @ kit.Xunique - kit.B0),
        "unique_solution_vs_direct_solve": opnorm(
            np.linalg.solve(kit.sqrtAB, kit.B0) - kit.Xunique
        ),
        "unique_solution_norm_minus_one": abs(opnorm(kit.Xunique) - 1.0),
        "sqrt_a0_squares_back": opnorm(sq_a0 @ sq_a0 - kit.A0),
        "sqrt_a0_vs_psd_power": opnorm(psd_power(kit.A0, 0.5, tol) - sq_a0),
    }
    passed = all(v <= 1e-9 for v in residuals.values())
    return ClosedFormReport(d=d, residuals=residuals, passed=passed)
