"""Block partitions of an operator relative to a pair of closed subspaces,
complementability tests, and the bilateral shorted operator.

Given T mapping H -> K, a subspace M of H, and a subspace N of K (both handed
in as orthogonal projectors), the 2x2 partition stores the four compressions

    T11 : M -> N        T12 : M_perp -> N
    T21 : M -> N_perp   T22 : M_perp -> N_perp

in coordinates of deterministic orthonormal bases.  The pair (M, N) is
complementable when both T22 X = T21 and T22* Y = T12* are solvable; it is
weakly complementable when four half-power systems admit reduced solutions:

    1.  V(T22)    Y1 = T21          -> E
    2.  |T22|^(1/2)  Y2 = T12*      -> F
    3.  |T22*|^(1/2) Z1 = T21       -> Etilde
    4.  V(T22)*   Z2 = T12*         -> Ftilde

with V(T22) the canonical half-power factor of T22.  The bilateral shorted
operator is then T11 - (F* E + Ftilde* Etilde) / 2 embedded back into the
ambient spaces; the two cross products agree, which :func:`shorted` verifies
rather than assumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .douglas import reduced_solution
from .errors import (
    InternalInvariantViolation,
    NotAProjector,
    NotSolvable,
    NotWeaklyComplementable,
    ShapeMismatch,
    WitnessInvalid,
)
from .numkit import (
    DEFAULT_TOL,
    Tol,
    absolute_value,
    as_matrix,
    numerical_rank,
    opnorm,
    psd_power,
    range_projector,
)
from .polar import polar_decompose, v_operator

__all__ = [
    "BlockOperator",
    "Complementability",
    "WeakComplementData",
    "ShortedResult",
    "RangeKernelReport",
    "check_projector",
    "partition",
    "is_complementable",
    "complementable_idempotents",
    "weak_complement_data",
    "shorted",
    "verify_range_kernel",
    "redundancy_report",
]

# fixed absolute bounds for accepting a matrix as an orthogonal projector
_PROJ_HERM_BOUND = 1e-10
_PROJ_IDEM_BOUND = 1e-10


def _validated_projector_eig(m: np.ndarray, tol: Tol):
    """Validate a square nonempty projector candidate; return its spectrum.

    The gap tests use a Frobenius fast path (the Frobenius norm dominates
    the operator norm, so a small Frobenius gap already certifies the bound)
    and fall back to exact singular values only near the boundary.
    """
    diff = m - m.conj().T
    herm_gap = float(np.linalg.norm(diff))
    if herm_gap > _PROJ_HERM_BOUND:
        herm_gap = opnorm(diff)
        if herm_gap > _PROJ_HERM_BOUND:
            raise NotAProjector(
                f"||P - P*|| = {herm_gap:.3e} exceeds {_PROJ_HERM_BOUND}"
            )
    idem = m @ m - m
    idem_gap = float(np.linalg.norm(idem))
    if idem_gap > _PROJ_IDEM_BOUND:
        idem_gap = opnorm(idem)
        if idem_gap > _PROJ_IDEM_BOUND:
            raise NotAProjector(
                f"||P^2 - P|| = {idem_gap:.3e} exceeds {_PROJ_IDEM_BOUND}"
            )
    w, v = np.linalg.eigh((m + m.conj().T) / 2.0)
    stray = float(np.minimum(np.abs(w), np.abs(w - 1.0)).max())
    if stray > tol.eig_clamp_rel:
        raise NotAProjector(
            f"projector eigenvalues stray {stray:.3e} from {{0, 1}}, beyond "
            f"eig_clamp_rel = {tol.eig_clamp_rel:.1e}"
        )
    rank = int(np.count_nonzero(w > 0.5))
    # descending order puts the rank-1 cluster first
    return np.ascontiguousarray(w[::-1]), np.ascontiguousarray(v[:, ::-1]), rank


def check_projector(p, tol: Tol = DEFAULT_TOL) -> int:
    """Validate an orthogonal projector and return its rank.

    Requires ||P - P*|| <= 1e-10, ||P^2 - P|| <= 1e-10, and every eigenvalue
    within eig_clamp_rel of {0, 1}.  Near-degenerate projectors are rejected,
    never rounded into shape.
    """
    m = as_matrix(p, "projector")
    if m.shape[0] != m.shape[1]:
        raise NotAProjector(f"projector must be square, got shape {m.shape}")
    if m.shape[0] == 0:
        return 0
    return _validated_projector_eig(m, tol)[2]


def _ordered_basis(vectors: np.ndarray) -> np.ndarray:
    """Canonical ordering of an eigenspace basis: phase-fixed columns sorted
    lexicographically (descending) on their rounded coordinates."""
    n, k = vectors.shape
    if k == 0:
        return np.zeros((n, 0), dtype=np.complex128)
    # rotate each column so its first significant coordinate is real positive
    sig = np.abs(vectors) > 1e-8
    first = np.argmax(sig, axis=0)
    pivots = vectors[first, np.arange(k)]
    mags = np.abs(pivots)
    has_sig = sig[first, np.arange(k)]
    phases = np.where(has_sig, pivots.conj() / np.where(mags > 0.0, mags, 1.0), 1.0)
    cols = vectors * phases
    # lexsort takes its last key as primary, so interleave (imag, real) per
    # coordinate with coordinate 0 last; orthonormal columns never tie
    re = np.round(cols.real, 12)
    im = np.round(cols.imag, 12)
    keys = np.empty((2 * n, k))
    keys[0::2] = im[::-1]
    keys[1::2] = re[::-1]
    order = np.lexsort(keys)[::-1]
    return np.ascontiguousarray(cols[:, order])


def _projector_bases(p: np.ndarray, tol: Tol):
    """Orthonormal bases (range, kernel) of a validated projector, in the
    deterministic order used throughout the package."""
    m = as_matrix(p, "projector")
    if m.shape[0] != m.shape[1]:
        raise NotAProjector(f"projector must be square, got shape {m.shape}")
    if m.shape[0] == 0:
        empty = np.zeros((0, 0), dtype=np.complex128)
        return empty, empty
    _, vecs, rank = _validated_projector_eig(m, tol)
    basis_range = _ordered_basis(vecs[:, :rank])
    basis_kernel = _ordered_basis(vecs[:, rank:])
    return basis_range, basis_kernel


@dataclass(frozen=True)
class BlockOperator:
    """2x2 partition of T relative to projectors PM (domain) and PN (codomain).

    The corner blocks are stored in coordinates of the orthonormal basis
    columns ``basis_m``, ``basis_m_perp``, ``basis_n``, ``basis_n_perp``;
    conjugating the block matrix back by these bases reproduces T.
    """

    T: np.ndarray
    PM: np.ndarray
    PN: np.ndarray
    basis_m: np.ndarray
    basis_m_perp: np.ndarray
    basis_n: np.ndarray
    basis_n_perp: np.ndarray
    T11: np.ndarray
    T12: np.ndarray
    T21: np.ndarray
    T22: np.ndarray

    @property
    def dim_m(self) -> int:
        return self.basis_m.shape[1]

    @property
    def dim_n(self) -> int:
        return self.basis_n.shape[1]

    def lift(self, x11=None, x12=None, x21=None, x22=None) -> np.ndarray:
        """Ambient domain -> codomain matrix from block pieces (None = 0)."""
        out = np.zeros(self.T.shape, dtype=np.complex128)
        for x, left, right in (
            (x11, self.basis_n, self.basis_m),
            (x12, self.basis_n, self.basis_m_perp),
            (x21, self.basis_n_perp, self.basis_m),
            (x22, self.basis_n_perp, self.basis_m_perp),
        ):
            if x is None:
                continue
            xm = as_matrix(x, "block piece")
            if xm.shape != (left.shape[1], right.shape[1]):
                raise ShapeMismatch(
                    f"block piece has shape {xm.shape}, expected "
                    f"{(left.shape[1], right.shape[1])}"
                )
            out += left @ xm @ right.conj().T
        return out

    def lift_domain(self, x11=None, x12=None, x21=None, x22=None) -> np.ndarray:
        """Ambient domain -> domain matrix from M (+) M_perp block pieces."""
        return _lift_square(self.basis_m, self.basis_m_perp, x11, x12, x21, x22)

    def lift_codomain(self, x11=None, x12=None, x21=None, x22=None) -> np.ndarray:
        """Ambient codomain -> codomain matrix from N (+) N_perp block pieces."""
        return _lift_square(self.basis_n, self.basis_n_perp, x11, x12, x21, x22)

    def reassembled(self) -> np.ndarray:
        """T rebuilt from its four corners; equals T to working precision."""
        return self.lift(self.T11, self.T12, self.T21, self.T22)


def _lift_square(b1, b2, x11, x12, x21, x22) -> np.ndarray:
    n = b1.shape[0]
    out = np.zeros((n, n), dtype=np.complex128)
    for x, left, right in (
        (x11, b1, b1),
        (x12, b1, b2),
        (x21, b2, b1),
        (x22, b2, b2),
    ):
        if x is None:
            continue
        xm = as_matrix(x, "block piece")
        if xm.shape != (left.shape[1], right.shape[1]):
            raise ShapeMismatch(
                f"block piece has shape {xm.shape}, expected "
                f"{(left.shape[1], right.shape[1])}"
            )
        out += left @ xm @ right.conj().T
    return out


def partition(t, pm, pn, tol: Tol = DEFAULT_TOL) -> BlockOperator:
    """Partition T into the four compressions induced by (M, N).

    Parameters
    ----------
    t : array_like, shape (k, n)
        The operator, domain dimension n, codomain dimension k.
    pm : array_like, shape (n, n)
        Orthogonal projector onto M in the domain.
    pn : array_like, shape (k, k)
        Orthogonal projector onto N in the codomain.
    tol : Tol

    Raises
    ------
    NotAProjector
        If pm or pn fails the projector checks.
    ShapeMismatch
        If the projector shapes do not match T's domain/codomain.
    """
    tm = as_matrix(t, "T")
    pmm = as_matrix(pm, "PM")
    pnn = as_matrix(pn, "PN")
    k, n = tm.shape
    if pmm.shape != (n, n):
        raise ShapeMismatch(f"PM must be {n}x{n} on the domain, got {pmm.shape}")
    if pnn.shape != (k, k):
        raise ShapeMismatch(f"PN must be {k}x{k} on the codomain, got {pnn.shape}")
    bm, bmp = _projector_bases(pmm, tol)
    if np.array_equal(pnn, pmm):
        bn, bnp = bm, bmp
    else:
        bn, bnp = _projector_bases(pnn, tol)
    bn_h = bn.conj().T
    bnp_h = bnp.conj().T
    return BlockOperator(
        T=tm,
        PM=(pmm + pmm.conj().T) / 2.0,
        PN=(pnn + pnn.conj().T) / 2.0,
        basis_m=bm,
        basis_m_perp=bmp,
        basis_n=bn,
        basis_n_perp=bnp,
        T11=bn_h @ tm @ bm,
        T12=bn_h @ tm @ bmp,
        T21=bnp_h @ tm @ bm,
        T22=bnp_h @ tm @ bmp,
    )


@dataclass(frozen=True)
class Complementability:
    """Verdict of the two-system complementability test.

    ``C`` solves T22 C = T21 and ``D`` solves T22* D = T12*, both reduced;
    a witness is None when its system is unsolvable.  ``margins`` holds the
    two range-inclusion margins in system order.
    """

    complementable: bool
    C: np.ndarray | None
    D: np.ndarray | None
    margins: tuple[float, float]


def is_complementable(block: BlockOperator, tol: Tol = DEFAULT_TOL) -> Complementability:
    """Decide (M, N)-complementability and return the canonical witnesses."""
    witnesses = []
    margins = []
    for aa, cc in (
        (block.T22, block.T21),
        (block.T22.conj().T, block.T12.conj().T),
    ):
        try:
            sol = reduced_solution(aa, cc, tol)
            witnesses.append(sol.D)
            margins.append(sol.margin)
        except NotSolvable as exc:
            witnesses.append(None)
            margins.append(exc.margin)
    return Complementability(
        complementable=witnesses[0] is not None and witnesses[1] is not None,
        C=witnesses[0],
        D=witnesses[1],
        margins=(margins[0], margins[1]),
    )


def complementable_idempotents(block: BlockOperator, c, d, tol: Tol = DEFAULT_TOL):
    """Idempotent witnesses (P, Q) of complementability, in ambient coordinates.

    P acts on the domain with range M along a complement adapted to T;
    Q acts on the codomain with range N.  Together they satisfy
    R(P*) = M, R(TP) <= N, R(Q) = N, R((QT)*) <= M.

    Raises
    ------
    WitnessInvalid
        If C or D fails its defining equation beyond residual_rel.
    """
    cm = as_matrix(c, "C")
    dm = as_matrix(d, "D")
    dim_m = block.dim_m
    dim_mp = block.basis_m_perp.shape[1]
    dim_n = block.dim_n
    dim_np = block.basis_n_perp.shape[1]
    if cm.shape != (dim_mp, dim_m):
        raise ShapeMismatch(f"C must be {dim_mp}x{dim_m}, got {cm.shape}")
    if dm.shape != (dim_np, dim_n):
        raise ShapeMismatch(f"D must be {dim_np}x{dim_n}, got {dm.shape}")
    res_c = opnorm(block.T22 @ cm - block.T21) / max(opnorm(block.T21), 1.0)
    if res_c > tol.residual_rel:
        raise WitnessInvalid(f"C fails T22 C = T21 with residual {res_c:.3e}")
    res_d = opnorm(block.T22.conj().T @ dm - block.T12.conj().T) / max(
        opnorm(block.T12), 1.0
    )
    if res_d > tol.residual_rel:
        raise WitnessInvalid(f"D fails T22* D = T12* with residual {res_d:.3e}")
    p = block.lift_domain(x11=np.eye(dim_m, dtype=np.complex128), x21=-cm)
    q = block.lift_codomain(
        x11=np.eye(dim_n, dtype=np.complex128), x12=-dm.conj().T
    )
    return p, q


@dataclass(frozen=True)
class WeakComplementData:
    """Reduced solutions of the four weak-complementability systems.

    Order: 1 -> E, 2 -> F, 3 -> Etilde, 4 -> Ftilde (see module docstring).
    When a system is unsolvable its slot holds the least-squares candidate
    and the matching ``solvable`` flag is False; ``residuals`` always holds
    the four relative equation residuals.
    """

    E: np.ndarray
    F: np.ndarray
    Etilde: np.ndarray
    Ftilde: np.ndarray
    residuals: tuple[float, float, float, float]
    solvable: tuple[bool, bool, bool, bool]


def weak_complement_data(block: BlockOperator, tol: Tol = DEFAULT_TOL) -> WeakComplementData:
    """Solve the four half-power systems attached to the partition."""
    t21 = block.T21
    t12_star = block.T12.conj().T
    v22 = v_operator(block.T22, tol)
    half_right = psd_power(absolute_value(block.T22, "right", tol), 0.5, tol)
    half_left = psd_power(absolute_value(block.T22, "left", tol), 0.5, tol)
    systems = (
        (v22, t21),
        (half_right, t12_star),
        (half_left, t21),
        (v22.conj().T, t12_star),
    )
    solutions = []
    residuals = []
    flags = []
    for a, rhs in systems:
        try:
            sol = reduced_solution(a, rhs, tol)
            solutions.append(sol.D)
            residuals.append(sol.residual)
            flags.append(True)
        except NotSolvable as exc:
            solutions.append(exc.candidate)
            residuals.append(exc.residual)
            flags.append(False)
    return WeakComplementData(
        E=solutions[0],
        F=solutions[1],
        Etilde=solutions[2],
        Ftilde=solutions[3],
        residuals=tuple(residuals),
        solvable=tuple(flags),
    )


@dataclass(frozen=True)
class ShortedResult:
    """Bilateral shorted operator of a partition.

    ``core`` is the M -> N block T11 - (F* E + Ftilde* Etilde) / 2 and
    ``shorted`` is the same operator embedded back into ambient coordinates,
    so PN @ shorted @ PM == shorted.  ``mode`` records whether the stronger
    two-system test also passed ("complementable") or only the weak one
    ("weakly_complementable").
    """

    shorted: np.ndarray
    core: np.ndarray
    witnesses: WeakComplementData
    mode: str


def shorted(block: BlockOperator, tol: Tol = DEFAULT_TOL) -> ShortedResult:
    """Bilateral shorted operator of T relative to (M, N).

    Uses the averaged core (F* E + Ftilde* Etilde) / 2 and verifies that the
    two cross products agree, instead of silently trusting either one.

    Raises
    ------
    NotWeaklyComplementable
        If any of the four systems is unsolvable (1-based indices attached).
    InternalInvariantViolation
        If the two cross products disagree beyond 1e-9 * max(||T||, 1).
    """
    data = weak_complement_data(block, tol)
    if not all(data.solvable):
        failing = [i + 1 for i, ok in enumerate(data.solvable) if not ok]
        raise NotWeaklyComplementable(
            f"weak-complementability systems {failing} are unsolvable", failing
        )
    fe = data.F.conj().T @ data.E
    fte = data.Ftilde.conj().T @ data.Etilde
    gap = opnorm(fe - fte)
    bound = 1e-9 * max(opnorm(block.T), 1.0)
    if gap > bound:
        raise InternalInvariantViolation(
            f"cross products F*E and Ftilde*Etilde disagree by {gap:.3e} "
            f"(bound {bound:.3e})"
        )
    core = block.T11 - 0.5 * (fe + fte)
    ambient = block.lift(x11=core)
    comp = is_complementable(block, tol)
    mode = "complementable" if comp.complementable else "weakly_complementable"
    return ShortedResult(shorted=ambient, core=core, witnesses=data, mode=mode)


@dataclass(frozen=True)
class RangeKernelReport:
    """Rank bookkeeping for the shorted operator.

    range_equal tests R(shorted) = R(T) intersect N and kernel_equal tests
    N(shorted) = M_perp + N(T); for a complementable pair these are the exact
    statements, and in finite dimension the weak case collapses to the same
    equalities (the sandwich's two ends coincide).
    """

    rank_T: int
    rank_shorted: int
    rank_range_intersection: int
    rank_kernel_shorted: int
    rank_kernel_sum: int
    range_equal: bool
    kernel_equal: bool


# angle threshold for declaring two equal-rank subspaces identical; sits far
# above round-off (~1e-11 on clean instances) and far below any honest angle
_SUBSPACE_GAP = 1e-6


def _nullspace_basis(t: np.ndarray, tol: Tol) -> np.ndarray:
    if t.shape[0] == 0:
        return np.eye(t.shape[1], dtype=np.complex128)
    u, s, vh = np.linalg.svd(t)
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(s > tol.rank_rel * s[0]))
    return np.ascontiguousarray(vh[r:].conj().T)


def _intersection_basis(p1: np.ndarray, p2: np.ndarray, tol: Tol) -> np.ndarray:
    # x lies in both ranges iff (I - P1) x = 0 and (I - P2) x = 0
    n = p1.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    stacked = np.vstack([eye - p1, eye - p2])
    return _nullspace_basis(stacked, tol)


def _same_subspace(b1: np.ndarray, b2: np.ndarray) -> bool:
    if b1.shape[1] != b2.shape[1]:
        return False
    if b1.shape[1] == 0:
        return True
    p1 = b1 @ b1.conj().T
    p2 = b2 @ b2.conj().T
    return opnorm(p1 - p2) <= _SUBSPACE_GAP


def verify_range_kernel(
    block: BlockOperator, result: ShortedResult, tol: Tol = DEFAULT_TOL
) -> RangeKernelReport:
    """Check the range and kernel identities of the shorted operator.

    Ranks are numerical ranks under tol.rank_rel; the intersection
    R(T) intersect N is computed as the joint nullspace of the two
    complementary projectors, never by multiplying projectors.
    """
    t = block.T
    p_range_t = range_projector(t, tol)
    inter = _intersection_basis(p_range_t, block.PN, tol)
    rank_inter = inter.shape[1]

    # the shorted operator's rank is anchored to the scale of T, not to its
    # own top singular value: a shorted operator that is pure round-off dirt
    # must report rank 0, not the rank of its noise
    u, s, vh = np.linalg.svd(result.shorted)
    scale = max(opnorm(t), float(s[0]) if s.size else 0.0)
    rank_short = int(np.count_nonzero(s > tol.rank_rel * scale)) if s.size else 0
    short_range = np.ascontiguousarray(u[:, :rank_short])
    range_equal = rank_inter == rank_short and _same_subspace(inter, short_range)

    ker_short = np.ascontiguousarray(vh[rank_short:].conj().T)
    ker_t = _nullspace_basis(t, tol)
    sum_cols = np.hstack([block.basis_m_perp, ker_t])
    if sum_cols.shape[1] == 0:
        rank_sum = 0
        sum_basis = sum_cols
    else:
        us, ss, _ = np.linalg.svd(sum_cols, full_matrices=False)
        rank_sum = (
            0
            if ss.size == 0 or ss[0] == 0.0
            else int(np.count_nonzero(ss > tol.rank_rel * ss[0]))
        )
        sum_basis = np.ascontiguousarray(us[:, :rank_sum])
    kernel_equal = ker_short.shape[1] == rank_sum and _same_subspace(
        ker_short, sum_basis
    )
    return RangeKernelReport(
        rank_T=numerical_rank(t, tol),
        rank_shorted=rank_short,
        rank_range_intersection=rank_inter,
        rank_kernel_shorted=ker_short.shape[1],
        rank_kernel_sum=rank_sum,
        range_equal=bool(range_equal),
        kernel_equal=bool(kernel_equal),
    )


def redundancy_report(block: BlockOperator, data: WeakComplementData, tol: Tol = DEFAULT_TOL) -> dict:
    """Per-instance data on whether systems 1 and 4 were redundant.

    With U the polar factor of T22, the identities E = U* Etilde and
    Ftilde = U F would make E and Ftilde derivable from the other two
    solutions.  This reports the observed gaps without asserting the
    general claim.
    """
    u22 = polar_decompose(block.T22, tol).U
    gap_e = opnorm(data.E - u22.conj().T @ data.Etilde)
    gap_f = opnorm(data.Ftilde - u22 @ data.F)
    scale = max(opnorm(block.T), 1.0)
    return {
        "gap_E_vs_U22star_Etilde": gap_e,
        "gap_Ftilde_vs_U22_F": gap_f,
        "redundant_within_tol": bool(
            gap_e <= tol.residual_rel * scale and gap_f <= tol.residual_rel * scale
        ),
    }
