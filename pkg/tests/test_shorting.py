import numpy as np
import pytest
from numpy.testing import assert_allclose

from opshort import (
    check_projector,
    complementable_idempotents,
    is_complementable,
    make_kit,
    numerical_rank,
    opnorm,
    partition,
    pseudo_inverse,
    redundancy_report,
    shorted,
    v_operator,
    verify_range_kernel,
    weak_complement_data,
)
from opshort.errors import (
    NotAProjector,
    NotWeaklyComplementable,
    ShapeMismatch,
    WitnessInvalid,
)
from opshort.lab import kit_block_projector

from _util import complementable_instance, rand_complex, rand_projector, rand_psd

RNG = np.random.default_rng(4004)


def _coord_projector(n, k):
    return np.diag([1.0] * k + [0.0] * (n - k))


# --- check_projector --------------------------------------------------------------


def test_check_projector_counts_rank():
    p = rand_projector(RNG, 6, 2)
    assert check_projector(p) == 2
    assert check_projector(np.eye(4)) == 4
    assert check_projector(np.zeros((3, 3))) == 0


def test_check_projector_empty():
    assert check_projector(np.zeros((0, 0))) == 0


def test_check_projector_rejects_nonsquare():
    with pytest.raises(NotAProjector):
        check_projector(np.zeros((2, 3)))


def test_check_projector_rejects_non_hermitian():
    with pytest.raises(NotAProjector):
        check_projector(np.array([[1.0, 1e-6], [0.0, 0.0]]))


def test_check_projector_rejects_non_idempotent():
    with pytest.raises(NotAProjector):
        check_projector(np.diag([1.0, 0.4]))


def test_check_projector_eigenvalue_drift():
    with pytest.raises(NotAProjector):
        check_projector(np.diag([1.0 + 1e-9, 0.0]))
    # drift below every gate is still a projector
    assert check_projector(np.diag([1.0 + 5e-11, 0.0])) == 1


# --- partition ----------------------------------------------------------------------


def test_partition_coordinate_projectors_extract_blocks():
    t = rand_complex(RNG, 4, 4)
    block = partition(t, _coord_projector(4, 2), _coord_projector(4, 2))
    assert_allclose(block.T11, t[:2, :2], atol=1e-14)
    assert_allclose(block.T12, t[:2, 2:], atol=1e-14)
    assert_allclose(block.T21, t[2:, :2], atol=1e-14)
    assert_allclose(block.T22, t[2:, 2:], atol=1e-14)
    assert block.dim_m == 2 and block.dim_n == 2


def test_partition_rectangular_shapes():
    t = rand_complex(RNG, 5, 7)
    block = partition(t, rand_projector(RNG, 7, 3), rand_projector(RNG, 5, 2))
    assert block.T11.shape == (2, 3)
    assert block.T12.shape == (2, 4)
    assert block.T21.shape == (3, 3)
    assert block.T22.shape == (3, 4)
    assert opnorm(block.reassembled() - t) <= 1e-10


def test_partition_full_projector_is_degenerate():
    t = rand_complex(RNG, 3, 3)
    block = partition(t, np.eye(3), np.eye(3))
    assert block.T22.shape == (0, 0)
    assert_allclose(block.reassembled(), t, atol=1e-12)


def test_partition_reassembles():
    for trial in range(5):
        n = int(RNG.integers(2, 9))
        k = int(RNG.integers(2, 9))
        t = rand_complex(RNG, k, n)
        pm = rand_projector(RNG, n, int(RNG.integers(1, n)))
        pn = rand_projector(RNG, k, int(RNG.integers(1, k)))
        block = partition(t, pm, pn)
        assert opnorm(block.reassembled() - t) <= 1e-10 * max(opnorm(t), 1.0)


def test_partition_rejects_misplaced_projectors():
    t = rand_complex(RNG, 5, 7)
    with pytest.raises(ShapeMismatch):
        partition(t, rand_projector(RNG, 5, 2), rand_projector(RNG, 5, 2))
    with pytest.raises(ShapeMismatch):
        partition(t, rand_projector(RNG, 7, 3), rand_projector(RNG, 7, 3))


def test_partition_bases_are_deterministic():
    t = rand_complex(RNG, 6, 6)
    pm = rand_projector(RNG, 6, 3)
    pn = rand_projector(RNG, 6, 2)
    b1 = partition(t, pm, pn)
    b2 = partition(t, pm.copy(), pn.copy())
    for name in ("basis_m", "basis_m_perp", "basis_n", "basis_n_perp", "T11", "T22"):
        assert np.array_equal(getattr(b1, name), getattr(b2, name))


def test_partition_reuses_basis_for_equal_projectors():
    t = rand_complex(RNG, 5, 5)
    p = rand_projector(RNG, 5, 2)
    block = partition(t, p, p)
    assert np.array_equal(block.basis_m, block.basis_n)
    assert np.array_equal(block.basis_m_perp, block.basis_n_perp)


def test_lift_rejects_wrong_block_shape():
    t = rand_complex(RNG, 4, 4)
    block = partition(t, _coord_projector(4, 2), _coord_projector(4, 1))
    with pytest.raises(ShapeMismatch):
        block.lift(x11=np.zeros((3, 3)))


# --- complementability -------------------------------------------------------------


def test_not_complementable_when_corner_vanishes():
    t = np.array([[0.0, 0.0], [1.0, 0.0]])
    block = partition(t, _coord_projector(2, 1), _coord_projector(2, 1))
    verdict = is_complementable(block)
    assert not verdict.complementable
    assert verdict.C is None
    assert verdict.D is not None  # the adjoint system T22* D = 0 is solvable
    assert verdict.margins[0] == pytest.approx(1.0)


def test_psd_pairs_are_complementable():
    for trial in range(5):
        a = rand_psd(RNG, 6)
        p = rand_projector(RNG, 6, int(RNG.integers(1, 6)))
        verdict = is_complementable(partition(a, p, p))
        assert verdict.complementable
        assert max(verdict.margins) <= 1e-8


def test_complementability_witness_norm_on_kit():
    kit = make_kit(16)
    block = partition(kit.bigT, kit_block_projector(16), kit_block_projector(16))
    verdict = is_complementable(block)
    assert verdict.complementable
    assert abs(opnorm(verdict.C) - np.sqrt(1.0 + 16.0**2)) <= 1e-8


def test_idempotent_witnesses_reduce_to_projector():
    # with vanishing off-diagonal corners the canonical idempotents are just
    # the orthogonal projectors themselves
    p = _coord_projector(5, 2)
    t = p @ rand_psd(RNG, 5) @ p  # corners exactly zero in coordinates
    block = partition(t, p, p)
    verdict = is_complementable(block)
    pw, qw = complementable_idempotents(block, verdict.C, verdict.D)
    assert opnorm(pw - block.PM) <= 1e-8
    assert opnorm(qw - block.PN) <= 1e-8


def test_idempotent_witnesses_satisfy_defining_conditions():
    t, pm, pn = complementable_instance(RNG)
    block = partition(t, pm, pn)
    verdict = is_complementable(block)
    assert verdict.complementable
    pw, qw = complementable_idempotents(block, verdict.C, verdict.D)
    scale = max(opnorm(t), 1.0)

    assert opnorm(pw @ pw - pw) <= 1e-9
    assert opnorm(qw @ qw - qw) <= 1e-9
    # R(P*) = M and R(Q) = N
    assert opnorm(pw.conj().T @ block.basis_m - block.basis_m) <= 1e-9
    assert numerical_rank(pw) == block.dim_m
    assert opnorm((np.eye(len(qw)) - block.PN) @ qw) <= 1e-9
    assert opnorm(qw @ block.basis_n - block.basis_n) <= 1e-9
    # T maps R(P) into N, and Q*T* maps into M
    assert opnorm((np.eye(t.shape[0]) - block.PN) @ t @ pw) <= 1e-9 * scale
    assert opnorm(qw @ t @ (np.eye(t.shape[1]) - block.PM)) <= 1e-9 * scale


def test_idempotent_witnesses_validate_inputs():
    t, pm, pn = complementable_instance(RNG)
    block = partition(t, pm, pn)
    verdict = is_complementable(block)
    with pytest.raises(WitnessInvalid):
        complementable_idempotents(block, verdict.C + 1.0, verdict.D)
    with pytest.raises(ShapeMismatch):
        complementable_idempotents(block, verdict.C.T.copy()[:, :-1], verdict.D)


# --- weak complementability ----------------------------------------------------------


def test_weak_systems_with_invertible_corner():
    t = rand_complex(RNG, 6, 6)
    p = _coord_projector(6, 2)
    block = partition(t, p, p)  # generic T22 is invertible
    data = weak_complement_data(block)
    assert all(data.solvable)
    v22 = v_operator(block.T22)
    assert_allclose(data.E, np.linalg.solve(v22, block.T21), atol=1e-9)
    assert max(data.residuals) <= 1e-9


def test_weak_systems_collapse_on_kit():
    # T22 = A0 + B0 is PD, so all four systems share the solution
    # (A0 + B0)^(-1/2) B0, of norm exactly 1
    kit = make_kit(12)
    block = partition(kit.bigT, kit_block_projector(12), kit_block_projector(12))
    data = weak_complement_data(block)
    assert all(data.solvable)
    for sol in (data.E, data.F, data.Etilde, data.Ftilde):
        assert opnorm(sol - kit.Xunique) <= 1e-8
        assert abs(opnorm(sol) - 1.0) <= 1e-9


def test_weak_flags_mark_unsolvable_systems():
    # T22 = 0 with T21 != 0 and T12 = 0 kills systems 1 and 3 only
    t = np.zeros((3, 3))
    t[1, 0] = 1.0
    block = partition(t, _coord_projector(3, 1), _coord_projector(3, 1))
    data = weak_complement_data(block)
    assert data.solvable == (False, True, False, True)
    with pytest.raises(NotWeaklyComplementable) as err:
        shorted(block)
    assert err.value.failing == (1, 3)


# --- shorted operator ----------------------------------------------------------------


def test_shorted_psd_2x2():
    t = np.array([[2.0, 1.0], [1.0, 1.0]])
    result = shorted(partition(t, _coord_projector(2, 1), _coord_projector(2, 1)))
    assert_allclose(result.core, [[1.0]], atol=1e-12)
    assert_allclose(result.shorted, np.diag([1.0, 0.0]), atol=1e-12)
    assert result.mode == "complementable"


def test_shorted_recovers_scalar_parallel_sum():
    # [[a, a], [a, a + b]] shorted to the first coordinate leaves ab/(a+b)
    t = np.array([[1.0, 1.0], [1.0, 2.0]])
    result = shorted(partition(t, _coord_projector(2, 1), _coord_projector(2, 1)))
    assert_allclose(result.core, [[0.5]], atol=1e-12)


def test_shorted_vanishes_on_kit():
    kit = make_kit(8)
    block = partition(kit.bigT, kit_block_projector(8), kit_block_projector(8))
    result = shorted(block)
    assert opnorm(result.shorted) <= 1e-10


def test_shorted_matches_schur_complement_on_psd():
    for trial in range(5):
        a = rand_psd(RNG, 6)
        p = rand_projector(RNG, 6, int(RNG.integers(1, 6)))
        block = partition(a, p, p)
        result = shorted(block)
        schur = block.T11 - block.T12 @ pseudo_inverse(block.T22) @ block.T21
        assert opnorm(result.core - schur) <= 1e-8 * max(opnorm(a), 1.0)


def test_shorted_compresses_between_projectors():
    t, pm, pn = complementable_instance(RNG)
    result = shorted(partition(t, pm, pn))
    s = result.shorted
    assert opnorm(pn @ s @ pm - s) <= 1e-10 * max(opnorm(t), 1.0)


def test_shorted_duality():
    t, pm, pn = complementable_instance(RNG)
    fwd = shorted(partition(t, pm, pn)).shorted
    rev = shorted(partition(t.conj().T, pn, pm)).shorted
    assert opnorm(rev - fwd.conj().T) <= 1e-9 * max(opnorm(t), 1.0)


def test_shorted_matches_idempotent_compression():
    # independent route: for a complementable pair the shorted operator is
    # the compression Q T P by the canonical idempotents
    t, pm, pn = complementable_instance(RNG)
    block = partition(t, pm, pn)
    result = shorted(block)
    verdict = is_complementable(block)
    pw, qw = complementable_idempotents(block, verdict.C, verdict.D)
    assert result.mode == "complementable"
    assert opnorm(result.shorted - qw @ t @ pw) <= 1e-8 * max(opnorm(t), 1.0)


def test_shorted_identity_is_projector():
    p = rand_projector(RNG, 5, 3)
    result = shorted(partition(np.eye(5), p, p))
    assert opnorm(result.shorted - p) <= 1e-10


# --- range / kernel bookkeeping -------------------------------------------------------


def test_range_kernel_on_identity():
    p = rand_projector(RNG, 6, 2)
    block = partition(np.eye(6), p, p)
    report = verify_range_kernel(block, shorted(block))
    assert report.rank_shorted == 2
    assert report.rank_range_intersection == 2
    assert report.rank_kernel_shorted == 4
    assert report.range_equal and report.kernel_equal


def test_range_kernel_on_vanishing_shorted():
    kit = make_kit(8)
    block = partition(kit.bigT, kit_block_projector(8), kit_block_projector(8))
    report = verify_range_kernel(block, shorted(block))
    assert report.rank_shorted == 0
    assert report.rank_range_intersection == 0
    assert report.range_equal and report.kernel_equal


def test_range_kernel_on_random_complementable():
    for trial in range(5):
        t, pm, pn = complementable_instance(RNG)
        block = partition(t, pm, pn)
        report = verify_range_kernel(block, shorted(block))
        assert report.range_equal
        assert report.kernel_equal
        assert report.rank_shorted == report.rank_range_intersection


def test_redundancy_report_on_complementable():
    t, pm, pn = complementable_instance(RNG)
    block = partition(t, pm, pn)
    data = weak_complement_data(block)
    report = redundancy_report(block, data)
    assert report["redundant_within_tol"]
    assert report["gap_E_vs_U22star_Etilde"] <= 1e-8 * max(opnorm(t), 1.0)
    assert report["gap_Ftilde_vs_U22_F"] <= 1e-8 * max(opnorm(t), 1.0)
