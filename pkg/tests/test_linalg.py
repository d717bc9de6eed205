import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagstab.linalg import (
    image_basis,
    kernel_basis,
    min_norm_solve,
    orth_complement,
    pencil_expand,
    project,
    rank,
)
from _helpers import fraction_rank, random_orthogonal_pair


class TestRank:
    def test_identity(self):
        assert rank(np.eye(3)) == 3

    def test_proportional_columns(self):
        assert rank([[1.0, 1.0], [2.0, 2.0]]) == 1

    def test_zero_and_empty(self):
        assert rank(np.zeros((3, 4))) == 0
        assert rank(np.zeros((3, 0))) == 0

    def test_seeded_gaussian_against_rational_row_reduction(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            M = np.round(10 * rng.standard_normal((5, 3))).astype(int)
            assert rank(M.astype(float)) == fraction_rank(M)

    def test_rank_deficient_integer_matrices(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            # rank <= 2 by construction; compare against the exact oracle
            B = np.round(3 * rng.standard_normal((5, 2))).astype(int)
            C = np.round(3 * rng.standard_normal((2, 4))).astype(int)
            M = B @ C
            assert rank(M.astype(float)) == fraction_rank(M)

    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="finite"):
            rank([[np.nan, 0.0]])


class TestBases:
    def test_kernel_of_coordinate_projection(self):
        K = kernel_basis([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        assert K.shape == (3, 1)
        assert abs(abs(K[2, 0]) - 1.0) < 1e-12 and np.allclose(K[:2, 0], 0)

    def test_image_of_zero_matrix(self):
        assert image_basis(np.zeros((4, 3))).shape == (4, 0)

    def test_image_perp_complement(self):
        rng = np.random.default_rng(3)
        M = rng.standard_normal((6, 4))
        Q = image_basis(M)
        C = orth_complement(Q, 6)
        assert Q.shape[1] + C.shape[1] == 6
        assert np.max(np.abs(Q.T @ C)) < 1e-10

    def test_rank_nullity(self):
        rng = np.random.default_rng(11)
        for r in (0, 1, 2, 3):
            M = (
                rng.standard_normal((6, r)) @ rng.standard_normal((r, 4))
                if r
                else np.zeros((6, 4))
            )
            assert image_basis(M).shape[1] + kernel_basis(M).shape[1] == 4

    def test_complement_accepts_non_orthonormal(self):
        B = np.array([[2.0, 1.0], [0.0, 0.0], [0.0, 0.0]])
        C = orth_complement(B, 3)
        assert C.shape == (3, 2)
        assert np.max(np.abs(B.T @ C)) < 1e-10

    def test_complement_of_empty_span(self):
        C = orth_complement(np.zeros((4, 0)), 4)
        assert np.allclose(C @ C.T, np.eye(4))


class TestProject:
    def test_onto_first_axis(self):
        assert np.allclose(project([1.0, 1.0], [[1.0], [0.0]]), [1.0, 0.0])

    def test_full_span_identity(self):
        B = np.array([[1.0, 1.0], [0.0, 1.0]])
        assert np.allclose(project([2.0, 1.0], B), [2.0, 1.0])

    def test_orthogonal_to_repeated_column(self):
        B = np.array([[1.0, 1.0], [0.0, 0.0]])
        assert np.allclose(project([0.0, 1.0], B), [0.0, 0.0])

    def test_empty_span_is_zero_map(self):
        assert np.allclose(project([3.0, 4.0], np.zeros((2, 0))), [0.0, 0.0])


class TestMinNormSolve:
    def test_identity(self):
        assert np.allclose(min_norm_solve(np.eye(2), [3.0, 4.0]), [3.0, 4.0])

    def test_projection_then_solve(self):
        assert np.allclose(min_norm_solve([[1.0, 0.0], [0.0, 0.0]], [0.0, 1.0]), [0.0, 0.0])

    def test_equal_columns_split_evenly(self):
        assert np.allclose(min_norm_solve([[1.0, 1.0], [0.0, 0.0]], [1.0, 0.0]), [0.5, 0.5])

    def test_solution_orthogonal_to_kernel(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            A = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 4))
            b = rng.standard_normal(6)
            x = min_norm_solve(A, b)
            K = kernel_basis(A)
            assert np.max(np.abs(K.T @ x)) < 1e-10


class TestPencilExpand:
    def test_rank_one_diagonal(self):
        pe = pencil_expand([[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]])
        assert np.allclose(pe.det_coeffs, [0.0, 1.0, 0.0], atol=1e-12)
        assert pe.first_nonzero == 1
        assert np.allclose(pe.adj_coeffs[0], [[0.0, 0.0], [0.0, 1.0]], atol=1e-12)
        assert np.allclose(pe.adj_coeffs[1], [[1.0, 0.0], [0.0, 0.0]], atol=1e-12)

    def test_identity_with_zero_perturbation(self):
        pe = pencil_expand(np.eye(2), np.zeros((2, 2)))
        assert np.allclose(pe.det_coeffs, [1.0, 0.0, 0.0], atol=1e-12)
        assert pe.first_nonzero == 0
        assert np.allclose(pe.adj_coeffs[0], np.eye(2), atol=1e-12)

    def test_reconstruction_at_test_point(self):
        rng = np.random.default_rng(9)
        A, E = random_orthogonal_pair(rng, 6, 3, 2, 2)
        pe = pencil_expand(A, E)
        eps = 0.37
        C = A.T @ A + eps * (E.T @ E)
        direct = np.linalg.det(C)
        assert abs(pe.det_at(eps) - direct) < 1e-8 * max(1.0, abs(direct))

    def test_rejects_nonorthogonal(self):
        rng = np.random.default_rng(2)
        A = rng.standard_normal((5, 2))
        with pytest.raises(ValueError, match="orthogonal"):
            pencil_expand(A, A)

    def test_rejects_rank_deficient_sum(self):
        A = np.zeros((4, 2))
        E = np.zeros((4, 2))
        E[2, 0] = 1.0
        E[2, 1] = 2.0  # E has rank 1, so A + E is rank deficient
        with pytest.raises(ValueError, match="full column rank"):
            pencil_expand(A, E)

    def test_reconstruction_sweep(self):
        rng = np.random.default_rng(31)
        for trial in range(20):
            n = int(rng.integers(6, 10))
            p = int(rng.integers(2, 5))
            ra = int(rng.integers(1, p + 1))
            re = int(rng.integers(1, p + 1))
            if ra + re > n:
                continue
            A, E = random_orthogonal_pair(rng, n, p, ra, re)
            if rank(A + E) < p:
                continue
            pe = pencil_expand(A, E)
            det_gram = np.linalg.det(A.T @ A)
            assert abs(pe.det_coeffs[0] - det_gram) < 1e-9 * (1.0 + abs(det_gram))
            for eps in rng.uniform(0.1, 2.0, size=5):
                C = A.T @ A + eps * (E.T @ E)
                det_direct = np.linalg.det(C)
                adj_direct = det_direct * np.linalg.inv(C)
                scale = max(1.0, abs(det_direct))
                assert abs(pe.det_at(eps) - det_direct) < 1e-7 * scale
                assert np.max(np.abs(pe.adj_at(eps) - adj_direct)) < 1e-7 * max(
                    1.0, np.max(np.abs(adj_direct))
                )

    def test_vanishing_prefix_annihilates_gram_matrix(self):
        # With the first l coefficients of det vanishing, the adjugate
        # coefficient before the first nonzero one kills A^T A.
        rng = np.random.default_rng(17)
        found = 0
        for trial in range(40):
            n = int(rng.integers(6, 10))
            p = int(rng.integers(2, 5))
            ra = int(rng.integers(0, p))  # deficient, so c_0 = 0
            re = int(rng.integers(max(1, p - ra), p + 1))
            if ra + re > n:
                continue
            A, E = random_orthogonal_pair(rng, n, p, max(ra, 0), re)
            if ra == 0:
                A = np.zeros((n, p))
            if rank(A + E) < p:
                continue
            pe = pencil_expand(A, E)
            l = pe.first_nonzero
            if l == 0:
                continue
            found += 1
            AtA = A.T @ A
            product = pe.adj_coeff(l - 1) @ AtA
            scale = max(1.0, np.max(np.abs(pe.det_coeffs))) * max(
                1.0, np.max(np.abs(AtA), initial=0.0)
            )
            assert np.max(np.abs(product), initial=0.0) < 1e-6 * scale
            # and the adjugate coefficients before index l-1 vanish outright
            adj_scale = max(
                (np.max(np.abs(G), initial=0.0) for G in pe.adj_coeffs), default=1.0
            )
            for k in range(l - 1):
                assert np.max(np.abs(pe.adj_coeff(k)), initial=0.0) < 1e-6 * max(
                    1.0, adj_scale
                )
        assert found >= 5


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_projection_idempotent_and_pythagoras(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    k = int(rng.integers(0, n + 1))
    B = rng.standard_normal((n, k)) if k else np.zeros((n, 0))
    v = rng.standard_normal(n)
    p = project(v, B)
    assert np.max(np.abs(project(p, B) - p)) < 1e-10 * (1 + np.max(np.abs(p)))
    lhs = v @ v
    rhs = p @ p + (v - p) @ (v - p)
    assert abs(lhs - rhs) < 1e-10 * (1 + abs(lhs))
