import numpy as np
import pytest

from subspace_bounds import (
    InvalidInput,
    OrthMatrix,
    SkewMatrix,
    SymMatrix,
    hs_inner,
    skew_exp,
    sym_eig,
    unvech,
    vech,
)
from subspace_bounds.linalg import vech_diag_mask

from conftest import random_sym


class TestTypes:
    def test_sym_constructor_symmetrizes(self):
        m = SymMatrix([[1.0, 2.0], [0.0, 3.0]])
        assert np.array_equal(m.a, m.a.T)
        assert m.a[0, 1] == 1.0

    def test_sym_rejects_nonfinite(self):
        with pytest.raises(InvalidInput):
            SymMatrix([[np.nan, 0.0], [0.0, 1.0]])

    def test_skew_exact_antisymmetry_and_zero_diagonal(self):
        m = SkewMatrix([[5.0, 2.0], [1.0, -3.0]])
        assert np.array_equal(m.a, -m.a.T)
        assert np.all(np.diag(m.a) == 0.0)

    def test_orth_rejects_non_orthogonal(self):
        with pytest.raises(InvalidInput):
            OrthMatrix([[1.0, 0.1], [0.0, 1.0]])

    def test_arrays_are_frozen(self):
        m = SymMatrix(np.eye(2))
        with pytest.raises(ValueError):
            m.a[0, 0] = 5.0


class TestSymEig:
    def test_already_diagonal(self):
        e = sym_eig(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(e.values, [3.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(e.vectors.a, np.eye(2), atol=1e-14)

    def test_two_by_two_exchange(self):
        e = sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(e.values, [1.0, -1.0], atol=1e-14)
        s = 1.0 / np.sqrt(2.0)
        np.testing.assert_allclose(e.vectors.a[:, 0], [s, s], atol=1e-14)
        np.testing.assert_allclose(e.vectors.a[:, 1], [s, -s], atol=1e-14)

    def test_reconstruction_seed_42(self):
        rng = np.random.default_rng(42)
        a = random_sym(rng, 5)
        e = sym_eig(a)
        assert np.max(np.abs(e.reconstruct() - a)) <= 1e-9 * np.max(np.abs(a))

    def test_property_orthonormal_and_reconstructs(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            p = int(rng.integers(1, 9))
            a = random_sym(rng, p) * rng.uniform(0.1, 10.0)
            e = sym_eig(a)
            defect = np.max(np.abs(e.vectors.a.T @ e.vectors.a - np.eye(p)))
            assert defect <= 1e-10
            scale = max(np.max(np.abs(a)), 1e-300)
            assert np.max(np.abs(e.reconstruct() - a)) <= 1e-9 * scale
            assert np.all(np.diff(e.values) <= 0)

    def test_sign_convention_first_significant_coordinate_positive(self):
        rng = np.random.default_rng(3)
        e = sym_eig(random_sym(rng, 6))
        for k in range(6):
            col = e.vectors.a[:, k]
            lead = np.flatnonzero(np.abs(col) > 1e-12)[0]
            assert col[lead] > 0

    def test_deterministic_bytes(self):
        rng = np.random.default_rng(11)
        a = random_sym(rng, 7)
        e1, e2 = sym_eig(a), sym_eig(a.copy())
        assert e1.values.tobytes() == e2.values.tobytes()
        assert e1.vectors.a.tobytes() == e2.vectors.a.tobytes()

    def test_jit_and_interpreted_kernels_agree_bitwise(self):
        """The compiled sweep kernel performs the same IEEE operations as
        the plain-Python fallback, so both produce identical bits."""
        from subspace_bounds.linalg import _jacobi_kernel

        if not hasattr(_jacobi_kernel, "py_func"):
            pytest.skip("accelerated kernel not active")
        rng = np.random.default_rng(29)
        a = random_sym(rng, 6)
        a1, v1 = a.copy(), np.eye(6)
        a2, v2 = a.copy(), np.eye(6)
        _jacobi_kernel(a1, v1)
        _jacobi_kernel.py_func(a2, v2)
        assert a1.tobytes() == a2.tobytes()
        assert v1.tobytes() == v2.tobytes()

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInput):
            sym_eig(np.array([[np.inf, 0.0], [0.0, 1.0]]))


class TestSkewExp:
    def test_zero_time_is_identity(self, rng):
        xi = SkewMatrix(rng.standard_normal((4, 4)))
        np.testing.assert_allclose(skew_exp(xi, 0.0).a, np.eye(4), atol=1e-15)

    def test_planar_generator_rotation(self):
        # L = e0 e1^T - e1 e0^T acts as d/dt at t=0 with L e0 = -e1,
        # so exp(t L) = [[cos t, sin t], [-sin t, cos t]].
        l01 = SkewMatrix([[0.0, 1.0], [-1.0, 0.0]])
        for theta in (0.3, 1.2, -2.5):
            expected = np.array(
                [[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]]
            )
            np.testing.assert_allclose(skew_exp(l01, theta).a, expected, atol=1e-14)

    def test_group_inverse(self, rng):
        xi = SkewMatrix(rng.standard_normal((5, 5)))
        prod = skew_exp(xi, 0.7).a @ skew_exp(xi, -0.7).a
        assert np.max(np.abs(prod - np.eye(5))) <= 1e-12

    def test_orthogonality_up_to_norm_ten(self, rng):
        xi = SkewMatrix(rng.standard_normal((6, 6)))
        xi_unit = SkewMatrix(xi.a / np.linalg.norm(xi.a))
        for t in (0.1, 1.0, 5.0, 10.0):
            q = skew_exp(xi_unit, t).a
            assert np.max(np.abs(q.T @ q - np.eye(6))) <= 1e-12

    def test_determinant_plus_one(self, rng):
        xi = SkewMatrix(rng.standard_normal((5, 5)))
        assert np.linalg.det(skew_exp(xi, 2.0).a) == pytest.approx(1.0, abs=1e-10)


class TestVech:
    def test_column_major_lower_triangle_order(self):
        np.testing.assert_array_equal(vech([[1.0, 2.0], [2.0, 3.0]]), [1.0, 2.0, 3.0])

    def test_identity_three(self):
        np.testing.assert_array_equal(vech(np.eye(3)), [1, 0, 0, 1, 0, 1])

    def test_roundtrip(self, rng):
        a = random_sym(rng, 5)
        np.testing.assert_array_equal(unvech(vech(a)).a, a)

    def test_bad_length_rejected(self):
        with pytest.raises(InvalidInput):
            unvech(np.arange(4.0))

    def test_diag_mask(self):
        mask = vech_diag_mask(3)
        np.testing.assert_array_equal(mask, [True, False, False, True, False, True])


class TestHsInner:
    def test_identity(self):
        assert hs_inner(np.eye(3), np.eye(3)) == pytest.approx(3.0)

    def test_rank_one(self):
        e01 = np.zeros((2, 2))
        e01[0, 1] = 1.0
        assert hs_inner(e01, e01) == pytest.approx(1.0)

    def test_matches_elementwise_sum(self, rng):
        a, b = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
        assert abs(hs_inner(a, b) - float(np.sum(a * b))) <= 1e-12

    def test_dim_mismatch(self):
        with pytest.raises(InvalidInput):
            hs_inner(np.eye(2), np.eye(3))

    def test_vech_consistency_doubles_off_diagonals(self, rng):
        a, b = random_sym(rng, 4), random_sym(rng, 4)
        weights = np.where(vech_diag_mask(4), 1.0, 2.0)
        via_vech = float(np.sum(weights * vech(a) * vech(b)))
        assert abs(hs_inner(a, b) - via_vech) <= 1e-12
