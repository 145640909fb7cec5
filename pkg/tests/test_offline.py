import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pevgp.errors import ConfigError
from pevgp.offline import SnapshotSet, align_signs, default_split, generate_snapshots, matlab_range
from pevgp.problems import ProblemKind


class TestRange:
    def test_inclusive(self):
        r = matlab_range(-0.9, 0.1, 0.9)
        assert r.size == 19 and r[0] == -0.9 and r[-1] == 0.9
        assert 0.0 in r

    def test_end_not_hit(self):
        np.testing.assert_allclose(matlab_range(1.0, 0.4, 8.0)[-1], 7.8)

    @given(st.floats(-5, 5), st.floats(0.01, 2), st.integers(0, 50))
    def test_count(self, a, h, k):
        r = matlab_range(a, h, a + k * h)
        assert r.size == k + 1
        assert np.all(np.diff(r) > 0)


class TestDefaultSplit:
    @pytest.mark.parametrize("kind,n_tr,n_te", [
        (ProblemKind.CROSSING, 19, 37),
        (ProblemKind.OSCILLATOR, 21, 41),
        (ProblemKind.NONAFFINE, 18, 36),
        (ProblemKind.NONLINEAR_1D, 21, 41),
        (ProblemKind.TWOPARAM, 64, 30),
    ])
    def test_sizes(self, kind, n_tr, n_te):
        s = default_split(kind)
        assert s.train.shape[0] == n_tr and s.test.shape[0] == n_te

    def test_twoparam_seeded(self):
        a, b = default_split(ProblemKind.TWOPARAM), default_split(ProblemKind.TWOPARAM)
        np.testing.assert_array_equal(a.test, b.test)
        assert not np.array_equal(a.test, default_split(ProblemKind.TWOPARAM, seed=7).test)
        assert np.all((a.test >= 0.4) & (a.test <= 1.4))


class TestGenerate:
    def test_crossing_shapes(self, crossing16):
        train, _ = crossing16
        assert (train.n_s, train.m_s, train.n_h) == (19, 3, 225)
        assert train.vectors(2).shape == (225, 19)

    def test_oscillator_two_pairs(self):
        s = generate_snapshots(ProblemKind.OSCILLATOR, matlab_range(1, 0.4, 9), 2, 8)
        assert s.eigenvalues.shape == (21, 2)

    def test_single_point(self):
        s = generate_snapshots(ProblemKind.CROSSING, [0.1], 2, 8)
        assert s.n_s == 1

    def test_ordering(self, crossing16):
        train, _ = crossing16
        assert np.all(np.diff(train.eigenvalues, axis=1) >= -1e-12)

    def test_mass_vectors_consistent(self, crossing16):
        train, _ = crossing16
        for j in (1, 2, 3):
            U, BU = train.vectors(j), train.mass_vectors[j - 1]
            np.testing.assert_allclose(np.sum(U * BU, axis=0), 1.0, rtol=1e-12)

    def test_aligned_inner_products(self, crossing16):
        train, _ = crossing16
        for j in range(3):
            ip = np.sum(train.eigenvectors[j, :, :-1] * train.mass_vectors[j, :, 1:], axis=0)
            assert np.all(ip >= 0)

    def test_rank_two_second_index(self, crossing16):
        train, _ = crossing16
        s = np.linalg.svd(train.vectors(2), compute_uv=False)
        assert s[1] > 1e-3 * s[0] and s[2] < 1e-8 * s[0]

    def test_deterministic(self):
        a = generate_snapshots(ProblemKind.TWOPARAM, [[0.5, 0.5], [1.0, 1.2]], 2, 8)
        b = generate_snapshots(ProblemKind.TWOPARAM, [[0.5, 0.5], [1.0, 1.2]], 2, 8)
        assert a.eigenvectors.tobytes() == b.eigenvectors.tobytes()

    def test_empty_grid(self):
        with pytest.raises(ConfigError):
            generate_snapshots(ProblemKind.CROSSING, [], 1, 8)

    def test_outside(self):
        with pytest.raises(ConfigError):
            generate_snapshots(ProblemKind.NONAFFINE, [0.5], 1, 8)

    def test_error_names_parameter(self):
        with pytest.raises(ConfigError, match=r"\[1.43, 1.0\]"):
            generate_snapshots(ProblemKind.TWOPARAM, [[1.0, 1.0], [1.43, 1.0]], 1, 6)


def _raw(columns, j_count=1):
    """SnapshotSet around explicit columns with identity mass."""
    U = np.asarray(columns, dtype=float)
    n_h, n_s = U.shape
    return SnapshotSet(ProblemKind.CROSSING, 8, np.zeros((n_s, 1)), np.zeros((n_s, j_count)),
                       U[None].copy(), U[None].copy())


class TestAlign:
    def test_duplicate_up_to_sign(self):
        v = np.array([0.6, -0.8, 0.0])
        out = align_signs(_raw(np.column_stack([v, -v, v, -v])))
        expected = -v  # largest-magnitude entry made positive
        for i in range(4):
            np.testing.assert_array_equal(out.eigenvectors[0, :, i], expected)

    @given(st.integers(0, 2**31), st.lists(st.booleans(), min_size=5, max_size=5))
    def test_gauge_invariance(self, seed, flips):
        U = np.random.default_rng(seed).standard_normal((6, 5))
        signs = np.where(flips, -1.0, 1.0)
        a = align_signs(_raw(U))
        b = align_signs(_raw(U * signs))
        np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)

    def test_all_flipped(self, crossing16):
        train, _ = crossing16
        flipped = SnapshotSet(train.kind, train.n_per_dim, train.parameters, train.eigenvalues,
                              -train.eigenvectors, -train.mass_vectors)
        np.testing.assert_array_equal(align_signs(flipped).eigenvectors, train.eigenvectors)

    def test_index_bounds(self, crossing16):
        with pytest.raises(IndexError):
            crossing16[0].values(4)
