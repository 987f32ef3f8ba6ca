import numpy as np
import pytest

from linopt_bp import RandomSource, haar_orthogonal, uniform_angles, uniform_sphere
from linopt_bp.sampling import (
    haar_orthogonal_batch,
    uniform_angles_batch,
    uniform_sphere_batch,
)


class TestRandomSource:
    def test_seed_determinism_is_bitwise(self):
        a = RandomSource(123).generator().standard_normal(1000)
        b = RandomSource(123).generator().standard_normal(1000)
        np.testing.assert_array_equal(a, b)

    def test_substreams_are_deterministic_and_distinct(self):
        src = RandomSource(9)
        a0 = src.substream(0).standard_normal(100)
        a0_again = src.substream(0).standard_normal(100)
        a1 = src.substream(1).standard_normal(100)
        np.testing.assert_array_equal(a0, a0_again)
        assert not np.array_equal(a0, a1)

    def test_seed_range_checked(self):
        with pytest.raises(ValueError, match="64-bit"):
            RandomSource(-1)
        with pytest.raises(ValueError, match="64-bit"):
            RandomSource(2**64)


class TestHaarOrthogonal:
    def test_orthogonality(self):
        src = RandomSource(4)
        ts = haar_orthogonal_batch(3, 64, src.generator())
        for t in ts:
            assert np.linalg.norm(t.T @ t - np.eye(6)) <= 1e-10

    def test_first_row_second_moments(self):
        m, n = 3, 100_000
        ts = haar_orthogonal_batch(m, n, RandomSource(7).generator())
        sq = ts[:, 0, :] ** 2
        expected = 1.0 / (2 * m)
        se = sq.std(ddof=1, axis=0) / np.sqrt(n)
        gaps = np.abs(sq.mean(axis=0) - expected)
        assert np.all(gaps <= 3.0 * se), (gaps, 3 * se)

    def test_determinant_components_balanced(self):
        n = 10_000
        ts = haar_orthogonal_batch(2, n, RandomSource(8).generator())
        dets = np.linalg.det(ts)
        np.testing.assert_allclose(np.abs(dets), 1.0, atol=1e-9)
        frac_plus = float(np.mean(dets > 0))
        se = 0.5 / np.sqrt(n)
        assert abs(frac_plus - 0.5) <= 3.0 * se

    def test_left_invariance_of_column_moments(self):
        # for fixed orthogonal Q the law of Q T matches that of T
        m, n = 2, 100_000
        gen = RandomSource(12).generator()
        q = haar_orthogonal(m, gen)
        ts = haar_orthogonal_batch(m, n, gen)
        rotated = np.einsum("ij,njk->nik", q, ts)
        for batch in (ts, rotated):
            sq = batch[:, :, 0] ** 2
            se = sq.std(ddof=1, axis=0) / np.sqrt(n)
            assert np.all(np.abs(sq.mean(axis=0) - 1.0 / (2 * m)) <= 3.5 * se)

    def test_single_draw_matches_batch_interface(self):
        t = haar_orthogonal(4, RandomSource(5))
        assert t.shape == (8, 8)


class TestUniformSphere:
    def test_zero_radius(self):
        y = uniform_sphere(3, 0.0, RandomSource(1))
        np.testing.assert_array_equal(y.values, np.zeros(6))

    def test_norm_exact(self):
        ys = uniform_sphere_batch(4, 1.7, 5000, RandomSource(2).generator())
        np.testing.assert_allclose(np.linalg.norm(ys, axis=1), 1.7, atol=1e-12)

    def test_coordinate_second_moment(self):
        m, radius, n = 3, 2.0, 100_000
        ys = uniform_sphere_batch(m, radius, n, RandomSource(3).generator())
        sq = ys**2
        expected = radius**2 / (2 * m)
        se = sq.std(ddof=1, axis=0) / np.sqrt(n)
        assert np.all(np.abs(sq.mean(axis=0) - expected) <= 3.0 * se)

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError, match="radius"):
            uniform_sphere(2, -1.0, RandomSource(0))


class TestUniformAngles:
    def test_range_and_shape(self):
        th = uniform_angles_batch(5, 10_000, RandomSource(6).generator())
        assert th.shape == (10_000, 5)
        assert np.all(th >= -np.pi) and np.all(th <= np.pi)

    def test_mean_and_cosine_centered(self):
        n = 200_000
        th = uniform_angles_batch(1, n, RandomSource(10).generator())[:, 0]
        assert abs(th.mean()) <= 3.0 * th.std(ddof=1) / np.sqrt(n)
        c = np.cos(th)
        assert abs(c.mean()) <= 3.0 * c.std(ddof=1) / np.sqrt(n)

    def test_single_draw(self):
        th = uniform_angles(4, RandomSource(13))
        assert th.shape == (4,)
