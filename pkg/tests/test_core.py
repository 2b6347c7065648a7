"""Seeded RNG streams, signal containers, metrics, and file round trips."""

import math
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from denoisekit.fileio import (
    atomic_write_bytes,
    format_value,
    read_csv,
    read_pgm,
    write_csv,
    write_pgm,
)
from denoisekit.rng import gaussian, make_rng, spawn_rngs, standard_normal
from denoisekit.signal import NoiseSpec, add_awgn, as_signal, mse, psnr


class TestRng:
    def test_same_seed_same_stream(self):
        a = standard_normal(make_rng(7), (100,))
        b = standard_normal(make_rng(7), (100,))
        assert_array_equal(a, b)

    def test_different_seeds_differ(self):
        a = standard_normal(make_rng(7), (100,))
        b = standard_normal(make_rng(8), (100,))
        assert np.max(np.abs(a - b)) > 0.1

    def test_spawned_children_do_not_depend_on_count(self):
        few = spawn_rngs(5, 2)
        many = spawn_rngs(5, 9)
        for child_few, child_many in zip(few, many):
            assert_array_equal(
                standard_normal(child_few, (16,)), standard_normal(child_many, (16,))
            )

    def test_spawned_children_mutually_distinct(self):
        draws = [standard_normal(r, (50,)) for r in spawn_rngs(0, 4)]
        for i in range(4):
            for j in range(i + 1, 4):
                assert np.max(np.abs(draws[i] - draws[j])) > 0.1

    def test_standard_normal_moments(self):
        x = standard_normal(make_rng(123), (200000,))
        assert abs(np.mean(x)) < 0.01
        assert abs(np.std(x) - 1.0) < 0.01

    def test_gaussian_scales_by_sigma(self):
        rng_a = make_rng(9)
        rng_b = make_rng(9)
        assert_allclose(
            gaussian(rng_a, (64,), 2.5), 2.5 * standard_normal(rng_b, (64,)), rtol=0, atol=0
        )


class TestSignal:
    def test_noise_spec_alpha_is_sigma_squared_exactly(self):
        spec = NoiseSpec.from_sigma(0.3)
        assert spec.alpha == 0.3 * 0.3
        back = NoiseSpec.from_alpha(0.25)
        assert back.sigma == 0.5

    def test_noise_spec_rejects_bad_levels(self):
        with pytest.raises(ValueError):
            NoiseSpec.from_sigma(-1.0)
        with pytest.raises(ValueError):
            NoiseSpec.from_alpha(float("nan"))

    def test_as_signal_validates(self):
        with pytest.raises(ValueError):
            as_signal(np.zeros((2, 2, 2)))
        with pytest.raises(ValueError):
            as_signal(np.array([1.0, np.inf]))
        with pytest.raises(ValueError):
            as_signal(np.array([]))
        out = as_signal([1, 2, 3])
        assert out.dtype == np.float64

    def test_add_awgn_deterministic_and_pure(self):
        x = np.zeros((8, 8))
        spec = NoiseSpec.from_sigma(0.1)
        a = add_awgn(x, spec, seed=11)
        b = add_awgn(x, spec, seed=11)
        assert_array_equal(a, b)
        assert np.all(x == 0.0)
        assert 0.05 < np.std(a) < 0.2

    def test_mse_and_psnr(self):
        x = np.array([0.0, 1.0])
        y = np.array([0.0, 0.5])
        assert mse(x, y) == pytest.approx(0.125)
        assert psnr(x, y) == pytest.approx(10.0 * math.log10(1.0 / 0.125))
        assert psnr(x, x) == math.inf
        with pytest.raises(ValueError):
            mse(np.zeros(3), np.zeros(4))


class TestFileIO:
    def test_csv_round_trips_doubles_exactly(self, tmp_path):
        rng = make_rng(3)
        x = standard_normal(rng, (257,)) * 10.0 ** standard_normal(rng, (257,))
        x[0] = 0.0
        x[1] = -0.0
        x[2] = 5e-324
        x[3] = 1.7976931348623157e308
        path = str(tmp_path / "vals.csv")
        write_csv(path, x)
        assert_array_equal(read_csv(path), x)

    def test_format_value_17_digits(self):
        v = 0.1 + 0.2
        assert float(format_value(v)) == v

    def test_csv_flattens_row_major(self, tmp_path):
        x = np.arange(6.0).reshape(2, 3)
        path = str(tmp_path / "m.csv")
        write_csv(path, x)
        assert_array_equal(read_csv(path), np.arange(6.0))

    @pytest.mark.parametrize("binary", [True, False])
    def test_pgm_round_trip_exact_after_quantization(self, tmp_path, binary, seeded_image):
        path = str(tmp_path / "img.pgm")
        write_pgm(path, seeded_image, binary=binary)
        once = read_pgm(path)
        write_pgm(path, once, binary=binary)
        again = read_pgm(path)
        assert_array_equal(once, again)
        assert once.shape == seeded_image.shape
        assert np.max(np.abs(once - seeded_image)) <= 0.5 / 255 + 1e-12

    def test_pgm_quantization_round_half_even(self, tmp_path):
        # 0.5/255 sits exactly between levels 0 and 1 and must go to 0;
        # 1.5/255 sits between 1 and 2 and must go to 2.
        x = np.array([[0.5 / 255, 1.5 / 255]])
        path = str(tmp_path / "q.pgm")
        write_pgm(path, x)
        assert_array_equal(read_pgm(path) * 255, np.array([[0.0, 2.0]]))

    def test_pgm_write_clamps(self, tmp_path):
        x = np.array([[-0.5, 1.5]])
        path = str(tmp_path / "c.pgm")
        write_pgm(path, x)
        assert_array_equal(read_pgm(path), np.array([[0.0, 1.0]]))

    def test_pgm_reads_comments_and_rejects_other_maxval(self, tmp_path):
        path = tmp_path / "h.pgm"
        path.write_bytes(b"P2\n# a comment\n2 1\n255\n0 255\n")
        assert_array_equal(read_pgm(str(path)), np.array([[0.0, 1.0]]))
        bad = tmp_path / "bad.pgm"
        bad.write_bytes(b"P2\n2 1\n65535\n0 255\n")
        with pytest.raises(ValueError):
            read_pgm(str(bad))

    def test_atomic_write_leaves_no_temp_files(self, tmp_path):
        path = str(tmp_path / "out.bin")
        atomic_write_bytes(path, b"payload")
        with open(path, "rb") as fh:
            assert fh.read() == b"payload"
        assert os.listdir(tmp_path) == ["out.bin"]
