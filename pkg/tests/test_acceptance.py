"""Acceptance gate: fourteen numbered criteria, one test each.

Every test pins its configuration (seeds, grids, schedules) so the
measured quantities are deterministic, asserts the stated tolerance,
and asserts its wall-time budget.  Run with ``-v`` to get one pass or
fail line per criterion.
"""

import json
import time

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from denoisekit.anomaly import detect_anomalies
from denoisekit.cli import main as cli_main
from denoisekit.denoisers import make_denoiser, mmse_denoiser
from denoisekit.dps import dps_sample
from denoisekit.fileio import write_csv
from denoisekit.flow import sample_probability_flow, variance_recursion_check
from denoisekit.handles import linear_handle
from denoisekit.inverse import InverseProblem, bridge_iterate, red_fixed_point
from denoisekit.multiscale import decompose, reconstruct
from denoisekit.nlm import nlm_weights
from denoisekit.operators import CircularConvolutionOperator, IdentityOperator
from denoisekit.patches import PatchConfig
from denoisekit.priors import GaussianMixture, Laplacian
from denoisekit.properties import check_symmetry
from denoisekit.rng import gaussian, make_rng, spawn_rngs, standard_normal
from denoisekit.scalar import map_l1, mmse_denoise, score_scalar
from denoisekit.schedule import NoiseSchedule
from denoisekit.weights import sinkhorn_symmetrize, taylor_symmetrize

from oracles import (
    dense_red_solution,
    huber_reference,
    laplacian_logpdf,
    mixture_cdf,
    quad_posterior,
    soft_threshold,
)


def _budget(started: float, seconds: float) -> None:
    elapsed = time.perf_counter() - started
    assert elapsed < seconds, f"budget exceeded: {elapsed:.1f}s >= {seconds}s"


def _seeded_image(n: int = 64) -> np.ndarray:
    rng = make_rng(2024)
    r = np.linspace(0.0, 1.0, n)
    base = 0.4 + 0.3 * np.outer(np.sin(2.6 * r), np.cos(3.1 * r))
    return base + 0.05 * standard_normal(rng, (n, n))


def test_criterion_01_tweedie_identity_for_mixture_priors():
    """Posterior mean equals input plus alpha times score, 200 triples."""
    started = time.perf_counter()
    rng = make_rng(88)
    worst = 0.0
    for _ in range(200):
        x = 5.0 * float(standard_normal(rng, ()))
        alpha = float(np.exp(standard_normal(rng, ())))
        k = 1 + int(rng.random() * 3.0)
        raw = rng.random(k) + 0.05
        prior = GaussianMixture(
            weights=tuple(raw / raw.sum()),
            means=tuple(6.0 * rng.random(k) - 3.0),
            variances=tuple(0.1 + 1.9 * rng.random(k)),
        )
        result = mmse_denoise(x, alpha, prior)
        via_score = x + alpha * score_scalar(x, alpha, prior)
        worst = max(worst, abs(result.estimate - via_score))
    assert worst <= 1e-9
    _budget(started, 1.0)


def test_criterion_02_soft_threshold_closed_form_and_envelope_gradient():
    """map_l1 is the exact soft threshold and the envelope gradient map."""
    started = time.perf_counter()
    grid = np.linspace(-10.0, 10.0, 10000)
    alpha = 0.7
    estimate = map_l1(grid, alpha)
    assert_array_equal(estimate, soft_threshold(grid, alpha))

    h = 1e-6
    envelope_grad = (huber_reference(grid + h, alpha) - huber_reference(grid - h, alpha)) / (2 * h)
    assert np.max(np.abs(estimate - (grid - envelope_grad))) <= 1e-6
    _budget(started, 1.0)


def test_criterion_03_laplacian_posterior_mean_matches_quadrature():
    """Closed-form Laplacian posterior mean vs adaptive quadrature."""
    started = time.perf_counter()
    prior = Laplacian(scale=1.0)
    grid = np.linspace(-10.0, 10.0, 201)
    worst = 0.0
    for alpha in (0.25, 1.0, 4.0):
        estimates = mmse_denoise(grid, alpha, prior).estimate
        for x, got in zip(grid, estimates):
            want, _ = quad_posterior(
                float(x), alpha, lambda u: laplacian_logpdf(u, 1.0), radius=60.0
            )
            worst = max(worst, abs(got - want))
    assert worst <= 1e-6
    _budget(started, 10.0)


def test_criterion_04_multiscale_reconstruction_is_exact():
    """Decompose then reconstruct is lossless for smoothing and scalar maps."""
    started = time.perf_counter()
    img = _seeded_image(64)
    cases = (
        (make_denoiser("nlm", search_radius=3), 0.1),
        (
            make_denoiser(
                "mmse",
                prior={"gmm": {"w": [0.5, 0.5], "mu": [0.2, 0.7], "var": [0.05, 0.05]}},
            ),
            0.02,
        ),
        (make_denoiser("map_l1"), 0.05),
    )
    worst = 0.0
    for handle, alpha in cases:
        for depth in (1, 3, 5):
            layers = decompose(handle, img, alpha, depth)
            assert layers.depth == depth
            worst = max(worst, float(np.max(np.abs(reconstruct(layers) - img))))
    assert worst <= 1e-12
    _budget(started, 30.0)


def test_criterion_05_sinkhorn_balancing_is_doubly_stochastic_and_symmetric():
    """Closed-form 2x2 balance plus a large kernel within tolerance."""
    started = time.perf_counter()
    balanced, _ = sinkhorn_symmetrize(np.array([[2.0, 1.0], [1.0, 2.0]]), tol=1e-12)
    assert_allclose(
        balanced.toarray(),
        [[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]],
        atol=1e-10,
    )

    x = standard_normal(make_rng(77), (1024,))
    weights = nlm_weights(
        x,
        0.6,
        cfg=PatchConfig(patch_radius=2, search_radius=6),
        symmetrization="sinkhorn",
        sinkhorn_tol=1e-9,
    )
    mat = weights.toarray()
    assert np.max(np.abs(mat.sum(axis=1) - 1.0)) <= 1e-8
    assert np.max(np.abs(mat.sum(axis=0) - 1.0)) <= 1e-8
    assert_array_equal(mat, mat.T)
    _budget(started, 5.0)


def test_criterion_06_taylor_symmetrization_on_twenty_random_kernels():
    """First-order symmetrization: symmetric output, unit row sums."""
    started = time.perf_counter()
    for seed in range(20):
        rng = make_rng(seed)
        points = standard_normal(rng, (40,))
        diff = points[:, None] - points[None, :]
        kernel = np.exp(-diff * diff)
        weights = taylor_symmetrize(kernel)
        mat = weights.toarray()
        assert_array_equal(mat, mat.T)
        assert np.max(np.abs(mat.sum(axis=1) - 1.0)) <= 1e-12
    _budget(started, 10.0)


def test_criterion_07_jacobian_symmetry_separates_denoiser_classes():
    """Adaptive row-normalized smoothing fails the symmetry check that
    frozen symmetrized weights and scalar Bayesian maps pass."""
    started = time.perf_counter()
    x = standard_normal(make_rng(1), (256,))
    tol = 1e-6

    plain = make_denoiser("nlm", search_radius=6, symmetrization="none")
    assert not check_symmetry(plain, [x], 0.5, tol=tol).passed

    cfg = PatchConfig(patch_radius=2, search_radius=6)
    for sym in ("sinkhorn", "taylor"):
        frozen = linear_handle(
            f"frozen_{sym}", nlm_weights(x, 0.5, cfg=cfg, symmetrization=sym),
            symmetric=True,
        )
        assert check_symmetry(frozen, [x], 0.5, tol=tol).passed

    bayes_cases = (
        make_denoiser(
            "mmse",
            prior={"gmm": {"w": [0.4, 0.6], "mu": [-1.0, 1.5], "var": [0.3, 0.8]}},
        ),
        make_denoiser("mmse", prior={"laplacian": {"scale": 1.0}}),
        make_denoiser("map", prior={"laplacian": {"scale": 1.0}}),
        make_denoiser("map_l1"),
    )
    for handle in bayes_cases:
        assert check_symmetry(handle, [x], 0.5, tol=tol).passed
    _budget(started, 60.0)


def test_criterion_08_flow_on_gaussian_target_is_first_order_accurate():
    """Terminal state matches the exact scaling law; halving the step
    halves the error."""
    started = time.perf_counter()
    tau2 = 1.0
    f = mmse_denoiser(GaussianMixture((1.0,), (0.0,), (tau2,)))

    def worst_relative_error(steps: int) -> float:
        schedule = NoiseSchedule.geometric(0.5, 5e-5, steps=steps)
        samples = sample_probability_flow(f, schedule, n_samples=1000, dim=1, seed=31)
        scale = np.sqrt((tau2 + schedule.alpha_end) / (tau2 + schedule.alpha_start))
        worst = 0.0
        for sample, rng in zip(samples, spawn_rngs(31, 1000)):
            start = gaussian(rng, (1,), np.sqrt(schedule.alpha_start))
            exact = start * scale
            worst = max(worst, float(np.max(np.abs(sample - exact) / np.abs(exact))))
        return worst

    coarse = worst_relative_error(200)
    fine = worst_relative_error(400)
    assert coarse <= 1e-3
    assert 1.8 <= coarse / fine <= 2.2
    _budget(started, 30.0)


def test_criterion_09_variance_recursion_reference_value_and_order():
    """Exact reference value; excess variance is quadratic in the step."""
    started = time.perf_counter()
    assert variance_recursion_check(1.0, 0.99)["variance"] == 0.990025

    deltas = np.array([0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125])
    excesses = [variance_recursion_check(1.0, 1.0 - d)["excess"] for d in deltas]
    slope = np.polyfit(np.log(deltas), np.log(excesses), 1)[0]
    assert abs(slope - 2.0) <= 0.1
    _budget(started, 1.0)


def test_criterion_10_flow_samples_reproduce_a_bimodal_mixture():
    """Mode balance within three standard errors and a passing
    Kolmogorov-Smirnov test at the 1 percent level."""
    started = time.perf_counter()
    w, mu, var = (0.5, 0.5), (-2.0, 2.0), (0.1, 0.1)
    f = mmse_denoiser(GaussianMixture(w, mu, var))
    schedule = NoiseSchedule.geometric(410.0, 1e-5, steps=800)
    samples = np.concatenate(
        sample_probability_flow(f, schedule, n_samples=10000, dim=1, seed=11)
    )
    n = samples.size

    positive_fraction = float(np.mean(samples > 0))
    se = 0.5 / np.sqrt(n)
    assert abs(positive_fraction - 0.5) <= 3 * se

    cdf = mixture_cdf(w, mu, var)
    ordered = np.sort(samples)
    theo = cdf(ordered)
    empirical_hi = np.arange(1, n + 1) / n
    empirical_lo = np.arange(0, n) / n
    ks = max(float(np.max(empirical_hi - theo)), float(np.max(theo - empirical_lo)))
    critical_1pct = 1.628 / np.sqrt(n)
    assert ks < critical_1pct
    _budget(started, 120.0)


def test_criterion_11_red_deblurring_solves_the_dense_normal_equations():
    """Fixed point of the regularized solver matches a direct dense
    solve; the identity-operator path agrees with the bridge."""
    started = time.perf_counter()
    n = 256
    taps = [0.1, 0.2, 0.4, 0.2, 0.1]
    lam = 0.5
    op = CircularConvolutionOperator(n, taps)
    truth = np.cumsum(standard_normal(make_rng(600), (n,))) / 8.0
    y = op.apply(truth)
    weights = nlm_weights(
        y, 0.8, cfg=PatchConfig(patch_radius=2, search_radius=5),
        symmetrization="sinkhorn",
    )
    frozen = linear_handle("frozen_smoother", weights, symmetric=True)

    result = red_fixed_point(InverseProblem(op, y, frozen, 0.8, lam), tol=1e-12)
    assert result.converged
    expected = dense_red_solution(op.dense(), weights.toarray(), lam, y)
    assert np.max(np.abs(result.estimate - expected)) <= 1e-8

    via_red = red_fixed_point(
        InverseProblem(IdentityOperator(n), y, frozen, 0.8, lam), tol=1e-13
    )
    via_bridge = bridge_iterate(y, frozen, 0.8, lam, tol=1e-13)
    assert np.max(np.abs(via_red.estimate - via_bridge.estimate)) <= 1e-10
    _budget(started, 30.0)


def test_criterion_12_guided_flow_recovers_the_conjugate_posterior():
    """Measurement-guided sampling is unbiased against the closed-form
    posterior mean; zero guidance reduces exactly to the plain flow."""
    started = time.perf_counter()
    tau2, sigma2, mu0, y_val = 1.0, 0.5, 0.5, 1.2
    posterior_mean = (tau2 * y_val + sigma2 * mu0) / (tau2 + sigma2)
    f = mmse_denoiser(GaussianMixture((1.0,), (mu0,), (tau2,)))
    problem = InverseProblem(
        IdentityOperator(1), np.array([y_val]), f, alpha=1.0, lam=1.0
    )
    schedule = NoiseSchedule.geometric(2500.0, 1e-6, steps=200)
    # exact posterior step weight: inverse of the current marginal
    # variance of y given the running state
    rho = np.array(
        [1.0 / (a * tau2 / (a + tau2) + sigma2) for a, _ in schedule.pairs()]
    )
    n_runs = 1000
    values = np.array(
        [
            dps_sample(problem, schedule, rho=rho, seed=s, rho_mode="fixed")[0]
            for s in range(n_runs)
        ]
    )
    posterior_sd = np.sqrt(tau2 * sigma2 / (tau2 + sigma2))
    se = posterior_sd / np.sqrt(n_runs)
    assert abs(values.mean() - posterior_mean) <= 3 * se

    unguided = dps_sample(problem, schedule, rho=0.0, seed=123)
    reference = sample_probability_flow(f, schedule, n_samples=1, dim=1, seed=123)[0]
    assert_array_equal(unguided, reference)
    _budget(started, 120.0)


def test_criterion_13_anomaly_screen_is_calibrated_and_sensitive():
    """Pooled false-discovery proportion on clean noise stays within
    twice the configured rate; a ten-sigma spike is always found."""
    started = time.perf_counter()
    smoother = make_denoiser("nlm", search_radius=8)
    q = 0.1
    total_flags = 0
    total_checked = 0
    spike_hits = 0
    for seed in range(10):
        clean = standard_normal(make_rng(seed), (200,))
        report = detect_anomalies(clean, smoother, 40.0, fdr_q=q)
        total_flags += report.n_flagged
        total_checked += clean.size

        spiked = clean.copy()
        spiked[120] += 10.0
        spike_hits += bool(detect_anomalies(spiked, smoother, 40.0, fdr_q=q).mask[120])
    assert total_flags / total_checked <= 2 * q
    assert spike_hits == 10
    _budget(started, 30.0)


def test_criterion_14_cli_runs_are_byte_identical(tmp_path):
    """Identical config and seed reproduce every CSV and JSON artifact
    byte for byte; only the manifest wall time may differ."""
    started = time.perf_counter()
    signal = np.cumsum(standard_normal(make_rng(5), (64,))) / 6.0
    signal_path = tmp_path / "signal.csv"
    write_csv(str(signal_path), signal)

    sample_cfg = tmp_path / "sample.json"
    sample_cfg.write_text(
        json.dumps(
            {
                "denoiser": {
                    "kind": "mmse",
                    "prior": {
                        "gmm": {"w": [0.5, 0.5], "mu": [-2.0, 2.0], "var": [0.1, 0.1]}
                    },
                },
                "schedule": {
                    "kind": "geometric",
                    "alpha_max": 200.0,
                    "alpha_min": 1e-4,
                    "steps": 120,
                },
                "n_samples": 32,
                "dim": 2,
                "seed": 42,
            }
        )
    )
    denoise_cfg = tmp_path / "denoise.json"
    denoise_cfg.write_text(
        json.dumps(
            {
                "input": str(signal_path),
                "denoiser": {"kind": "nlm", "search_radius": 5},
                "alpha": 0.4,
                "noise": {"sigma": 0.1, "seed": 7},
                "seed": 7,
            }
        )
    )
    anomaly_cfg = tmp_path / "anomaly.json"
    anomaly_cfg.write_text(
        json.dumps(
            {
                "input": str(signal_path),
                "denoiser": {"kind": "nlm", "search_radius": 8},
                "alpha": 40.0,
                "fdr_q": 0.1,
            }
        )
    )

    runs = (
        ("sample", str(sample_cfg), ("samples.csv",)),
        ("denoise", str(denoise_cfg), ("denoised.csv",)),
        ("anomaly", str(anomaly_cfg), (
            "anomaly_mask.csv", "anomaly_zscores.csv", "anomaly_report.json",
        )),
    )
    for command, cfg_path, artifacts in runs:
        dirs = (tmp_path / f"{command}_a", tmp_path / f"{command}_b")
        for out_dir in dirs:
            code = cli_main(
                [command, "--config", cfg_path, "--out-dir", str(out_dir)]
            )
            assert code == 0
        for artifact in artifacts:
            first = (dirs[0] / artifact).read_bytes()
            second = (dirs[1] / artifact).read_bytes()
            assert first == second, f"{command}/{artifact} differs between runs"
        manifests = []
        for out_dir in dirs:
            doc = json.loads((out_dir / "manifest.json").read_text())
            assert doc.pop("wall_time_s") >= 0.0
            manifests.append(doc)
        assert manifests[0] == manifests[1]
    _budget(started, 60.0)
