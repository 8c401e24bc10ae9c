import numpy as np
import pytest

from risra import channel as ch
from risra import training as tr

RADIO = ch.RadioConstants.from_frequency(3e9)
LAM = RADIO.wavelength
FIG4 = ch.RisGeometry(10, 10, LAM / 2, LAM / 2)  # F0 = 0.5
SMALL = ch.RisGeometry(4, 2, LAM / 2, LAM / 2)


def brute_force_coefficients(geom, radio, theta_k, indices, nq=4000):
    """Direct evaluation of the series-coefficient formula, one index at a
    time, kept deliberately independent of the production path."""
    f0 = geom.d_x / radio.wavelength
    period = 1.0 / f0
    theta = np.linspace(0.0, np.pi / 2, nq)
    w = np.full(nq, theta[1] - theta[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    out = []
    for i in indices:
        total = 0.0 + 0.0j
        for m in range(geom.m_x):
            phase = np.exp(2j * np.pi * f0 * (m + 1) * np.sin(theta_k))
            integrand = np.exp(-2j * np.pi * f0 * ((m + 1) * np.sin(theta) + i * theta))
            total += phase * np.sum(w * integrand)
        out.append(total / period)
    return np.array(out)


class TestSpectrumAnalysis:
    def test_coefficients_match_brute_force(self):
        idx = np.array([-7, -3, -1, 0, 1, 4, 9])
        expected = brute_force_coefficients(SMALL, RADIO, 0.7, idx)
        analysis = tr.analyze_signal(SMALL, RADIO, 0.7, 1e-2, quadrature_points=4000)
        mid = len(analysis.coefficients) // 2
        got = analysis.coefficients[mid + idx]
        assert np.allclose(got, expected, rtol=1e-9, atol=1e-12)
        assert analysis.coefficient(0) == pytest.approx(analysis.coefficients[mid])

    def test_power_respects_element_bound(self):
        for tk in (0.0, 0.5, 1.2):
            analysis = tr.analyze_signal(FIG4, RADIO, tk, 1e-2)
            total = np.sum(np.abs(analysis.coefficients) ** 2)
            assert total <= FIG4.m_x**2 * (1 + 1e-6)
            assert analysis.power <= FIG4.m_x**2 * (1 + 1e-6)

    def test_parseval_consistency(self):
        for tk in (0.3, 0.9):
            analysis = tr.analyze_signal(FIG4, RADIO, tk, 1e-3)
            table = tr._table(FIG4, RADIO, tr.DEFAULT_QUADRATURE_POINTS)
            c = table.coefficients(tk, 2048)
            rel = abs(np.sum(np.abs(c) ** 2) - analysis.power) / analysis.power
            assert rel < 1e-3

    def test_bandwidth_monotone_in_epsilon(self):
        widths = [tr.analyze_signal(FIG4, RADIO, 0.8, eps).bandwidth_index
                  for eps in (1e-1, 1e-2, 1e-3)]
        assert widths[0] <= widths[1] <= widths[2]

    def test_epsilon_validation(self):
        with pytest.raises(ValueError):
            tr.analyze_signal(FIG4, RADIO, 0.5, 0.0)
        with pytest.raises(ValueError):
            tr.analyze_signal(FIG4, RADIO, 0.5, 1e-2, quadrature_points=100)

    def test_taylor_reference(self):
        analysis = tr.analyze_signal(FIG4, RADIO, 0.5, 1e-2)
        assert analysis.fundamental_frequency == pytest.approx(0.5)
        assert analysis.fundamental_period == pytest.approx(2.0)
        assert analysis.taylor_fmax == pytest.approx(5.0)


class TestBounds:
    def test_reference_sample_counts(self):
        assert tr.training_lower_bound(14.5) == 46
        assert tr.training_lower_bound(5.0) == 16
        assert tr.training_lower_bound(45.0) == 142
        assert tr.training_lower_bound(186.0) == 585
        assert tr.training_lower_bound(0.2) == 1

    def test_taylor_bound_from_formula(self):
        # the formula gives 158 for a 50 Hz band; reference material quotes
        # 150, a discrepancy noted in the repo development notes
        assert tr.training_lower_bound(50.0) == 158

    def test_statistics_on_sizing_geometry(self):
        stats = tr.codebook_statistics(FIG4, RADIO, 1e-1)
        assert stats.median_fmax == pytest.approx(3.0)
        assert stats.max_fmax == pytest.approx(6.5)
        stats2 = tr.codebook_statistics(FIG4, RADIO, 1e-2)
        assert stats2.median_fmax == pytest.approx(5.0)
        assert stats2.median_bound == 16
        assert stats2.taylor_bound == 16  # ceil(pi * 5.0)

    def test_statistics_monotone_in_epsilon(self):
        a = tr.codebook_statistics(FIG4, RADIO, 1e-1)
        b = tr.codebook_statistics(FIG4, RADIO, 1e-2)
        assert a.median_bound <= b.median_bound
        assert a.max_bound <= b.max_bound

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            tr.codebook_statistics(FIG4, RADIO, 1e-2, theta_grid=np.linspace(0, 1, 8))


class TestTrainingCodebook:
    def test_single_entry(self):
        book = tr.design_training_codebook(FIG4, RADIO, 0.5, 1)
        assert np.allclose(book.angles, [0.0])

    def test_four_entry_grid(self):
        book = tr.design_training_codebook(FIG4, RADIO, 0.5, 4)
        assert np.allclose(book.angles, [0, np.pi / 8, np.pi / 4, 3 * np.pi / 8])

    def test_strictly_increasing_below_right_edge(self):
        book = tr.design_training_codebook(FIG4, RADIO, 0.5, 46)
        assert np.all(np.diff(book.angles) > 0)
        assert book.angles[-1] < np.pi / 2

    def test_min_training_symbols(self):
        assert tr.min_training_symbols(1.0, 1.0) == 1
        assert tr.min_training_symbols(10.0, 0.01) == 10
        assert tr.min_training_symbols(2.0, 0.01) == 2 * tr.min_training_symbols(4.0, 0.01) \
            or tr.min_training_symbols(2.0, 0.01) == 50  # ceil(1/(2*0.01))


class TestReceivedSignal:
    DESIGN = tr.TrainingDesign(
        codebook=tr.design_training_codebook(FIG4, RADIO, 0.5, 8),
        sample_period=tr.training_sample_period(8),
        symbols_per_slot=4,
        estimation_tolerance=0.01,
        pilot=np.ones(4),
    )

    def test_noiseless_rx(self):
        rng = np.random.default_rng(0)
        zeta = 0.3 - 0.4j
        w = tr.simulate_training_rx(rng, zeta, self.DESIGN, 2.0, 0.0)
        assert np.allclose(w, np.sqrt(2.0) * zeta * np.ones(4))

    def test_noise_variance(self):
        rng = np.random.default_rng(1)
        w = tr.simulate_training_rx(rng, np.zeros(25_000, dtype=complex),
                                    self.DESIGN, 1.0, 0.5)
        var = np.var(w)
        assert var == pytest.approx(0.5, rel=0.02)

    def test_slots_are_independent(self):
        rng = np.random.default_rng(2)
        w = tr.simulate_training_rx(rng, np.zeros((10_000, 2), dtype=complex),
                                    self.DESIGN, 1.0, 1.0)
        a = w[:, 0, :].ravel()
        b = w[:, 1, :].ravel()
        corr = np.abs(np.mean(a * np.conj(b)))
        assert corr < 0.01

    def test_mvu_noiseless_and_shape(self):
        rng = np.random.default_rng(3)
        zeta = np.array([0.1 + 0.2j, -0.5j])
        w = tr.simulate_training_rx(rng, zeta, self.DESIGN, 4.0, 0.0)
        est = tr.mvu_estimate(w, self.DESIGN, 4.0)
        assert np.allclose(est, zeta)
        with pytest.raises(ValueError):
            tr.mvu_estimate(np.zeros((2, 3)), self.DESIGN, 4.0)

    def test_mvu_bias_and_variance(self):
        # SNR * L = 1/delta with delta = 0.01: rho=25, sigma2=1, L=4
        rng = np.random.default_rng(4)
        n = 100_000
        zeta = 0.7 + 0.1j
        w = tr.simulate_training_rx(rng, np.full(n, zeta), self.DESIGN, 25.0, 1.0)
        est = tr.mvu_estimate(w, self.DESIGN, 25.0)
        delta = 1.0 / (25.0 * 4)
        assert abs(est.mean() - zeta) < 3 * np.sqrt(delta / n)
        assert np.var(est) == pytest.approx(delta, rel=0.05)


class TestReconstruction:
    def test_interpolating_property(self):
        rng = np.random.default_rng(5)
        est = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        t = tr.training_sample_period(12)
        for kernel in (tr.SPLINE, tr.LINEAR, tr.IDEAL_LOWPASS):
            model = tr.reconstruct(est, t, kernel)
            got = model.query(np.arange(12) * t)
            assert np.allclose(got, est, atol=1e-9), kernel

    def test_batch_rows_are_independent_fits(self):
        rng = np.random.default_rng(6)
        est = rng.standard_normal((3, 10)) + 1j * rng.standard_normal((3, 10))
        t = tr.training_sample_period(10)
        batch = tr.reconstruct(est, t).query(np.array([0.3, 0.7]))
        for k in range(3):
            single = tr.reconstruct(est[k], t).query(np.array([0.3, 0.7]))
            assert np.allclose(batch[k], single)

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            tr.reconstruct(np.array([1.0 + 0j]), 0.1, tr.SPLINE)
        tr.reconstruct(np.array([1.0 + 0j]), 0.1, tr.IDEAL_LOWPASS)  # allowed

    def test_dense_noiseless_reconstruction(self):
        # heavily oversampled sweep reproduces the response everywhere
        ap = ch.NodePlacement(5.0, np.radians(45), 10 ** 0.5)
        n_tr = 585
        book = tr.design_training_codebook(FIG4, RADIO, ap.angle, n_tr)
        samples = ch.response_matrix(FIG4, RADIO, ap, [50.0], [0.8], 10 ** 0.5,
                                     book.angles, ch.DL)[0]
        model = tr.reconstruct(samples, tr.training_sample_period(n_tr))
        grid = np.linspace(0, book.angles[-1], 3000)
        truth = ch.response_matrix(FIG4, RADIO, ap, [50.0], [0.8], 10 ** 0.5,
                                   grid, ch.DL)[0]
        err = np.max(np.abs(model.query(grid) - truth)) / np.max(np.abs(truth))
        assert err < 1e-2

    def test_weight_sums(self):
        t = tr.training_sample_period(20)
        grid = np.linspace(0, 19 * t, 200)
        w = tr.interpolation_weights(20, t, tr.SPLINE, grid)
        assert np.allclose(w.sum(axis=0), 1.0, atol=1e-9)  # reproduces constants
        w_lin = tr.interpolation_weights(20, t, tr.LINEAR, grid)
        assert np.allclose(w_lin.sum(axis=0), 1.0, atol=1e-12)

    def test_normalized_expected_se(self):
        truth = np.ones((4, 8), dtype=complex)
        pred = truth + 0.1
        assert tr.normalized_expected_se(pred, truth) == pytest.approx(0.01)
        with pytest.raises(ValueError):
            tr.normalized_expected_se(pred, np.zeros_like(truth))
