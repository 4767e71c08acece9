import math

import mpmath as mp
import numpy as np
import pytest
from scipy.stats import unitary_group

from distortion_lab import mcsim
from distortion_lab.exact import ed_exact_uncorrelated
from distortion_lab.model import CorrelationSpec, SystemConfig


def rel(a, b):
    return abs(a / b - 1.0)


def philox(seed):
    return np.random.Generator(np.random.Philox(seed))


class TestSampling:
    def test_unit_variance(self):
        h = mcsim.sample_channel(SystemConfig(2, 3, 1.0), None, philox(1), size=100_000)
        assert np.mean(np.abs(h[:, 0, 0]) ** 2) == pytest.approx(1.0, abs=0.02)
        assert np.mean(h.real[:, 0, 0] ** 2) == pytest.approx(0.5, abs=0.01)
        assert abs(np.mean(h[:, 2, 1])) < 0.01

    @pytest.mark.parametrize("nt,nr", [(2, 2), (4, 2), (2, 4)])
    def test_correlation_moment(self, nt, nr):
        cfg = SystemConfig(nt, nr, 1.0)
        h = mcsim.sample_channel(cfg, CorrelationSpec.exponential(0.5), philox(2), size=100_000)
        if nr == cfg.n_min:
            sig = np.mean(h @ np.conj(np.swapaxes(h, -1, -2)), axis=0) / nt
        else:
            sig = np.mean(np.conj(np.swapaxes(h, -1, -2)) @ h, axis=0) / nr
        assert sig[0, 1].real == pytest.approx(0.5, abs=0.03)
        assert sig[0, 0].real == pytest.approx(1.0, abs=0.03)

    def test_deterministic(self):
        cfg = SystemConfig(3, 2, 1.0)
        a = mcsim.sample_channel(cfg, None, philox(7), size=5)
        b = mcsim.sample_channel(cfg, None, philox(7), size=5)
        assert np.array_equal(a, b)
        assert mcsim.sample_channel(cfg, None, philox(7)).shape == (2, 3)


class TestInstantaneous:
    def test_zero_channel(self):
        cfg = SystemConfig(2, 3, 0.7, p_s=2.0)
        assert mcsim.instantaneous_distortion(np.zeros((3, 2)), cfg, 50.0) == 2.0

    def test_scalar(self):
        v = mcsim.instantaneous_distortion(np.ones((1, 1)), SystemConfig(1, 1, 2.0), 3.0)
        assert v == pytest.approx(0.25, rel=1e-15)

    def test_eigen_product(self):
        cfg = SystemConfig(2, 3, 0.8)
        h = mcsim.sample_channel(cfg, None, philox(3))
        lam = np.linalg.eigvalsh(h @ h.conj().T)
        ref = np.prod((1 + 20.0 * lam / cfg.n_t) ** -cfg.beta)
        assert rel(mcsim.instantaneous_distortion(h, cfg, 20.0), ref) < 1e-10

    def test_gram_orderings_agree(self):
        rng = philox(4)
        for nt, nr in [(3, 2), (2, 3), (4, 4)]:
            cfg = SystemConfig(nt, nr, 1.3)
            h = mcsim.sample_channel(cfg, None, rng)
            big = np.eye(nr) + (7.0 / nt) * h @ h.conj().T
            ref = abs(np.linalg.det(big)) ** -cfg.beta
            assert rel(mcsim.instantaneous_distortion(h, cfg, 7.0), ref) < 1e-12

    def test_unitary_invariance(self):
        cfg = SystemConfig(3, 2, 0.9)
        h = mcsim.sample_channel(cfg, None, philox(5))
        u = unitary_group.rvs(2, random_state=1)
        v = unitary_group.rvs(3, random_state=2)
        base = mcsim.instantaneous_distortion(h, cfg, 30.0)
        assert rel(mcsim.instantaneous_distortion(u @ h @ v, cfg, 30.0), base) < 1e-10

    def test_batched(self):
        cfg = SystemConfig(2, 2, 1.0)
        h = mcsim.sample_channel(cfg, None, philox(6), size=4)
        out = mcsim.instantaneous_distortion(h, cfg, 10.0)
        for k in range(4):
            assert out[k] == pytest.approx(mcsim.instantaneous_distortion(h[k], cfg, 10.0), rel=1e-14)


class TestEstimator:
    def test_zero_snr(self):
        est = mcsim.mc_expected_distortion(SystemConfig(2, 2, 1.0, p_s=3.0), None, 0.0, 1000, seed=1)
        assert (est.mean, est.std_error) == (3.0, 0.0)

    def test_seed_determinism(self):
        cfg = SystemConfig(2, 3, 1.0)
        a = mcsim.mc_expected_distortion(cfg, None, 10.0, 20_000, seed=99)
        b = mcsim.mc_expected_distortion(cfg, None, 10.0, 20_000, seed=99)
        assert a == b
        assert a != mcsim.mc_expected_distortion(cfg, None, 10.0, 20_000, seed=100)

    def test_thread_count_irrelevant(self, monkeypatch):
        cfg = SystemConfig(2, 2, 1.0)
        runs = []
        for threads in ("1", "3", "8"):
            monkeypatch.setenv(mcsim.THREADS_ENV, threads)
            runs.append(mcsim.mc_expected_distortion(cfg, CorrelationSpec.exponential(0.3), 5.0, 30_000, seed=5))
        assert runs[0] == runs[1] == runs[2]

    def test_bad_thread_env(self, monkeypatch):
        monkeypatch.setenv(mcsim.THREADS_ENV, "many")
        with pytest.raises(ValueError):
            mcsim.mc_expected_distortion(SystemConfig(1, 1, 1.0), None, 1.0, 20_000)

    def test_bounds(self):
        cfg = SystemConfig(3, 2, 0.5, p_s=2.0)
        est = mcsim.mc_expected_distortion(cfg, None, 100.0, 1000, seed=3)
        assert 0 < est.mean <= 2.0 and est.std_error > 0
        assert est.n_realizations == 1000 and est.seed == 3

    @pytest.mark.parametrize("kw", [dict(n=50), dict(n=1000.5), dict(seed=-1), dict(seed=2 ** 64), dict(rho=-1.0)])
    def test_rejects(self, kw):
        args = dict(cfg=SystemConfig(1, 1, 1.0), corr=None, rho=1.0, n=1000, seed=0)
        args.update(kw)
        with pytest.raises(ValueError):
            mcsim.mc_expected_distortion(**args)

    @pytest.mark.parametrize("nt,nr,eta,db", [(2, 2, 1.0, 10), (3, 5, 4.0, 20), (5, 3, 4.0, 20), (1, 1, 2.0, 5)])
    def test_agrees_with_exact(self, nt, nr, eta, db):
        cfg = SystemConfig(nt, nr, eta)
        rho = 10 ** (db / 10)
        est = mcsim.mc_expected_distortion(cfg, None, rho, 100_000, seed=777)
        assert abs(est.mean - ed_exact_uncorrelated(cfg, rho)) < 3 * est.std_error


def _alm_reference(r):
    r = mp.mpf(r)
    e = mp.exp(2 / r) * mp.gammainc(0, 2 / r)
    return 2 * (r * ((r - 4) * r - 4) + 4 * e * (3 * r + 2)) / (3 * r ** 5)


def _sm_reference(r):
    r = mp.mpf(r)
    e = mp.exp(2 / r) * mp.gammainc(0, 2 / r)
    return (-16 * (r - (r + 2) * e) ** 2 + 8 * (r - 2 * e) * (r * (r + 2) - 4 * (r + 1) * e)) / r ** 6


class TestClosedForms:
    @pytest.mark.parametrize("rho", [1e-4, 1e-2, 0.3, 0.99, 1.0, 3.0, 100.0, 1e4, 1e7])
    def test_against_high_precision(self, rho):
        with mp.workdps(60):
            assert rel(mcsim.ed_alm(rho), float(_alm_reference(rho))) < 1e-12
            assert rel(mcsim.ed_sm(rho), float(_sm_reference(rho))) < 1e-12

    def test_asymptotes(self):
        assert mcsim.ed_alm(1e4) * 1.5e8 == pytest.approx(1.0, abs=0.02)
        assert mcsim.ed_sm(1e4) * 1e12 / 8 == pytest.approx(1.0, abs=0.05)

    @pytest.mark.parametrize("rho", [1.0, 10.0, 100.0, 1e3, 1e4])
    def test_sm_is_optimum(self, rho):
        assert rel(mcsim.ed_sm(rho), ed_exact_uncorrelated(SystemConfig(2, 2, 1.0), rho)) < 1e-6

    def test_alm_worse_and_ratio_grows(self):
        for db in range(10, 41):
            rho = 10 ** (db / 10)
            assert mcsim.ed_alm(rho) >= mcsim.ed_sm(rho)
        ratios = [mcsim.ed_alm(10 ** (db / 10)) / mcsim.ed_sm(10 ** (db / 10)) for db in range(20, 41)]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))

    def test_alm_against_monte_carlo(self):
        # Alamouti sees an SNR of rho |H|_F^2 / 2
        rng = philox(8)
        x = rng.gamma(4.0, size=200_000)
        samples = (1 + 5.0 * x / 2) ** -2
        mean, se = samples.mean(), samples.std(ddof=1) / math.sqrt(x.size)
        assert abs(mcsim.ed_alm(5.0) - mean) < 3 * se

    def test_domain(self):
        for f in (mcsim.ed_alm, mcsim.ed_sm):
            with pytest.raises(ValueError):
                f(0.0)
