"""
Monte Carlo estimate of the optimum expected distortion, and the closed forms
for the 2x2 Alamouti (ALM) and spatial multiplexing (SM) schemes at eta = 1.

Realizations are split into fixed-size partitions.  Each partition draws from
its own Philox stream keyed by (seed, partition index), so the estimate does
not depend on how partitions are scheduled across threads.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import detkit, exact, specfun
from .model import CorrelationSpec, SystemConfig

PARTITION_SIZE = 8192
THREADS_ENV = "DISTORTION_LAB_THREADS"


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_realizations: int
    seed: int


def _sqrt_psd(m):
    w, v = detkit.jacobi_eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def sample_channel(cfg: SystemConfig, corr: CorrelationSpec, rng, size=None):
    """Draw H (N_r x N_t) with i.i.d. CN(0,1) entries, correlated on the N_min side.

    `size` prepends a batch dimension.
    """
    shape = (cfg.n_r, cfg.n_t) if size is None else (size, cfg.n_r, cfg.n_t)
    h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)
    if corr is not None and corr.is_correlated:
        s = _sqrt_psd(corr.matrix(cfg.n_min))
        if cfg.n_r == cfg.n_min:
            h = s @ h
        else:
            h = h @ s.T
    return h


def _gram(h, n_t):
    """The N_min x N_min Gram matrix of H."""
    ht = np.conj(np.swapaxes(h, -1, -2))
    return ht @ h if h.shape[-1] <= h.shape[-2] else h @ ht


def instantaneous_distortion(h, cfg: SystemConfig, rho):
    """P_s |I + (rho/N_t) H H^H|^(-2/eta); batched over leading axes of h."""
    if rho < 0:
        raise ValueError("rho must be non-negative")
    h = np.asarray(h, dtype=complex)
    g = _gram(h, cfg.n_t)
    n = g.shape[-1]
    m = np.eye(n) + (rho / cfg.n_t) * g
    _, logdet = detkit.slogdet(m)
    return cfg.p_s * np.exp(-cfg.beta * np.real(logdet))


def _partition_stats(cfg, corr, rho, seed, index, count):
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    rng = np.random.Generator(np.random.Philox(ss))
    h = sample_channel(cfg, corr, rng, size=count)
    x = instantaneous_distortion(h, cfg, rho) / cfg.p_s
    mean = math.fsum(x) / count
    m2 = math.fsum((x - mean) ** 2)
    return count, mean, m2


def _combine(a, b):
    # parallel variance update (Chan et al.)
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    d = mb - ma
    return n, ma + d * nb / n, sa + sb + d * d * na * nb / n


def _pairwise(stats):
    while len(stats) > 1:
        nxt = [_combine(stats[i], stats[i + 1]) for i in range(0, len(stats) - 1, 2)]
        if len(stats) % 2:
            nxt.append(stats[-1])
        stats = nxt
    return stats[0]


def _thread_count():
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return min(8, os.cpu_count() or 1)


def mc_expected_distortion(cfg: SystemConfig, corr: CorrelationSpec, rho, n=10_000, seed=0):
    """Sample mean and standard error of the instantaneous distortion over n channels."""
    if n < 100 or int(n) != n:
        raise ValueError("n must be an integer of at least 100")
    if not 0 <= seed < 2 ** 64 or int(seed) != seed:
        raise ValueError("seed must be an unsigned 64-bit integer")
    if rho < 0:
        raise ValueError("rho must be non-negative")
    n, seed = int(n), int(seed)
    if rho == 0:
        return McEstimate(cfg.p_s, 0.0, n, seed)
    counts = [PARTITION_SIZE] * (n // PARTITION_SIZE)
    if n % PARTITION_SIZE:
        counts.append(n % PARTITION_SIZE)
    jobs = [(cfg, corr, rho, seed, i, c) for i, c in enumerate(counts)]
    workers = min(_thread_count(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(lambda j: _partition_stats(*j), jobs))
    else:
        stats = [_partition_stats(*j) for j in jobs]
    total, mean, m2 = _pairwise(stats)
    std_err = math.sqrt(m2 / (total - 1) / total)
    return McEstimate(cfg.p_s * mean, cfg.p_s * std_err, n, seed)


def _scaled_e1(rho):
    """e^(2/rho) Gamma(0, 2/rho)."""
    x = 2.0 / rho
    if rho < 0.05:
        return specfun.scaled_exp1(x)
    return math.exp(x) * specfun.upper_incomplete_gamma(0.0, x)


# below this the closed forms cancel badly; switch to equivalent integral forms
CLOSED_FORM_MIN_RHO = 1.0


def ed_alm(rho):
    """Expected distortion of 2x2 Alamouti, eta = 1, P_s = 1."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    if rho < CLOSED_FORM_MIN_RHO:
        # E[(1 + rho |H|_F^2 / 2)^-2] with |H|_F^2 ~ Gamma(4, 1)
        x = 2.0 / rho
        return x ** 4 * specfun.tricomi_psi(4.0, 3.0, x)
    e = _scaled_e1(rho)
    return (2.0 / 3.0) * (rho * ((rho - 4.0) * rho - 4.0) + 4.0 * e * (3.0 * rho + 2.0)) / rho ** 5


def ed_sm(rho):
    """Expected distortion of 2x2 spatial multiplexing, eta = 1, P_s = 1."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    if rho < CLOSED_FORM_MIN_RHO:
        return exact.ed_exact_uncorrelated(SystemConfig(2, 2, 1.0), rho)
    e = _scaled_e1(rho)
    a = -16.0 * (rho - (rho + 2.0) * e) ** 2
    b = 8.0 * (rho - 2.0 * e) * (rho * (rho + 2.0) - 4.0 * (rho + 1.0) * e)
    return (a + b) / rho ** 6
