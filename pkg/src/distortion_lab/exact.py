"""
Optimum expected end-to-end distortion at any SNR.

For an uncorrelated channel

    ED* = P_s |U| / prod_k Gamma(N_max-k+1) Gamma(N_min-k+1),
    u_ij = (rho/N_t)^(-d) Gamma(d) Psi(d, d+1-2/eta; N_t/rho),  d = i+j+|N_t-N_r|-1,

and with correlation eigenvalues sigma on the N_min side

    ED* = P_s |G| / [prod_k sigma_k^(|dN|+1) Gamma(N_max-k+1) * prod_{m<n} (sigma_n - sigma_m)],
    g_ij = (rho/N_t)^(-d_j) Gamma(d_j) Psi(d_j, d_j+1-2/eta; N_t/(sigma_i rho)),  d_j = |dN|+j.
"""

import math
import warnings

import numpy as np
from scipy import integrate

from . import detkit, specfun
from .errors import ConditioningWarning, ConvergenceError, DegenerateEigenvaluesError
from .model import CorrelationSpec, DistortionCurve, SystemConfig, as_grid

DEGENERACY_TOL = 1e-8
LOST_DIGITS_WARN = 8.0


def _check_rho(rho):
    if not (rho > 0 and math.isfinite(rho)):
        raise ValueError(f"rho must be positive and finite, got {rho!r}")


def _check_index(i, n):
    if int(i) != i or not 1 <= i <= n:
        raise IndexError(f"index {i!r} outside 1..{n}")


def _log_entry(d, beta, x):
    """log of x^d Gamma(d) Psi(d, d+1-beta; x), with x = N_t/(sigma rho)."""
    psi = specfun.tricomi_psi(d, d + 1.0 - beta, x)
    return d * math.log(x) + specfun.ln_gamma(d) + math.log(psi)


def u_entry(i, j, cfg: SystemConfig, rho):
    """Entry (i, j) of U, 1-based."""
    _check_rho(rho)
    _check_index(i, cfg.n_min)
    _check_index(j, cfg.n_min)
    d = i + j + cfg.delta_n - 1
    return math.exp(_log_entry(d, cfg.beta, cfg.n_t / rho))


def g_entry(i, j, cfg: SystemConfig, sigma_i, rho):
    """Entry (i, j) of G for a row whose correlation eigenvalue is sigma_i."""
    _check_rho(rho)
    _check_index(j, cfg.n_min)
    if not sigma_i > 0:
        raise ValueError("sigma_i must be positive")
    d = cfg.delta_n + j
    # x^d with x = N_t/(sigma rho), times sigma^d, gives (rho/N_t)^-d
    return math.exp(_log_entry(d, cfg.beta, cfg.n_t / (sigma_i * rho)) + d * math.log(sigma_i))


def _weighted_laplace(d, scale, beta, rate):
    """int_0^inf x^(d-1) e^(-x/scale) (1 + rate x)^(-beta) dx by direct quadrature."""
    def f(x):
        return x ** (d - 1) * math.exp(-x / scale) * (1.0 + rate * x) ** (-beta)

    peak = max(d - 1.0, 1.0) * scale
    knots = [0.0, min(peak, 1.0 / rate), peak, peak + 40.0 * scale * math.sqrt(d)]
    # power-law stretch between 1/rate and the peak: one knot per decade
    k = 10.0 / rate
    while k < peak:
        knots.append(k)
        k *= 10.0
    knots = sorted(set(knots))
    total = 0.0
    err = 0.0
    for lo, hi in zip(knots, knots[1:]):
        if hi > lo:
            v, e = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)
            total += v
            err += e
    v, e = integrate.quad(f, knots[-1], np.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    total += v
    err += e
    if err > 1e-9 * total:
        raise ConvergenceError(f"entry quadrature error {err:.3g} on {total:.6g}")
    return total


def u_entry_integral(i, j, cfg: SystemConfig, rho):
    """u_ij = int_0^inf x^(d-1) e^-x (1 + rho x/N_t)^(-2/eta) dx, evaluated by quadrature."""
    d = i + j + cfg.delta_n - 1
    return _weighted_laplace(d, 1.0, cfg.beta, rho / cfg.n_t)


def g_entry_integral(i, j, cfg: SystemConfig, sigma_i, rho):
    """g_ij = int_0^inf x^(d_j-1) e^(-x/sigma_i) (1 + rho x/N_t)^(-2/eta) dx by quadrature."""
    d = cfg.delta_n + j
    return _weighted_laplace(d, sigma_i, cfg.beta, rho / cfg.n_t)


def _scaled_det(log_entries):
    """det(exp(L)) as (sign, log|det|, lost), normalising columns then rows before the LU.

    After scaling no entry exceeds 1, so `lost` = -log10|det| of the scaled
    matrix is a rough count of digits cancelled away.  It is pessimistic for
    graded Hankel matrices, which pivoting handles well.
    """
    L = np.asarray(log_entries, dtype=float)
    col = L.max(axis=0)
    L = L - col
    row = L.max(axis=1)
    sign, logabs = detkit.slogdet(np.exp(L - row[:, None]))
    return sign, logabs + col.sum() + row.sum(), -logabs / math.log(10.0)


def _log_gamma_norm(cfg):
    return sum(specfun.ln_gamma(cfg.n_max - k + 1) for k in range(1, cfg.n_min + 1))


def ed_exact_uncorrelated(cfg: SystemConfig, rho):
    """Optimum expected distortion over an i.i.d. Rayleigh channel."""
    _check_rho(rho)
    n, beta, x = cfg.n_min, cfg.beta, cfg.n_t / rho
    logs = [_log_entry(d, beta, x) for d in range(1 + cfg.delta_n, 2 * n + cfg.delta_n)]
    L = [[logs[i + j] for j in range(n)] for i in range(n)]
    sign, logabs, _ = _scaled_det(L)
    denom = _log_gamma_norm(cfg) + sum(specfun.ln_gamma(n - k + 1) for k in range(1, n + 1))
    return _finish(cfg, sign, logabs - denom)


def ed_exact_correlated(cfg: SystemConfig, corr: CorrelationSpec, rho):
    """Optimum expected distortion with correlation eigenvalues on the N_min side."""
    _check_rho(rho)
    if not corr.is_correlated:
        raise ValueError("use ed_exact_uncorrelated (or ed_exact) for an uncorrelated channel")
    sigma = corr.sigma(cfg.n_min)
    spacing = min((b - a for a, b in zip(sigma, sigma[1:])), default=math.inf)
    if spacing < DEGENERACY_TOL:
        raise DegenerateEigenvaluesError(f"eigenvalue spacing {spacing:.3g} is below {DEGENERACY_TOL:g}")
    n, dn, beta = cfg.n_min, cfg.delta_n, cfg.beta
    L = [[_log_entry(dn + j, beta, cfg.n_t / (s * rho)) + (dn + j) * math.log(s) for j in range(1, n + 1)]
         for s in sigma]
    sign, logabs, lost = _scaled_det(L)
    if lost > LOST_DIGITS_WARN:
        warnings.warn(f"correlated determinant cancelled about {lost:.1f} digits at rho={rho:g}; "
                      "the result may be inaccurate", ConditioningWarning, stacklevel=2)
    vsign, vlog = detkit.slogdet(np.vander(np.asarray(sigma), increasing=True)) if n > 1 else (1.0, 0.0)
    denom = _log_gamma_norm(cfg) + (dn + 1) * sum(math.log(s) for s in sigma) + vlog
    return _finish(cfg, sign * vsign, logabs - denom)


def _finish(cfg, sign, log_ratio):
    if sign <= 0:
        raise ConvergenceError("determinant came out non-positive; entries lost too much precision")
    return cfg.p_s * math.exp(log_ratio)


def ed_exact(cfg: SystemConfig, rho, corr: CorrelationSpec = None):
    if corr is None or not corr.is_correlated:
        return ed_exact_uncorrelated(cfg, rho)
    return ed_exact_correlated(cfg, corr, rho)


def exact_curve(cfg: SystemConfig, corr, snr_grid, rtol=1e-9):
    """ED* on an ascending grid of linear SNR values.

    Returns a DistortionCurve keyed by SNR in dB.  Raises ArithmeticError if
    the values increase anywhere by more than `rtol`.
    """
    grid = as_grid(snr_grid)
    if np.any(np.diff(grid) <= 0) or np.any(grid <= 0):
        raise ValueError("SNR grid must be positive and strictly ascending")
    vals = np.array([ed_exact(cfg, float(r), corr) for r in grid])
    bad = np.nonzero(vals[1:] > vals[:-1] * (1 + rtol))[0]
    if bad.size:
        k = int(bad[0])
        raise ArithmeticError(f"ED* increased between rho={grid[k]:g} and rho={grid[k + 1]:g}")
    return DistortionCurve(snr_db=10.0 * np.log10(grid), ed_exact=vals)
