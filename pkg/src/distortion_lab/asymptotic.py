"""
High-SNR behaviour of the optimum expected distortion:

    ED*_asy = mu * (log2 rho)^eps * rho^(-Delta)

The exponent Delta is the same with or without spatial correlation.  The
factor mu depends on which of three bandwidth-ratio regimes the system is in
(high, moderate or low SCBR), and on the correlation eigenvalues.
"""

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import detkit, specfun
from .detkit import SignedLog
from .errors import ConditioningWarning, DegenerateEigenvaluesError
from .model import CorrelationSpec, SystemConfig

REGIME_TOL = 1e-9
DEGENERACY_TOL = 1e-8
CONDITIONING_SPACING = 1e-3


class ScbrKind(enum.Enum):
    HSCBR = "HSCBR"
    MSCBR = "MSCBR"
    LSCBR = "LSCBR"


@dataclass(frozen=True)
class ScbrRegime:
    kind: ScbrKind
    partition_l: int
    boundary_log_case: bool


@dataclass(frozen=True)
class AsymptoticForm:
    """mu * (log2 rho)^log_power * rho^(-delta)."""
    mu: float
    delta: float
    log_power: int = 0

    def __call__(self, rho):
        return ed_asymptotic(self, rho)


def scbr_regime(cfg: SystemConfig) -> ScbrRegime:
    beta, dn = cfg.beta, cfg.delta_n
    if beta < dn + 1 - REGIME_TOL:
        return ScbrRegime(ScbrKind.HSCBR, 0, False)
    if beta > cfg.n_t + cfg.n_r - 1 + REGIME_TOL:
        return ScbrRegime(ScbrKind.LSCBR, cfg.n_min, False)
    s = beta + 1 - dn
    l = int(math.floor(s / 2 + REGIME_TOL))
    l = min(max(l, 1), cfg.n_min)
    rem = s - 2 * round(s / 2)
    return ScbrRegime(ScbrKind.MSCBR, l, abs(rem) < REGIME_TOL)


def distortion_exponent(cfg: SystemConfig) -> float:
    beta, dn = cfg.beta, cfg.delta_n
    return float(sum(min(beta, 2 * k - 1 + dn) for k in range(1, cfg.n_min + 1)))


def distortion_exponent_dmt_form(cfg: SystemConfig) -> float:
    """The exponent written as (N_t-m)(N_r-m) + 2m/eta."""
    reg = scbr_regime(cfg)
    if reg.kind is ScbrKind.HSCBR:
        m = cfg.n_min
    elif reg.kind is ScbrKind.LSCBR:
        m = 0
    else:
        m = cfg.n_min - reg.partition_l
    return float((cfg.n_t - m) * (cfg.n_r - m) + m * cfg.beta)


def _kappa_l_log(beta, t, m, n):
    acc = SignedLog()
    if t == 0:
        return acc
    acc.mul_gamma(n - m + 1).mul_gamma(beta - n + m - 1).mul_gamma(beta, -1)
    for k in range(2, t + 1):
        acc.mul_gamma(k).mul_gamma(n - m + k)
        acc.mul_gamma(beta - n + m - 2 * k + 2).mul_gamma(beta - n + m - 2 * k + 1)
        acc.mul_gamma(beta - k + 1, -1).mul_gamma(beta - n + m - k + 1, -1)
    return acc


def _kappa_h_log(beta, t, m, n):
    acc = SignedLog()
    for k in range(1, t + 1):
        acc.mul_gamma(k).mul_gamma(n - m - beta + k)
    return acc


def _check_t(t):
    if int(t) != t or t < 0:
        raise ValueError(f"t must be a non-negative integer, got {t!r}")
    return int(t)


def kappa_l(beta, t, m, n):
    return _kappa_l_log(beta, _check_t(t), m, n).value()


def kappa_h(beta, t, m, n):
    return _kappa_h_log(beta, _check_t(t), m, n).value()


def _mu_uncorrelated_log(cfg: SystemConfig, reg: ScbrRegime, delta):
    beta, nmin, nmax = cfg.beta, cfg.n_min, cfg.n_max
    if reg.kind is ScbrKind.HSCBR:
        acc = _kappa_h_log(beta, nmin, nmin, nmax)
    elif reg.kind is ScbrKind.LSCBR:
        acc = _kappa_l_log(beta, nmin, nmin, nmax)
    else:
        l = reg.partition_l
        acc = _kappa_l_log(beta, l - 1 if reg.boundary_log_case else l, nmin, nmax)
        kh = _kappa_h_log(beta - 2 * l, nmin - l, nmin, nmax)
        acc.mul_signed_log(kh)
    for k in range(1, nmin + 1):
        acc.mul_gamma(nmax - k + 1, -1).mul_gamma(nmin - k + 1, -1)
    acc.mul(cfg.n_t, delta)
    acc.mul(cfg.p_s)
    if reg.boundary_log_case:
        # the true asymptote carries ln(rho); ED_asy is written with log2(rho)
        acc.mul(math.log(2.0))
    return acc


def distortion_factor_uncorrelated(cfg: SystemConfig) -> AsymptoticForm:
    reg = scbr_regime(cfg)
    delta = distortion_exponent(cfg)
    mu = _mu_uncorrelated_log(cfg, reg, delta).value()
    return AsymptoticForm(mu=mu, delta=delta, log_power=int(reg.boundary_log_case))


def _v3_matrix(sigma, dn, beta):
    """V3 with v_ij = sigma_i^(-min(j-1, beta-d_j)), d_j = dn+j.

    When beta is an integer a power from the second family can coincide with
    one from the first; the limiting matrix then carries sigma^e ln(sigma) in
    that column.
    """
    n = len(sigma)
    s = np.asarray(sigma, dtype=float)
    first = [j - 1 for j in range(1, n + 1) if j - 1 <= beta - (dn + j) + REGIME_TOL]
    cols = []
    for j in range(1, n + 1):
        d = dn + j
        if j - 1 <= beta - d + REGIME_TOL:
            cols.append(s ** (-(j - 1)))
        else:
            e = d - beta
            if any(abs(e + f) < REGIME_TOL for f in first):
                cols.append(s ** e * np.log(s))
            else:
                cols.append(s ** e)
    return np.column_stack(cols)


def _check_spacing(sigma):
    spacing = min((b - a for a, b in zip(sigma, sigma[1:])), default=math.inf)
    if spacing < DEGENERACY_TOL:
        raise DegenerateEigenvaluesError(f"eigenvalue spacing {spacing:.3g} is below {DEGENERACY_TOL:g}")
    if spacing < CONDITIONING_SPACING:
        warnings.warn(f"eigenvalue spacing {spacing:.3g} leaves the correlated factor poorly conditioned",
                      ConditioningWarning, stacklevel=3)


def distortion_factor_correlated(cfg: SystemConfig, corr: CorrelationSpec) -> AsymptoticForm:
    base = distortion_factor_uncorrelated(cfg)
    if not corr.is_correlated:
        return base
    sigma = corr.sigma(cfg.n_min)
    _check_spacing(sigma)
    reg = scbr_regime(cfg)
    logsum = sum(math.log(s) for s in sigma)
    if reg.kind is ScbrKind.HSCBR:
        return AsymptoticForm(base.mu * math.exp(-cfg.beta * logsum), base.delta, base.log_power)
    if reg.kind is ScbrKind.LSCBR:
        return AsymptoticForm(base.mu * math.exp(-cfg.n_max * logsum), base.delta, base.log_power)

    n, dn, beta, l = cfg.n_min, cfg.delta_n, cfg.beta, reg.partition_l
    acc = SignedLog.of(base.mu)
    acc.mul((-1.0) ** (l * (l - 1) // 2))
    vsign, vlog = detkit.slogdet(_v3_matrix(sigma, dn, beta))
    acc.mul_signed_log(SignedLog(vsign, vlog))
    for s in sigma:
        acc.mul(s, -(dn + 1))
    acc.mul(detkit.vandermonde_det(sigma), -1)
    for k in range(1, n - l + 1):
        acc.mul(specfun.pochhammer(k, l))
        for i in range(l):
            f = dn - beta + l + k + i
            # a vanishing factor here is the integer-beta limit handled by the log columns
            if abs(f) > REGIME_TOL:
                acc.mul(f, -1)
    return AsymptoticForm(acc.value(), base.delta, base.log_power)


def distortion_factor(cfg: SystemConfig, corr: CorrelationSpec = None) -> AsymptoticForm:
    if corr is None:
        return distortion_factor_uncorrelated(cfg)
    return distortion_factor_correlated(cfg, corr)


def ed_asymptotic(form: AsymptoticForm, rho):
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    if form.log_power:
        if not rho > 1:
            raise ValueError("the log2(rho) factor needs rho > 1")
        return form.mu * math.log2(rho) ** form.log_power * rho ** (-form.delta)
    return form.mu * rho ** (-form.delta)


def sep_distortion_exponent(cfg: SystemConfig) -> float:
    """Distortion exponent of separate source and channel coding.

    Piecewise in eta over brackets [2(j-1)/d(j-1), 2j/d(j)), d(j) = (N_t-j)(N_r-j).
    The last bracket has d(N_min) = 0 and is open above.
    """
    eta = cfg.eta

    def dstar(j):
        return (cfg.n_t - j) * (cfg.n_r - j)

    for j in range(1, cfg.n_min + 1):
        lo = 2.0 * (j - 1) / dstar(j - 1)
        hi = 2.0 * j / dstar(j) if dstar(j) > 0 else math.inf
        if lo <= eta < hi:
            a, b = dstar(j - 1), dstar(j)
            return 2.0 * (j * a - (j - 1) * b) / (2.0 + eta * (a - b))
    raise ValueError(f"no bracket contains eta={eta!r}")
