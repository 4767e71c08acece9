"""Exact and high-SNR optimum expected distortion of MIMO links for Gaussian sources."""

from .asymptotic import (AsymptoticForm, ScbrKind, ScbrRegime, distortion_exponent,
                         distortion_exponent_dmt_form, distortion_factor,
                         distortion_factor_correlated, distortion_factor_uncorrelated,
                         ed_asymptotic, kappa_h, kappa_l, scbr_regime, sep_distortion_exponent)
from .errors import ConditioningWarning, ConvergenceError, DegenerateEigenvaluesError, PoleError
from .exact import ed_exact, ed_exact_correlated, ed_exact_uncorrelated, exact_curve
from .mcsim import McEstimate, ed_alm, ed_sm, mc_expected_distortion
from .model import CorrelationSpec, DistortionCurve, SystemConfig, exponential_correlation

__version__ = "0.1.0"
