"""Hypothesis tests and confidence intervals from the asymptotic normal
approximation theta_hat ~ N(theta, V_obs)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import stats

from .core import ParamVector
from .errors import NonPositiveVarianceError, SingularCovarianceError

DEFAULT_ALPHAS = (0.01, 0.05, 0.10)


@dataclass(frozen=True)
class TestReport:
    """A test statistic with its reference distribution's verdicts.

    ``df`` is the chi-square degrees of freedom, or None for a z statistic.
    ``reject_at`` maps each significance level to the rejection decision.
    """

    statistic: float
    df: int | None
    p_value: float
    reject_at: dict


def _as_vector(theta) -> np.ndarray:
    if isinstance(theta, ParamVector):
        return np.asarray(theta.theta, dtype=float)
    return np.asarray(theta, dtype=float).reshape(-1)


def chi_square_test(theta_hat, theta0, v_obs, alphas=DEFAULT_ALPHAS) -> TestReport:
    """Quadratic-form test of theta = theta0 with covariance ``v_obs``; the
    statistic (theta_hat - theta0)' v_obs^(-1) (theta_hat - theta0) is
    referred to chi-square with d = k^2 - k degrees of freedom (the number
    of free parameters in the quadratic form)."""
    diff = _as_vector(theta_hat) - _as_vector(theta0)
    v = np.asarray(v_obs, dtype=float)
    if v.shape != (diff.size, diff.size):
        raise ValueError("covariance shape disagrees with the parameter vector")
    v = 0.5 * (v + v.T)
    try:
        chol = sla.cho_factor(v, lower=True)
    except (np.linalg.LinAlgError, sla.LinAlgError) as err:
        raise SingularCovarianceError("covariance is not positive definite") from err
    stat = float(diff @ sla.cho_solve(chol, diff))
    df = diff.size
    p = float(stats.chi2.sf(stat, df))
    return TestReport(
        statistic=stat,
        df=df,
        p_value=p,
        reject_at={float(a): p < a for a in alphas},
    )


def z_test(theta_i: float, theta_i0: float, s_ii: float, alphas=DEFAULT_ALPHAS) -> TestReport:
    """Per-parameter test: tau = (theta_hat_i - theta_i0) / sqrt(s_ii) is
    standard normal under the null; two-sided p-value."""
    if not s_ii > 0:
        raise NonPositiveVarianceError(f"variance {s_ii!r} must be positive")
    tau = (float(theta_i) - float(theta_i0)) / float(np.sqrt(s_ii))
    p = float(2.0 * stats.norm.sf(abs(tau)))
    return TestReport(
        statistic=tau,
        df=None,
        p_value=p,
        reject_at={float(a): p < a for a in alphas},
    )


def confidence_interval(theta_i: float, s_ii: float, alpha: float):
    """Two-sided (1 - alpha) interval theta_hat_i +/- sqrt(s_ii) z_{alpha/2}."""
    if not s_ii > 0:
        raise NonPositiveVarianceError(f"variance {s_ii!r} must be positive")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    half = float(np.sqrt(s_ii) * stats.norm.ppf(1.0 - alpha / 2.0))
    return float(theta_i) - half, float(theta_i) + half
