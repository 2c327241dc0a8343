"""Limit functions of the cumulant generating function and deviation estimates.

For a profile ``Phi`` on an interval ``I`` the centred count satisfies, for
real ``z``,

    log E exp(z Xi_R) = Sigma_R Lambda(z) + log psi(z) + o(1),

with ``Lambda(z) = int_I kappa_{Phi(x)}(z) dx`` built from the centred
Bernoulli cumulant generating function ``kappa_p``. This module evaluates
``Lambda`` (with analytic derivatives), ``psi``, the Legendre transform of
``Lambda`` and the tail estimates derived from them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import specfun
from .ensembles import Profile

Z_BAND = 30.0
LAMBDA_TOL = 1e-10
PSI_TOL = 1e-8


class RateDomainError(ValueError):
    """Requested ``y`` lies outside the range of ``Lambda'`` on the supported band."""


# --------------------------------------------------------------------------
# Centred Bernoulli cumulant generating function

def _kappa_pq(p, q, z):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    em1 = math.expm1(z)
    em1_neg = math.expm1(-z)
    # log(1 + p (e^z - 1)) - p z, rewritten around whichever of p, q is small
    small_p = np.log1p(p * em1) - p * z
    small_q = q * z + np.log1p(q * em1_neg)
    return np.where(p <= 0.5, small_p, small_q)


def kappa(p, z: float, one_minus_p=None):
    """``kappa_p(z) = log(1 + p (e^z - 1)) - p z``; vanishes for ``p`` in {0, 1}."""
    p = np.asarray(p, dtype=float)
    q = 1.0 - p if one_minus_p is None else one_minus_p
    return _kappa_pq(p, q, float(z))


def kappa_dp(p, z: float, one_minus_p=None):
    """``d kappa_p(z) / dp = (e^z - 1)/(1 + p (e^z - 1)) - z``."""
    p = np.asarray(p, dtype=float)
    q = 1.0 - p if one_minus_p is None else np.asarray(one_minus_p, dtype=float)
    z = float(z)
    if z >= 0:
        ez = math.exp(-z)
        return -math.expm1(-z) / (p + q * ez) - z
    return math.expm1(z) / (q + p * math.exp(z)) - z


def kappa_dz(p, z: float, order: int = 1, one_minus_p=None):
    """z-derivatives of ``kappa_p``: order 1 is ``pq(e^z-1)/(1+p(e^z-1))``, order 2 ``pq e^z/(1+p(e^z-1))^2``."""
    p = np.asarray(p, dtype=float)
    q = 1.0 - p if one_minus_p is None else np.asarray(one_minus_p, dtype=float)
    z = float(z)
    if order == 0:
        return _kappa_pq(p, q, z)
    # divide through by e^{max(z,0)} to keep everything bounded
    if z >= 0:
        ez = math.exp(-z)
        den = p + q * ez
        if order == 1:
            return p * q * (-math.expm1(-z)) / den
        if order == 2:
            return p * q * ez / (den * den)
    else:
        ez = math.exp(z)
        den = q + p * ez
        if order == 1:
            return p * q * math.expm1(z) / den
        if order == 2:
            return p * q * ez / (den * den)
    raise ValueError("order must be 0, 1 or 2")


# --------------------------------------------------------------------------
# Limit object

@dataclass(frozen=True)
class RatePoint:
    y: float
    I: float
    Iprime: float
    Idoubleprime: float


@dataclass(frozen=True)
class PreciseDeviation:
    """The precise-deviation estimate and its four multiplicative factors."""

    value: float
    exponential: float
    gaussian: float
    psi_factor: float
    lattice_factor: float
    rate: RatePoint


@dataclass(frozen=True)
class GaussianScaleEstimates:
    extended_clt_value: float
    moderate_dev_value: float
    berry_esseen_bound_form: float


class ModPhiLimit:
    """``Lambda`` and ``psi`` attached to a :class:`Profile`.

    Evaluators work on the real axis within ``|z| <= 30``.
    """

    def __init__(self, profile: Profile, x_min: float = -Z_BAND, x_max: float = Z_BAND):
        self.profile = profile
        self.domain = (float(x_min), float(x_max))

    def __repr__(self) -> str:
        return f"ModPhiLimit({self.profile.name})"

    # -- integration helpers ------------------------------------------------
    def _range(self, z: float) -> tuple[float, float, list]:
        prof = self.profile
        lo, hi = prof.support_hint
        if prof.a_minus == 0.0:  # half-line profile
            scale = prof.support_hint[1] / 120.0
            hi = prof.support_hint[1] + 2.0 * abs(z) * scale
            pts = [p for p in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0) if p < hi]
            return 0.0, hi, pts
        pts = [p for p in (-12.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 12.0) if lo < p < hi]
        return lo, hi, pts

    def _integrate(self, integrand, z: float, tol: float) -> float:
        lo, hi, pts = self._range(z)
        return specfun.quad(integrand, lo, hi, tol=tol, rel_tol=1e-12, points=pts, limit=600).value

    # -- Lambda ---------------------------------------------------------------
    def Lambda(self, z: float, order: int = 0) -> float:
        if order not in (0, 1, 2):
            raise ValueError("order must be 0, 1 or 2")
        z = float(z)
        if abs(z) > Z_BAND:
            raise ValueError(f"|z| must be <= {Z_BAND}")
        if z == 0.0:
            if order == 2:
                return self.profile.lambda2_0
            return 0.0
        prof = self.profile

        def f(x):
            return float(kappa_dz(prof.Phi(x), z, order, one_minus_p=prof.cdf(x)))

        return self._integrate(f, z, LAMBDA_TOL)

    @cached_property
    def lambda2_0(self) -> float:
        return self.profile.lambda2_0

    def psi(self, z: float) -> float:
        """``exp(int_I Psi(x) d_p kappa_{Phi(x)}(z) dx + kappa_{Phi(a+)}(z)/2)``."""
        z = float(z)
        if z == 0.0:
            return 1.0
        if abs(z) > Z_BAND:
            raise ValueError(f"|z| must be <= {Z_BAND}")
        prof = self.profile

        def f(x):
            return float(prof.Psi(x) * kappa_dp(prof.Phi(x), z, one_minus_p=prof.cdf(x)))

        total = self._integrate(f, z, PSI_TOL)
        if math.isfinite(prof.a_plus):
            total += 0.5 * float(kappa(prof.Phi(prof.a_plus), z, one_minus_p=prof.cdf(prof.a_plus)))
        return math.exp(total)

    def log_psi(self, z: float) -> float:
        return math.log(self.psi(z))

    # -- Legendre transform -------------------------------------------------
    def y_range(self) -> tuple[float, float]:
        lo, hi = self.domain
        return self.Lambda(lo, 1), self.Lambda(hi, 1)

    def solve_slope(self, y: float, tol: float = 1e-10) -> float:
        """Return ``x*`` with ``Lambda'(x*) = y`` by safeguarded Newton iteration."""
        if y == 0.0:
            return 0.0
        lo, hi = self.domain
        d_lo, d_hi = self.Lambda(lo, 1), self.Lambda(hi, 1)
        if not (d_lo < y < d_hi):
            raise RateDomainError(f"y = {y} outside the attainable interval ({d_lo}, {d_hi})")
        # bracket on the correct side of zero (Lambda' is increasing, Lambda'(0) = 0)
        a, b = (0.0, hi) if y > 0 else (lo, 0.0)
        x = y / self.lambda2_0
        if not (a < x < b):
            x = 0.5 * (a + b)
        for _ in range(200):
            g = self.Lambda(x, 1) - y
            if abs(g) <= tol:
                return x
            if g > 0:
                b = x
            else:
                a = x
            h = self.Lambda(x, 2)
            step = x - g / h if h > 0 else math.nan
            x = step if (a < step < b) else 0.5 * (a + b)
            if b - a < 1e-15 * max(1.0, abs(x)):
                return x
        raise RuntimeError("Legendre transform did not converge")

    def rate(self, y: float) -> RatePoint:
        """``I(y) = sup_x (x y - Lambda(x))`` together with ``I'`` and ``I''``."""
        y = float(y)
        if y == 0.0:
            return RatePoint(0.0, 0.0, 0.0, 1.0 / self.lambda2_0)
        x = self.solve_slope(y)
        I = x * y - self.Lambda(x, 0)
        return RatePoint(y, max(I, 0.0), x, 1.0 / self.Lambda(x, 2))

    # -- deviation estimates ------------------------------------------------
    def precise_deviation(self, sigma_R: float, y: float) -> PreciseDeviation:
        """Estimate of ``Pr{Xi >= sigma_R y}`` for ``y > 0``.

        ``exp(-sigma I(y)) * sqrt(I''(y) / (2 pi sigma)) * psi(I'(y)) / (1 - exp(-I'(y)))``.
        For the left tail apply this to the reflected profile (``-Xi``).
        """
        if not y > 0:
            raise ValueError("precise deviations need y > 0")
        rp = self.rate(y)
        h = rp.Iprime
        expo = math.exp(-sigma_R * rp.I)
        gauss = math.sqrt(rp.Idoubleprime / (2.0 * math.pi * sigma_R))
        psi = self.psi(h)
        latt = 1.0 / (-math.expm1(-h))
        return PreciseDeviation(expo * gauss * psi * latt, expo, gauss, psi, latt, rp)

    def cor_mod_estimates(self, sigma_R: float, x: float, be_constant: float = 1.0) -> GaussianScaleEstimates:
        """Gaussian-scale estimates for ``Xi / sqrt(sigma_R Lambda''(0))`` at level ``x``."""
        clt = float(specfun.gauss_tail(x))
        if x > 0:
            y = x * math.sqrt(self.lambda2_0 / sigma_R)
            I = self.rate(y).I
            moderate = math.exp(-sigma_R * I) / (math.sqrt(2.0 * math.pi) * x)
        else:
            moderate = math.nan
        return GaussianScaleEstimates(clt, moderate, be_constant / math.sqrt(sigma_R))

    def decay_check(self, x: float, y: float) -> float:
        """Bound ``exp(-y^2 e^{-|x|} Lambda''(0) / 12)`` on ``|exp(Lambda(x+iy) - Lambda(x))|``."""
        if abs(y) > math.pi:
            raise ValueError("|y| must be <= pi")
        return math.exp(-y * y * math.exp(-abs(x)) * self.lambda2_0 / 12.0)


def precise_deviation(limit: ModPhiLimit, sigma_R: float, y: float) -> float:
    return limit.precise_deviation(sigma_R, y).value


def cor_mod_estimates(limit: ModPhiLimit, sigma_R: float, x: float) -> GaussianScaleEstimates:
    return limit.cor_mod_estimates(sigma_R, x)


def decay_check(limit: ModPhiLimit, x: float, y: float) -> float:
    return limit.decay_check(x, y)
