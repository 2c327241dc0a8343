"""Asymptotic objects: covariance kernels, large-deviation rates, entropy and cumulant coefficients."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import specfun
from .ensembles import Ensemble, Profile, profile, radii_cdf
from .exactdist import bernoulli_cumulant, entropy_fn, window

SQRT_PI = math.sqrt(math.pi)


# --------------------------------------------------------------------------
# Covariance kernels

def _ordered(s: float, t: float) -> tuple[float, float]:
    return (s, t) if s <= t else (t, s)


def micro_kernel(prof: Profile, s: float, t: float, tol: float = 1e-11) -> float:
    """``int_I Phi(x - s) (1 - Phi(x - t)) dx`` with ``s <= t`` (arguments are sorted).

    The kernel only depends on ``t - s`` when ``I`` is the whole line.
    """
    s, t = _ordered(float(s), float(t))
    lo_h, hi_h = prof.support_hint
    lo = max(prof.a_minus, lo_h + s)
    hi = min(prof.a_plus, hi_h + t)
    if hi <= lo:
        return 0.0

    def f(x):
        return float(prof.Phi(x - s) * prof.cdf(x - t))

    pts = sorted({s, t, 0.5 * (s + t), s - 3.0, t + 3.0})
    return specfun.quad(f, lo, hi, tol=tol, rel_tol=1e-12, points=pts, limit=600).value


def ginibre_micro_closed(s: float, t: float) -> float:
    """Closed form ``e^{-d^2} - 2 sqrt(pi) d Phi_0(sqrt(2) d)`` with ``d = |t - s|``."""
    d = abs(float(t) - float(s))
    return math.exp(-d * d) - 2.0 * SQRT_PI * d * float(specfun.gauss_tail(math.sqrt(2.0) * d))


def macro_sigma2(prof: Profile, t: float, a_plus_t: float = math.inf) -> float:
    """White-noise variance ``sqrt(t) int_{-inf}^{a+(t)} Phi (1 - Phi)`` for planar profiles."""
    if t <= 0:
        raise ValueError("t must be positive")
    if a_plus_t == -math.inf:
        return 0.0
    lo, hi = prof.support_hint
    hi = min(hi, a_plus_t)
    if hi <= lo:
        return 0.0
    val = specfun.quad(lambda x: float(prof.variance_density(x)), lo, hi, tol=1e-13, rel_tol=1e-12, points=[0.0]).value
    return math.sqrt(t) * val


def finite_a_plus(t: float) -> float:
    """Edge position at macroscopic time ``t`` for a finite ensemble observed at ``R = tN``."""
    if t < 1:
        return math.inf
    if t == 1:
        return 0.0
    return -math.inf


def hyper_kernel(rho: float, s: float, t: float, tol: float = 1e-12, *, fast_path: bool = True) -> float:
    """``int_0^inf Phi_rho(x/s) (1 - Phi_rho(x/t)) dx`` for ``s <= t`` (sorted).

    For ``rho = 1`` the integral is ``s^2/(s + t)``, returned directly.
    """
    if s <= 0 or t <= 0:
        raise ValueError("s and t must be positive")
    s, t = _ordered(float(s), float(t))
    if rho == 1.0 and fast_path:
        return s * s / (s + t)
    prof = profile(Ensemble.hyperbolic(rho))
    hi = prof.support_hint[1] * s

    def f(x):
        return float(prof.Phi(x / s) * prof.cdf(x / t))

    pts = [s * p for p in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)]
    return specfun.quad(f, 0.0, hi, tol=tol, rel_tol=1e-12, points=pts, limit=600).value


def ginibre_cov_exact(s: float, t: float) -> float:
    """Covariance of the Ginibre counts in concentric disks of radii ``s <= t``.

    ``e^{-S-T}(S I_0(2st) + st I_1(2st)) - (T - S) K(S, T)`` with ``S = s^2``,
    ``T = t^2`` and ``K(S, T) = int_0^S e^{-T-x} I_0(2 sqrt(T x)) dx``. Every
    Bessel factor is combined with its exponential so that only the scaled
    ``e^{-u} I_nu(u)`` is ever evaluated.
    """
    s, t = _ordered(float(s), float(t))
    if s < 0:
        raise ValueError("radii must be non-negative")
    if s == 0.0:
        return 0.0
    S, T = s * s, t * t
    u = 2.0 * s * t
    g = math.exp(-(t - s) ** 2)
    diag = g * (S * float(specfun.bessel_I_scaled(0, u)) + s * t * float(specfun.bessel_I_scaled(1, u)))
    if T == S:
        return diag

    def integrand(x):
        rx = math.sqrt(x)
        return math.exp(-(t - rx) ** 2) * float(specfun.bessel_I_scaled(0, 2.0 * t * rx))

    pts = [p for p in (S - 8.0 * s, S - 3.0 * s, S - s) if 0.0 < p < S]
    K = specfun.quad(integrand, 0.0, S, tol=1e-14, rel_tol=1e-13, points=pts, limit=600).value
    return diag - (T - S) * K


def direct_sum_cov(e: Ensemble, R_s: float, R_t: float, eps: float = 1e-14) -> float:
    """``sum_k lambda_k(R_s) (1 - lambda_k(R_t))`` over a window covering both radii (``R_s <= R_t``)."""
    R_s, R_t = _ordered(float(R_s), float(R_t))
    w_s, w_t = window(e, R_s, eps), window(e, R_t, eps)
    k_lo, k_hi = min(w_s.k_lo, w_t.k_lo), max(w_s.k_hi, w_t.k_hi)
    ks = np.arange(max(k_lo, 1), k_hi + 1)
    if ks.size == 0:
        return 0.0
    c_s, _ = radii_cdf(e, ks, R_s)
    _, sf_t = radii_cdf(e, ks, R_t)
    return float(np.dot(c_s, sf_t))


# --------------------------------------------------------------------------
# Large deviations

class LdpKind(str, enum.Enum):
    QUADRATIC = "quadratic"
    POISSONIAN = "poissonian"
    STRETCHED = "stretched"


@dataclass(frozen=True)
class LdpRegime:
    """Deviation scale ``Theta_R = R^{gamma/2}`` and the matching speed ``v_R``."""

    gamma: float
    regime: LdpKind

    def Theta(self, R: float) -> float:
        return float(R) ** (self.gamma / 2.0)

    def v(self, R: float) -> float:
        th = self.Theta(R)
        if self.regime is LdpKind.QUADRATIC:
            return th * th / R
        if self.regime is LdpKind.POISSONIAN:
            return th
        return th * math.log(th)


def ldp_regime(gamma: float) -> LdpRegime:
    """Regime of ``Theta_R = R^{gamma/2}``: quadratic (``1<gamma<2``), Poissonian (2), stretched (>2)."""
    if not gamma > 1:
        raise ValueError("large deviations need gamma > 1")
    if math.isinf(gamma):
        raise ValueError("gamma = inf has no power-law scale; use a finite gamma")
    if gamma < 2:
        kind = LdpKind.QUADRATIC
    elif gamma == 2:
        kind = LdpKind.POISSONIAN
    else:
        kind = LdpKind.STRETCHED
    return LdpRegime(float(gamma), kind)


@dataclass(frozen=True)
class LdpRate:
    J_at_x: float
    integral_0_to_x: float


def ldp_rate(regime: LdpRegime, x: float) -> LdpRate:
    """``J_gamma(x)`` and ``int_0^x J_gamma(t) dt`` in closed form."""
    if x < 0:
        raise ValueError("x must be non-negative")
    x = float(x)
    if regime.regime is LdpKind.QUADRATIC:
        return LdpRate(0.5 * x * x, x**3 / 6.0)
    if regime.regime is LdpKind.POISSONIAN:
        l = math.log1p(x)
        J = (1.0 + x) * l - x
        integral = 0.5 * (1.0 + x) ** 2 * l - 0.25 * (1.0 + x) ** 2 + 0.25 - 0.5 * x * x
        return LdpRate(J, integral)
    c = 1.0 - 2.0 / regime.gamma
    return LdpRate(c * x, 0.5 * c * x * x)


def jlm_prediction(gamma: float, x: float, r: float) -> float:
    """Leading-order ``-log Pr{xi(D_r) - r^2 >= x r^gamma}`` (presentation only)."""
    if x <= 0 or r <= 1:
        raise ValueError("need x > 0 and r > 1")
    if 0.5 <= gamma < 1:
        return 0.5 * x * x * SQRT_PI * r ** (2 * gamma - 1)
    if 1 < gamma < 2:
        return x**3 / 6.0 * r ** (3 * gamma - 2)
    if gamma > 2:
        return 0.5 * (gamma - 2) * x * x * r ** (2 * gamma) * math.log(r)
    raise ValueError("gamma must lie in [1/2, 1) U (1, 2) U (2, inf)")


# --------------------------------------------------------------------------
# Entropy and cumulant coefficients

def entropy_coefficient(alpha: int, beta: float, tol: float = 1e-10) -> float:
    """``int_R f_beta(Phi_alpha(x)) dx``."""
    prof = profile(Ensemble.ginibre(alpha))
    lo, hi = prof.support_hint

    def f(x):
        return float(entropy_fn(beta, prof.Phi(x), prof.cdf(x)))

    return specfun.quad(f, lo, hi, tol=tol, rel_tol=1e-12, points=[-6.0, -2.0, 0.0, 2.0, 6.0], limit=800).value


CE19_ODD_PREFACTOR = 1.0 / 3.0


def ce19_cumulant_coeff(q: int, odd_weighted: bool = False, prefactor: Optional[float] = None) -> float:
    """Leading coefficient of Ginibre count cumulants in terms of Bernoulli cumulants of ``Phi_0``.

    ``odd_weighted=False``: ``int kappa_{2q}(Phi_0(t)) dt`` (the ``R^{1/2}`` coefficient of
    the ``2q``-th cumulant). ``odd_weighted=True``: ``c int t kappa_{2q+1}(Phi_0(t)) dt``,
    the limit of the ``(2q+1)``-th cumulant; ``c`` defaults to ``1/3``, the value
    matching exact cumulants.
    """
    q_max = 3 if odd_weighted else 4
    if not 1 <= q <= q_max:
        raise ValueError(f"q must lie in 1..{q_max}")
    prof = profile(Ensemble.ginibre(0))
    lo, hi = prof.support_hint
    if odd_weighted:
        order = 2 * q + 1
        c = CE19_ODD_PREFACTOR if prefactor is None else prefactor

        def f(x):
            return x * float(bernoulli_cumulant(order, prof.Phi(x), prof.cdf(x)))
    else:
        order = 2 * q
        c = 1.0

        def f(x):
            return float(bernoulli_cumulant(order, prof.Phi(x), prof.cdf(x)))

    return c * specfun.quad(f, lo, hi, tol=1e-13, rel_tol=1e-12, points=[-3.0, 0.0, 3.0]).value
