"""Ensemble descriptors, radii laws and limit profiles.

Each supported process has independent moduli: after unfolding, the number
of points in a disk of unfolded radius ``R`` is ``sum_k 1{Gamma_k <= R}`` with
independent ``Gamma_k``. This module evaluates the laws
``lambda_k(R) = Pr{Gamma_k <= R}`` (and their complements, separately, so both
tails stay accurate), the limit profile that describes them for large ``R``,
and a few auxiliary objects (tail bounds, Edgeworth approximations, MGFs).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import special

from . import specfun


class Family(str, enum.Enum):
    GINIBRE = "ginibre"
    GINIBRE_FINITE = "ginibre-finite"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class Ensemble:
    """A rotation-invariant determinantal process with independent moduli.

    Use the constructors :meth:`ginibre`, :meth:`finite` and :meth:`hyperbolic`
    rather than filling the fields by hand; ``__post_init__`` rejects field
    combinations that do not belong to the chosen family.
    """

    family: Family
    alpha: int = 0
    N: Optional[int] = None
    rho: Optional[float] = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if int(self.alpha) != self.alpha or self.alpha < 0:
            raise ValueError("Landau level alpha must be a non-negative integer")
        object.__setattr__(self, "alpha", int(self.alpha))
        if fam is Family.HYPERBOLIC:
            if self.rho is None or not (self.rho > 0):
                raise ValueError("hyperbolic ensemble needs rho > 0")
            if self.N is not None or self.alpha != 0:
                raise ValueError("hyperbolic ensemble takes neither N nor alpha")
            object.__setattr__(self, "rho", float(self.rho))
        else:
            if self.rho is not None:
                raise ValueError("rho only applies to the hyperbolic ensemble")
            if self.alpha > specfun.HERMITE_MAX_DEGREE:
                raise ValueError(f"alpha must be <= {specfun.HERMITE_MAX_DEGREE}")
            if fam is Family.GINIBRE_FINITE:
                if self.N is None or int(self.N) != self.N or self.N < 1:
                    raise ValueError("finite Ginibre ensemble needs a positive integer N")
                object.__setattr__(self, "N", int(self.N))
            elif self.N is not None:
                raise ValueError("N only applies to the finite Ginibre ensemble")

    @classmethod
    def ginibre(cls, alpha: int = 0) -> "Ensemble":
        return cls(Family.GINIBRE, alpha=alpha)

    @classmethod
    def finite(cls, N: int, alpha: int = 0) -> "Ensemble":
        return cls(Family.GINIBRE_FINITE, alpha=alpha, N=N)

    @classmethod
    def hyperbolic(cls, rho: float) -> "Ensemble":
        return cls(Family.HYPERBOLIC, rho=rho)

    @property
    def theta(self) -> int:
        """Geometry flag: 1 for the planar families, 0 for the hyperbolic disk."""
        return 0 if self.family is Family.HYPERBOLIC else 1

    @property
    def is_hyperbolic(self) -> bool:
        return self.family is Family.HYPERBOLIC

    @property
    def n_modes(self) -> Optional[int]:
        return self.N if self.family is Family.GINIBRE_FINITE else None

    def sigma(self, R: float) -> float:
        """Fluctuation scale ``Sigma_R``: ``sqrt(R)`` (planar) or ``R`` (hyperbolic)."""
        return float(R) if self.is_hyperbolic else math.sqrt(R)


# --------------------------------------------------------------------------
# Unfolding

def unfold(e: Ensemble, r: float) -> float:
    """Expected number of points in the disk of radius ``r``."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    if e.is_hyperbolic:
        if r >= 1:
            raise ValueError("hyperbolic radius must be < 1")
        return e.rho * r * r / (1.0 - r * r)
    return r * r


def unfold_inv(e: Ensemble, R: float) -> float:
    if R < 0:
        raise ValueError("unfolded radius must be non-negative")
    if e.is_hyperbolic:
        return math.sqrt(R / (e.rho + R))
    return math.sqrt(R)


# --------------------------------------------------------------------------
# Radii laws

def _laguerre_log_abs(alpha: int, beta: float, x: float) -> float:
    """log |classical L_alpha^{(beta)}(x)| by the scalar recurrence."""
    lp, lc = 1.0, 1.0 + beta - x
    if alpha == 0:
        return 0.0
    for n in range(1, alpha):
        lp, lc = lc, ((2 * n + 1 + beta - x) * lc - (n + beta) * lp) / (n + 1)
    return math.log(abs(lc)) if lc != 0.0 else -math.inf


def _level_density(alpha: int, k: int) -> Callable[[float], float]:
    """Density of ``Gamma_k^{(alpha)}``: orthonormal ``L^2 x^beta e^{-x}`` with ``beta = k-alpha-1``."""
    beta = k - alpha - 1
    log_norm = math.lgamma(alpha + 1) - math.lgamma(k)

    def dens(x: float) -> float:
        if x <= 0.0:
            return 0.0
        lg = _laguerre_log_abs(alpha, beta, x)
        if lg == -math.inf:
            return 0.0
        return math.exp(2.0 * lg + beta * math.log(x) - x + log_norm)

    return dens


def _level_cdf_pair(alpha: int, k: int, R: float) -> tuple[float, float]:
    """(cdf, sf) of ``Gamma_k^{(alpha)}`` at R by quadrature of the smaller side."""
    if R <= 0:
        return 0.0, 1.0
    dens = _level_density(alpha, k)
    mean = k + alpha
    sd = math.sqrt((2 * alpha + 1) * k)
    beta = k - alpha - 1
    pts = [mean]
    if beta > -1:
        pts.extend(special.roots_genlaguerre(alpha, beta)[0].tolist())
    if R <= mean:
        res = specfun.quad(dens, 0.0, R, tol=1e-300, rel_tol=1e-12, points=pts, limit=500, strict=False)
        cdf = min(max(res.value, 0.0), 1.0)
        return cdf, 1.0 - cdf
    upper = max(R, mean) + 60.0 * sd + 200.0
    res = specfun.quad(dens, R, upper, tol=1e-300, rel_tol=1e-12, points=pts, limit=500, strict=False)
    sf = min(max(res.value, 0.0), 1.0)
    return 1.0 - sf, sf


def radii_cdf(e: Ensemble, ks, R: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(lambda_k(R), 1 - lambda_k(R))`` for an array of modes ``ks``.

    Both arrays are computed directly so that neither loses relative accuracy
    to cancellation. Modes beyond ``N`` of a finite ensemble have ``lambda = 0``.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    if np.any(ks < 1):
        raise ValueError("modes are indexed from k = 1")
    R = float(R)
    if R < 0:
        raise ValueError("R must be non-negative")
    if e.is_hyperbolic:
        u = R / (e.rho + R)
        cdf = specfun.reg_inc_beta(ks, e.rho, u)
        sf = specfun.reg_inc_beta_upper(ks, e.rho, u)
    elif e.alpha == 0:
        cdf = specfun.reg_inc_gamma(ks, R)
        sf = specfun.reg_inc_gamma_upper(ks, R)
    else:
        cdf, sf = _cached_level_pairs(e.alpha, tuple(int(k) for k in ks), R)
        cdf, sf = np.array(cdf), np.array(sf)
    cdf = np.asarray(cdf, dtype=float).copy()
    sf = np.asarray(sf, dtype=float).copy()
    if e.family is Family.GINIBRE_FINITE:
        absent = ks > e.N
        cdf[absent] = 0.0
        sf[absent] = 1.0
    return cdf, sf


@lru_cache(maxsize=256)
def _cached_level_pairs(alpha: int, ks: tuple, R: float):
    pairs = [_level_cdf_pair(alpha, k, R) for k in ks]
    return tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)


def lambda_k(e: Ensemble, k, R: float):
    """``Pr{Gamma_k <= R}``; scalar in, scalar out, arrays broadcast."""
    cdf, _ = radii_cdf(e, k, R)
    return float(cdf[0]) if np.ndim(k) == 0 else cdf


def level_cdf(alpha: int, k: int, R: float) -> float:
    """CDF of a single level-``alpha`` radius; alias used by the Edgeworth checks."""
    return _level_cdf_pair(int(alpha), int(k), float(R))[0]


def level_density(alpha: int, k: int, x):
    dens = _level_density(int(alpha), int(k))
    return np.vectorize(dens, otypes=[float])(x)


# --------------------------------------------------------------------------
# Tail bounds

def _gamma_chernoff(k: float, R: float) -> float:
    """``e^{k-R} (R/k)^k``: bounds the far-side tail of a Gamma(k, 1) at R."""
    if k <= 0:
        return 1.0
    if R <= 0:
        return 0.0 if k >= R else 1.0
    return math.exp(min(0.0, k - R + k * math.log(R / k)))


def tail_bound(e: Ensemble, k: int, R: float) -> float:
    """Upper bound on ``min(lambda_k, 1 - lambda_k)`` used for window sizing.

    For planar ensembles the side is chosen by comparing ``k`` with ``R``:
    the upper tail ``Pr{Gamma_k <= R}`` when ``k >= R`` and the lower tail
    ``Pr{Gamma_k > R}`` otherwise. Level ``alpha >= 1`` radii are compared
    with plain gamma variables through polynomial prefactors. The hyperbolic
    radii have cheap exact laws, so the exact value is returned.
    """
    k = int(k)
    R = float(R)
    if e.family is Family.GINIBRE_FINITE and k > e.N:
        return 0.0
    if e.is_hyperbolic:
        cdf, sf = radii_cdf(e, [k], R)
        return float(min(cdf[0], sf[0]))
    a = e.alpha
    if a == 0:
        return _gamma_chernoff(k, R)
    if k >= R:
        m = k - 2 * a - 2
        if R <= 2 * a + 2 or m < 1:
            return 1.0
        log_b = (2 * a + 1) * math.log(3.0) + (a + 1) * math.log(R) + math.log(_gamma_chernoff(m, R) or 1e-320)
        return math.exp(min(0.0, log_b))
    # k < R: Pr{Gamma_k^{(a)} >= R} <= 4^a k^a Pr{Gamma_{k+a} >= R}
    m = k + a
    if m >= R:
        return 1.0
    log_b = a * math.log(4.0 * k) + math.log(_gamma_chernoff(m, R) or 1e-320)
    return math.exp(min(0.0, log_b))


# --------------------------------------------------------------------------
# Profiles

@dataclass(frozen=True)
class Profile:
    """Limit description ``lambda_k(R) ~ Phi(x) + Psi(x)/Sigma_R`` with ``x = (k - theta R)/Sigma_R``.

    ``Phi`` is the tail function (``Phi(a_minus) = 1``) and ``cdf = 1 - Phi``
    is carried separately for accuracy in the left tail. Derivatives are
    analytic. ``lambda2_0`` caches ``int_I Phi (1 - Phi)``.
    """

    name: str
    Phi: Callable
    cdf: Callable
    dPhi: Callable
    d3Phi: Callable
    Psi: Callable
    a_minus: float
    a_plus: float
    sigma: Callable[[float], float]
    lambda2_0: float = field(default=float("nan"))
    # a finite interval outside of which Phi(1 - Phi) is below double precision
    support_hint: tuple = (-math.inf, math.inf)

    @property
    def is_finite_edge(self) -> bool:
        return math.isfinite(self.a_plus)

    def variance_density(self, x):
        """``Phi(x) (1 - Phi(x))`` evaluated with both factors computed directly."""
        return self.Phi(x) * self.cdf(x)


def _hermite_profile(alpha: int, a_plus: float) -> Profile:
    a = int(alpha)
    w = 40.0 + 4.0 * math.sqrt(2 * a + 1)

    def Phi(x):
        return specfun.hermite_tail(a, x)

    def cdf(x):
        return specfun.hermite_cdf(a, x)

    def dPhi(x):
        return -specfun.hermite_sq(a, x)

    def d3Phi(x):
        return -specfun.hermite_sq(a, x, deriv=2)

    def Psi(x):
        x = np.asarray(x, dtype=float)
        return (a - 0.5 * x * x) * dPhi(x) + d3Phi(x) / 3.0

    name = f"ginibre(alpha={a})" if not math.isfinite(a_plus) else f"ginibre-edge(alpha={a}, a+={a_plus})"
    lo, hi = -w, min(w, a_plus)
    l2 = specfun.quad(lambda x: float(Phi(x) * cdf(x)), lo, hi, tol=1e-13, rel_tol=1e-13, points=[0.0]).value
    return Profile(name, Phi, cdf, dPhi, d3Phi, Psi, -math.inf, a_plus, math.sqrt, l2, (lo, hi))


def _hyperbolic_profile(rho: float) -> Profile:
    r = float(rho)
    log_c = r * math.log(r) - math.lgamma(r)

    def Phi(x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return special.gammaincc(r, r * x)

    def cdf(x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return special.gammainc(r, r * x)

    def _dens(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(log_c + (r - 1.0) * np.log(x) - r * x)
        return np.where(x > 0, out, 0.0)

    def dPhi(x):
        return -_dens(x)

    def d3Phi(x):
        # second derivative of the Gamma(r, rate r) density
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            poly = ((r - 1.0) * (r - 2.0) / (x * x) - 2.0 * r * (r - 1.0) / x + r * r)
        return np.where(x > 0, -_dens(x) * poly, 0.0)

    def Psi(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (r * x + 1.0 - r) * _dens(x)

    hi = 60.0 / r + 60.0
    l2 = _hyperbolic_lambda2(r, Phi, cdf)
    return Profile(f"hyperbolic(rho={r})", Phi, cdf, dPhi, d3Phi, Psi, 0.0, math.inf, lambda R: float(R), l2, (0.0, hi))


def _hyperbolic_lambda2(r, Phi, cdf) -> float:
    f = lambda x: float(Phi(x) * cdf(x))
    mean_pts = [0.5, 1.0, 2.0, 5.0]
    return specfun.quad(f, 0.0, 200.0 / min(r, 1.0) + 200.0, tol=1e-14, rel_tol=1e-13, points=mean_pts).value


@lru_cache(maxsize=64)
def profile(e: Ensemble, edge_a_plus: Optional[float] = None) -> Profile:
    """Limit profile of ``e``.

    Planar families use the harmonic-oscillator tail ``Phi_alpha`` on
    ``I = R`` (or ``(-inf, a+]`` for a finite ensemble observed at its edge,
    when ``edge_a_plus`` is given). The hyperbolic family uses the tail of a
    Gamma(shape rho, rate rho) variable on ``I = (0, inf)``.
    """
    if e.is_hyperbolic:
        if edge_a_plus is not None:
            raise ValueError("edge parameter only applies to finite Ginibre ensembles")
        return _hyperbolic_profile(e.rho)
    if edge_a_plus is not None and e.family is not Family.GINIBRE_FINITE:
        raise ValueError("edge parameter only applies to finite Ginibre ensembles")
    a_plus = math.inf if edge_a_plus is None else float(edge_a_plus)
    return _hermite_profile(e.alpha, a_plus)


def edge_radius(N: int, a_plus: float) -> float:
    """Unfolded radius placing the disk boundary at ``a+`` in edge units of an N-point ensemble."""
    R = N * (1.0 - a_plus / math.sqrt(N) + a_plus * a_plus / (2.0 * N))
    if R <= 0:
        raise ValueError("N too small for this a+: edge radius is not positive")
    return R


# --------------------------------------------------------------------------
# Edgeworth and moment generating functions

def edgeworth_cdf(alpha: int, k: int, x, *, alt_coefficient: bool = False):
    """One-term Edgeworth approximation of ``Pr{(Gamma_{k-alpha}^{(alpha)} - k)/sqrt(k) <= x}``.

    Returns ``(1 - Phi_alpha(x)) + c_k Phi_alpha'''(x)`` with ``c_k = 1/(3 sqrt k)``.
    ``alt_coefficient=True`` switches to ``c_k = 1/sqrt(3k)`` for comparison.
    """
    if k < 2 * alpha + 2:
        raise ValueError("need k >= 2 alpha + 2")
    x = np.asarray(x, dtype=float)
    c = 1.0 / math.sqrt(3.0 * k) if alt_coefficient else 1.0 / (3.0 * math.sqrt(k))
    with np.errstate(invalid="ignore"):
        d3 = -specfun.hermite_sq(alpha, x, deriv=2)
    d3 = np.where(np.isfinite(x), d3, 0.0)
    return specfun.hermite_cdf(alpha, x) + c * d3


def exact_level_cdf_normalized(alpha: int, k: int, x) -> np.ndarray:
    """Exact ``Pr{(Gamma_{k-alpha}^{(alpha)} - k)/sqrt(k) <= x}`` by quadrature."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    m = k - alpha
    out = np.empty_like(xs)
    for i, xi in enumerate(xs):
        R = k + xi * math.sqrt(k)
        if alpha == 0:
            out[i] = specfun.reg_inc_gamma(m, max(R, 0.0))
        else:
            out[i] = _level_cdf_pair(alpha, m, R)[0]
    return out


def mgf_alpha(alpha: int, k: int, z: float) -> float:
    """``E exp(z Gamma_{k-alpha}^{(alpha)})`` for ``z < 1``; a polynomial times ``(1-z)^{-k}``.

    Binomials with a lower index above the upper one vanish.
    """
    if z >= 1:
        raise ValueError("moment generating function has a pole at z = 1")
    total = 0.0
    for l in range(alpha + 1):
        total += special.comb(alpha, l, exact=True) * _binom_or_zero(k - alpha - 1, l) * z ** (2 * l)
    return (1.0 - z) ** (-k) * total


def _binom_or_zero(n: int, m: int) -> float:
    if m < 0 or n < m:
        return 0.0
    return float(special.comb(n, m, exact=True))


def cf_Z(alpha: int, z):
    """``E exp(z Z_alpha) = L_alpha(-z^2) e^{z^2/2}`` with ``L_alpha`` the classical Laguerre polynomial."""
    z = np.asarray(z, dtype=float)
    return specfun.laguerre_classical(int(alpha), 0.0, -z * z) * np.exp(0.5 * z * z)
