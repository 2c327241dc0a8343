"""Exact finite-R distribution of counting statistics.

The count in a disk is a sum of independent Bernoulli variables (one per mode
``k`` with success probability ``lambda_k(R)``). Only a window of modes is
genuinely random: modes far below ``R`` are hits, modes far above are misses,
up to a certified total-variation budget. On that window the law is a
Poisson-binomial distribution, obtained here by direct convolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from scipy import special

from .ensembles import Ensemble, Family, radii_cdf, tail_bound, unfold

FLUSH_THRESHOLD = 1e-300


class WindowBudgetError(RuntimeError):
    """The truncation budget could not be met."""


@dataclass(frozen=True)
class TruncationWindow:
    """Modes ``k_lo..k_hi`` are random; ``deterministic_count = k_lo - 1`` modes are certain hits.

    ``eps_total`` bounds ``sum_{k<k_lo} (1 - lambda_k) + sum_{k>k_hi} lambda_k``.
    """

    k_lo: int
    k_hi: int
    deterministic_count: int
    eps_total: float

    @property
    def size(self) -> int:
        return max(self.k_hi - self.k_lo + 1, 0)

    @property
    def modes(self) -> np.ndarray:
        return np.arange(self.k_lo, self.k_hi + 1)


@dataclass(frozen=True)
class PoissonBinomialPMF:
    """Law of the number of hits: ``Pr{count = offset + j} = probs[j]``.

    ``center`` is the value subtracted to obtain the centred statistic
    (the expected count, which is exactly ``R`` for infinite ensembles).
    """

    offset: int
    probs: np.ndarray
    eps_total: float
    center: float

    @property
    def support(self) -> np.ndarray:
        return self.offset + np.arange(self.probs.size)

    @property
    def centred_support(self) -> np.ndarray:
        return self.support - self.center

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def variance(self) -> float:
        m = self.mean()
        return float(np.dot((self.support - m) ** 2, self.probs))

    def tail(self, y: float) -> float:
        """``Pr{count - center >= y}``."""
        if y == -math.inf:
            return 1.0
        if y == math.inf:
            return 0.0
        j = _lattice_ceil(self.center + y) - self.offset
        if j <= 0:
            return 1.0
        if j >= self.probs.size:
            return 0.0
        return float(min(1.0, self.probs[j:].sum()))

    def cdf(self, y: float) -> float:
        """``Pr{count - center <= y}``."""
        if y == -math.inf:
            return 0.0
        j = _lattice_floor(self.center + y) - self.offset
        if j < 0:
            return 0.0
        return float(min(1.0, self.probs[: j + 1].sum()))


def _lattice_ceil(x: float) -> int:
    # thresholds landing on an integer up to rounding are treated as that integer
    return math.ceil(x - 1e-9 * max(1.0, abs(x)))


def _lattice_floor(x: float) -> int:
    return math.floor(x + 1e-9 * max(1.0, abs(x)))


def mean_count(e: Ensemble, R: float) -> float:
    """Expected number of points: ``R`` for infinite ensembles, ``sum_{k<=N} lambda_k`` otherwise."""
    if e.family is not Family.GINIBRE_FINITE:
        return float(R)
    c, _ = radii_cdf(e, np.arange(1, e.N + 1), R)
    return float(c.sum())


# --------------------------------------------------------------------------
# Windows

def _upper_ratio(e: Ensemble, R: float, K: int) -> float:
    """Bound on ``lambda_{k+1}/lambda_k`` for all ``k > K`` (or ``inf`` if none is available).

    ``lambda_k`` is a Poisson tail ``Pr{Pois(R) >= k}`` (planar, alpha = 0) or a
    negative-binomial tail (hyperbolic); both pmfs have a ratio of successive
    terms bounded by an explicit decreasing function of the index.
    """
    if e.is_hyperbolic:
        u = R / (e.rho + R)
        q = u * max(1.0, (K + 1 + e.rho) / (K + 2))
    else:
        q = R / (K + 2)
    return q if q < 1.0 else math.inf


def _scan_exact(e: Ensemble, R: float, eps: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Exact (cdf, sf) for modes 1..K with a certified bound on ``sum_{k>K} lambda_k``."""
    N = e.n_modes
    if e.is_hyperbolic:
        K = int(math.ceil(R * (1.0 + 40.0 / e.rho))) + 50
    else:
        K = int(math.ceil(R + 12.0 * math.sqrt(R + 1.0) + 30))
    while True:
        if N is not None and K >= N:
            ks = np.arange(1, N + 1)
            cdf, sf = radii_cdf(e, ks, R)
            return cdf, sf, 0.0
        ks = np.arange(1, K + 1)
        cdf, sf = radii_cdf(e, ks, R)
        q = _upper_ratio(e, R, K)
        rest = cdf[-1] * q / (1.0 - q) if math.isfinite(q) else math.inf
        if rest <= eps * 1e-3 or rest == 0.0:
            return cdf, sf, float(rest)
        K *= 2
        if K > 50_000_000:
            raise WindowBudgetError("window scan did not close; R too large for exact evaluation")


def _trim(cdf: np.ndarray, sf: np.ndarray, rest: float, eps: float) -> TruncationWindow:
    """Choose the narrowest window whose discarded mass is at most ``eps``."""
    n = cdf.size
    lo_mass = np.cumsum(sf)  # lo_mass[i] = sum_{k <= i+1} (1 - lambda_k)
    hi_mass = np.cumsum(cdf[::-1])[::-1] + rest  # hi_mass[i] = sum_{k >= i+1} lambda_k
    half = 0.5 * eps
    # k_lo: largest index with sum_{k<k_lo} sf <= half
    i_lo = int(np.searchsorted(lo_mass, half, side="right"))  # number of certain modes
    k_lo = i_lo + 1
    # k_hi: smallest index with sum_{k>k_hi} cdf <= half
    ok = np.nonzero(hi_mass <= half)[0]
    if ok.size:
        k_hi = int(ok[0])  # modes k >= ok[0]+1 are discarded, so k_hi = ok[0]
    else:
        k_hi = n
        if rest > half:
            raise WindowBudgetError("upper tail of the window exceeds its budget")
    k_hi = max(k_hi, k_lo - 1)
    lo_discard = float(lo_mass[i_lo - 1]) if i_lo > 0 else 0.0
    hi_discard = float(hi_mass[k_hi]) if k_hi < n else rest
    return TruncationWindow(k_lo, k_hi, k_lo - 1, max(lo_discard + hi_discard, 1e-300))


def _level_window(e: Ensemble, R: float, eps: float) -> TruncationWindow:
    """Window for Landau levels alpha >= 1: bounds outside, exact values inside."""
    N = e.n_modes
    quarter = 0.25 * eps
    # upper side: sum the bound series until it closes
    K_top = int(math.ceil(R + 80.0 * math.sqrt(R + 1.0) + 20 * e.alpha + 60))
    if N is not None:
        K_top = min(K_top, N)
    k0 = max(int(math.floor(R)), 1)
    ups = np.array([tail_bound(e, k, R) for k in range(k0, K_top + 1)])
    # tail of the series beyond K_top: terms are below 1e-300 and decay super-geometrically
    tail_up = np.cumsum(ups[::-1])[::-1]
    ok = np.nonzero(tail_up <= quarter)[0]
    k_hi_b = k0 + int(ok[0]) - 1 if ok.size else K_top
    lows = np.array([tail_bound(e, k, R) for k in range(1, k0 + 1)])
    head_lo = np.cumsum(lows)
    ok = np.nonzero(head_lo <= quarter)[0]
    k_lo_b = int(ok[-1]) + 2 if ok.size else 1
    k_hi_b = max(k_hi_b, k_lo_b)
    bound_lo = float(head_lo[k_lo_b - 2]) if k_lo_b >= 2 else 0.0
    bound_hi = float(tail_up[k_hi_b - k0 + 1]) if (k_hi_b - k0 + 1) < ups.size else 0.0
    ks = np.arange(k_lo_b, k_hi_b + 1)
    cdf, sf = radii_cdf(e, ks, R)
    inner = _trim(cdf, sf, bound_hi, max(eps - 2.0 * bound_lo, eps / 2) )
    k_lo = inner.k_lo + k_lo_b - 1
    k_hi = inner.k_hi + k_lo_b - 1
    return TruncationWindow(k_lo, k_hi, k_lo - 1, max(inner.eps_total + bound_lo, 1e-300))


@lru_cache(maxsize=128)
def window(e: Ensemble, R: float, eps: float = 1e-12) -> TruncationWindow:
    """Certified truncation window of ``e`` at unfolded radius ``R``."""
    if not (0.0 < eps <= 1e-3):
        raise ValueError("eps must lie in (0, 1e-3]")
    if R < 0:
        raise ValueError("R must be non-negative")
    R = float(R)
    if R == 0.0:
        return TruncationWindow(1, 0, 0, 1e-300)
    if not e.is_hyperbolic and e.alpha >= 1:
        return _level_window(e, R, eps)
    cdf, sf, rest = _scan_exact(e, R, eps)
    return _trim(cdf, sf, rest, eps)


@lru_cache(maxsize=128)
def window_probs(e: Ensemble, R: float, eps: float = 1e-12) -> tuple[TruncationWindow, np.ndarray, np.ndarray]:
    """Window together with ``(lambda_k, 1 - lambda_k)`` over its modes (memoized)."""
    w = window(e, R, eps)
    if w.size == 0:
        return w, np.zeros(0), np.zeros(0)
    cdf, sf = radii_cdf(e, w.modes, R)
    return w, cdf, sf


# --------------------------------------------------------------------------
# Poisson-binomial law

def convolve_bernoulli(ps, qs=None) -> np.ndarray:
    """Distribution of a sum of independent Bernoulli(p_i), by direct convolution.

    ``qs`` optionally supplies ``1 - p_i`` computed without cancellation.
    """
    ps = np.asarray(ps, dtype=float)
    qs = 1.0 - ps if qs is None else np.asarray(qs, dtype=float)
    out = np.zeros(ps.size + 1)
    out[0] = 1.0
    for i, (p, q) in enumerate(zip(ps, qs)):
        prev = out[: i + 1].copy()
        out[: i + 1] = prev * q
        out[1 : i + 2] += prev * p
    return out


def pmf(e: Ensemble, R: float, eps: float = 1e-12) -> PoissonBinomialPMF:
    """Exact law of the count over the certified window."""
    w, cdf, sf = window_probs(e, float(R), eps)
    probs = convolve_bernoulli(cdf, sf)
    tiny = probs < FLUSH_THRESHOLD
    flushed = float(probs[tiny].sum())
    probs = np.where(tiny, 0.0, probs)
    total = w.eps_total + flushed
    if abs(probs.sum() - 1.0) > 1e-12 + total:
        raise WindowBudgetError("probability mass lost beyond the budget")
    return PoissonBinomialPMF(w.deterministic_count, probs, total, mean_count(e, R))


def exact_tail(e: Ensemble, R: float, y: float, eps: float = 1e-12) -> float:
    """``Pr{Xi_R >= y}`` for the centred count ``Xi_R``."""
    return pmf(e, R, eps).tail(y)


def exact_cdf(e: Ensemble, R: float, y: float, eps: float = 1e-12) -> float:
    return pmf(e, R, eps).cdf(y)


def log_exact_tail(e: Ensemble, R: float, y: float, *, margin: float = 60.0) -> float:
    """``log Pr{Xi_R >= y}`` computed in log space, for deviations far below double range.

    Modes below the certified window are treated as hits; failing one of them
    only lowers the count, so this changes the answer by a relative factor at
    most ``1/prod(lambda_k) ~ 1 + 1e-15``. Above, the window is extended until
    ``log lambda_k`` is ``margin`` nats below its value at the threshold mode,
    which bounds the neglected relative contribution by ``~ e^{-margin}``.
    """
    R = float(R)
    if e.is_hyperbolic or e.alpha != 0 or e.family is not Family.GINIBRE:
        raise NotImplementedError("log-space tails are implemented for the infinite Ginibre ensemble")
    w = window(e, R, 1e-15)
    need = _lattice_ceil(R + y)  # count must reach this
    if need <= w.deterministic_count:
        return 0.0
    k_star = max(need, w.k_hi)
    log_lam_star = math.log(max(special.gammainc(k_star, R), 1e-320))
    k_hi = k_star
    while math.log(max(special.gammainc(k_hi, R), 1e-320)) > log_lam_star - margin:
        k_hi += max(1, int(math.sqrt(R)))
    ks = np.arange(w.k_lo, k_hi + 1)
    lam = special.gammainc(ks, R)
    lsf = special.gammaincc(ks, R)
    with np.errstate(divide="ignore"):
        lp = np.log(lam)
        lq = np.log(lsf)
    logp = np.full(ks.size + 1, -np.inf)
    logp[0] = 0.0
    for i in range(ks.size):
        prev = logp[: i + 1].copy()
        logp[: i + 1] = prev + lq[i]
        logp[1 : i + 2] = np.logaddexp(logp[1 : i + 2], prev + lp[i])
    j = need - w.deterministic_count
    if j >= logp.size:
        return -math.inf
    return float(special.logsumexp(logp[j:]))


# --------------------------------------------------------------------------
# Cumulants

def _bernoulli_reduced_polys(qmax: int = 8) -> list[Polynomial]:
    """``r_q`` with ``kappa_q(p) = p (1-p) r_q(p)`` for ``q >= 2`` (index 0, 1 unused).

    Follows from ``kappa_{q+1} = p(1-p) d/dp kappa_q``:
    ``r_{q+1} = (1 - 2p) r_q + p(1-p) r_q'``.
    """
    p = Polynomial([0.0, 1.0])
    one_m_2p = Polynomial([1.0, -2.0])
    pq = p * (1 - p)
    polys = [Polynomial([0.0]), Polynomial([0.0]), Polynomial([1.0])]
    for _ in range(2, qmax):
        r = polys[-1]
        polys.append(one_m_2p * r + pq * r.deriv())
    return polys


_REDUCED = _bernoulli_reduced_polys(8)


def bernoulli_cumulant(q: int, p, one_minus_p=None):
    """``q``-th cumulant of a Bernoulli(p) variable (``q <= 8``)."""
    if not (1 <= q <= 8):
        raise ValueError("cumulant order must be in 1..8")
    p = np.asarray(p, dtype=float)
    qq = 1.0 - p if one_minus_p is None else np.asarray(one_minus_p, dtype=float)
    if q == 1:
        return p
    return p * qq * _REDUCED[q](p)


def exact_cumulant(e: Ensemble, R: float, q: int, eps: float = 1e-12) -> float:
    """``q``-th cumulant of the centred count ``Xi_R`` (``q = 1`` gives ~0)."""
    w, cdf, sf = window_probs(e, float(R), eps)
    if q == 1:
        return float(w.deterministic_count + cdf.sum() - mean_count(e, R))
    return float(np.sum(bernoulli_cumulant(q, cdf, sf)))


# --------------------------------------------------------------------------
# Entropy

def entropy_fn(beta: float, x, one_minus_x=None):
    """``f_beta``: binary Shannon entropy (``beta = 1``) or Renyi entropy of ``(x, 1-x)``."""
    x = np.asarray(x, dtype=float)
    y = 1.0 - x if one_minus_x is None else np.asarray(one_minus_x, dtype=float)
    if beta <= 0:
        raise ValueError("beta must be positive")
    if beta == 1.0:
        return -special.xlogy(x, x) - special.xlogy(y, y)
    return np.log(x**beta + y**beta) / (1.0 - beta)


def exact_entropy(e: Ensemble, r: float, beta: float, *, tol: float = 1e-9) -> float:
    """``sum_k f_beta(lambda_k(T(r)))`` for a planar ensemble.

    The window is widened until the outermost included terms, which decay
    super-geometrically, certify that the discarded part is below ``tol``.
    """
    if e.is_hyperbolic:
        raise ValueError("entropy is implemented for the planar ensembles")
    if r <= 0:
        raise ValueError("radius must be positive")
    R = unfold(e, r)
    w = window(e, R, 1e-15)
    k_lo, k_hi = w.k_lo, w.k_hi
    N = e.n_modes
    step = max(4, int(math.sqrt(R)))
    while True:
        ks = np.arange(max(k_lo, 1), (k_hi if N is None else min(k_hi, N)) + 1)
        cdf, sf = radii_cdf(e, ks, R)
        f = entropy_fn(beta, cdf, sf)
        if f.size == 0:
            return 0.0
        lo_ok = ks[0] == 1 or _closes(f[:4][::-1], tol)
        hi_ok = (N is not None and ks[-1] >= N) or _closes(f[-4:], tol)
        if lo_ok and hi_ok:
            return float(f.sum())
        if not lo_ok:
            k_lo = max(1, k_lo - step)
        if not hi_ok:
            k_hi += step


def _closes(tail: np.ndarray, tol: float) -> bool:
    """Last entries decreasing with ratio <= 1/2 and a geometric remainder below ``tol``."""
    if tail.size < 2:
        return False
    last, prev = float(tail[-1]), float(tail[-2])
    if last == 0.0:
        return True
    if prev <= 0 or last / prev > 0.5:
        return False
    return last <= 0.5 * tol
