"""Seeded simulation of counting statistics.

Counts never need the radii themselves: mode ``k`` contributes the indicator
``1{U_k <= lambda_k(R)}`` for a uniform ``U_k``, and reusing the same ``U_k``
across several radii yields the joint law of the counts in nested disks.

Random streams are derived per chunk of ``CHUNK_SIZE`` samples from
``(seed, stream, chunk_index)``, so a run produces the same samples whatever
the number of workers it is split across.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .ensembles import Ensemble, radii_cdf
from .exactdist import PoissonBinomialPMF, TruncationWindow, mean_count, window

CHUNK_SIZE = 10_000
RARE_EVENTS = 50


@dataclass(frozen=True)
class RngSpec:
    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if int(v) != v or not (0 <= v < 2**64):
                raise ValueError(f"{name} must be a 64-bit unsigned integer")

    def chunk_generator(self, chunk_index: int) -> np.random.Generator:
        ss = np.random.SeedSequence([int(self.seed), int(self.stream), int(chunk_index)])
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class McEstimate:
    point: float
    stderr: float
    n_samples: int
    ci95: tuple[float, float]
    rare: bool = False

    @property
    def note(self) -> str:
        return "use exact_tail" if self.rare else ""


def _chunks(n: int) -> list[tuple[int, int]]:
    return [(i, min(CHUNK_SIZE, n - i * CHUNK_SIZE)) for i in range(math.ceil(n / CHUNK_SIZE))]


def _run_chunked(n: int, rng: RngSpec, fn: Callable[[np.random.Generator, int], np.ndarray], workers: int) -> np.ndarray:
    jobs = _chunks(n)
    if workers <= 1 or len(jobs) <= 1:
        parts = [fn(rng.chunk_generator(i), m) for i, m in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda job: fn(rng.chunk_generator(job[0]), job[1]), jobs))
    return np.concatenate(parts, axis=0) if parts else np.zeros(0, dtype=np.int64)


# --------------------------------------------------------------------------
# Samplers

def sample_count(
    e: Ensemble,
    R: float,
    n_samples: int,
    rng: RngSpec,
    w: TruncationWindow | None = None,
    *,
    eps: float = 1e-12,
    workers: int = 1,
) -> np.ndarray:
    """``n_samples`` independent counts of points in the disk of unfolded radius ``R``."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    w = window(e, float(R), eps) if w is None else w
    lam, _ = radii_cdf(e, w.modes, R) if w.size else (np.zeros(0), None)

    def draw(gen: np.random.Generator, m: int) -> np.ndarray:
        u = gen.random((m, lam.size))
        return w.deterministic_count + (u <= lam).sum(axis=1)

    return _run_chunked(n_samples, rng, draw, workers).astype(np.int64)


def joint_window(e: Ensemble, radii: Sequence[float], eps: float = 1e-12) -> TruncationWindow:
    """Window certified simultaneously at the smallest and largest radius."""
    lo = window(e, float(radii[0]), eps)
    hi = window(e, float(radii[-1]), eps)
    k_lo = min(lo.k_lo, hi.k_lo)
    k_hi = max(lo.k_hi, hi.k_hi)
    return TruncationWindow(k_lo, k_hi, k_lo - 1, lo.eps_total + hi.eps_total)


def sample_path(
    e: Ensemble,
    radii: Sequence[float],
    n_samples: int,
    rng: RngSpec,
    w: TruncationWindow | None = None,
    *,
    eps: float = 1e-12,
    workers: int = 1,
) -> np.ndarray:
    """Counts in nested disks: array of shape ``(n_samples, len(radii))``, non-decreasing along rows."""
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    w = joint_window(e, radii, eps) if w is None else w
    lam = np.stack([radii_cdf(e, w.modes, R)[0] for R in radii]) if w.size else np.zeros((len(radii), 0))

    def draw(gen: np.random.Generator, m: int) -> np.ndarray:
        u = gen.random((m, w.size))
        out = np.empty((m, len(radii)), dtype=np.int64)
        for i in range(len(radii)):
            out[:, i] = w.deterministic_count + (u <= lam[i]).sum(axis=1)
        return out

    return _run_chunked(n_samples, rng, draw, workers)


# --------------------------------------------------------------------------
# Estimators

def wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("n must be positive")
    p = successes / n
    den = 1.0 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


def estimate_tail(e: Ensemble, R: float, y: float, n_samples: int, rng: RngSpec, **kw) -> McEstimate:
    """Monte Carlo estimate of ``Pr{Xi_R >= y}`` with a Wilson 95% interval."""
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    if y == -math.inf:
        return McEstimate(1.0, 0.0, n_samples, (1.0, 1.0))
    counts = sample_count(e, R, n_samples, rng, **kw)
    return tail_from_counts(counts, mean_count(e, R), y)


def tail_from_counts(counts: np.ndarray, center: float, y: float) -> McEstimate:
    n = counts.size
    if y == -math.inf:
        return McEstimate(1.0, 0.0, n, (1.0, 1.0))
    hits = int(np.count_nonzero(counts - center >= y - 1e-9 * max(1.0, abs(center + y))))
    p = hits / n
    lo, hi = wilson_interval(hits, n)
    return McEstimate(p, math.sqrt(p * (1 - p) / n), n, (min(lo, p), max(hi, p)), rare=p < RARE_EVENTS / n)


def mean_estimate(x: np.ndarray) -> McEstimate:
    x = np.asarray(x, dtype=float)
    n = x.size
    m = float(x.mean())
    se = float(x.std(ddof=1)) / math.sqrt(n)
    return McEstimate(m, se, n, (m - 1.96 * se, m + 1.96 * se))


def variance_estimate(x: np.ndarray) -> McEstimate:
    """Sample variance with the delta-method standard error ``sqrt((m4 - s^4)/n)``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    d = x - x.mean()
    s2 = float(np.dot(d, d) / (n - 1))
    m4 = float(np.mean(d**4))
    se = math.sqrt(max(m4 - s2 * s2, 0.0) / n)
    return McEstimate(s2, se, n, (s2 - 1.96 * se, s2 + 1.96 * se))


def covariance_estimate(x: np.ndarray, y: np.ndarray) -> McEstimate:
    """Sample covariance with standard error from the spread of centred products."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    prod = (x - x.mean()) * (y - y.mean())
    c = float(prod.sum() / (n - 1))
    se = float(prod.std(ddof=1)) / math.sqrt(n)
    return McEstimate(c, se, n, (c - 1.96 * se, c + 1.96 * se))


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float


def chi_square_vs_pmf(counts: np.ndarray, law: PoissonBinomialPMF, min_expected: float = 5.0) -> ChiSquareResult:
    """Pearson goodness of fit of integer ``counts`` against an exact law.

    Adjacent support points are pooled (from both ends inwards) until every
    cell expects at least ``min_expected`` observations.
    """
    counts = np.asarray(counts, dtype=np.int64)
    n = counts.size
    idx = counts - law.offset
    if np.any(idx < 0) or np.any(idx >= law.probs.size):
        # an observation outside the window: the window budget was violated
        return ChiSquareResult(math.inf, 0, 0.0)
    observed = np.bincount(idx, minlength=law.probs.size).astype(float)
    expected = law.probs * n
    cells_o, cells_e = [], []
    acc_o = acc_e = 0.0
    for o, ex in zip(observed, expected):
        acc_o += o
        acc_e += ex
        if acc_e >= min_expected:
            cells_o.append(acc_o)
            cells_e.append(acc_e)
            acc_o = acc_e = 0.0
    if cells_e:
        cells_o[-1] += acc_o
        cells_e[-1] += acc_e
    o = np.array(cells_o)
    ex = np.array(cells_e)
    stat = float(np.sum((o - ex) ** 2 / ex))
    dof = max(len(o) - 1, 1)
    return ChiSquareResult(stat, dof, float(stats.chi2.sf(stat, dof)))
