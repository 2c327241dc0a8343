"""Special functions and quadrature shared by the rest of the package.

Hermite and Laguerre functions are evaluated by three-term recurrences on
orthonormalized polynomials. Incomplete gamma/beta, scaled Bessel functions
and the adaptive quadrature engine are thin wrappers over ``scipy.special``
and ``scipy.integrate.quad`` with the argument handling this package needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

SQRT_2PI = math.sqrt(2.0 * math.pi)
HERMITE_MAX_DEGREE = 60


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, best: "QuadratureResult"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    subdivisions: int
    converged: bool = True


def quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    *,
    rel_tol: float = 1e-12,
    points=None,
    limit: int = 400,
    strict: bool = True,
) -> QuadratureResult:
    """Adaptive Gauss-Kronrod integration of ``f`` over ``[a, b]``.

    Infinite endpoints are accepted. QUADPACK maps a semi-infinite range onto
    (0, 1] with ``x = a + (1 - t)/t`` (mirrored for ``-inf``), and a doubly
    infinite range is split at zero. ``points`` lists interior break points
    for finite ranges.

    Raises :class:`QuadratureError` carrying the best estimate when the
    error estimate exceeds ``max(tol, rel_tol*|value|)`` and ``strict`` is set.
    """
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    kwargs = dict(epsabs=tol, epsrel=rel_tol, limit=limit, full_output=1)
    if points is not None and math.isfinite(a) and math.isfinite(b):
        pts = sorted(p for p in points if a < p < b)
        if pts:
            kwargs["points"] = pts
    out = integrate.quad(f, a, b, **kwargs)
    value, err, info = out[0], out[1], out[2]
    nsub = int(info.get("last", 0))
    ok = len(out) == 3 or err <= max(tol, rel_tol * abs(value))
    res = QuadratureResult(sign * value, abs(err), nsub, ok)
    if not ok and strict:
        raise QuadratureError(f"quadrature did not converge on [{a}, {b}]: err={err:.3g}", res)
    return res


# --------------------------------------------------------------------------
# Hermite functions

def _check_hermite_degree(alpha: int) -> None:
    if not (0 <= int(alpha) <= HERMITE_MAX_DEGREE) or int(alpha) != alpha:
        raise ValueError(f"Hermite degree must be an integer in [0, {HERMITE_MAX_DEGREE}], got {alpha}")


def _clip_far(x):
    # beyond |x| = 1e4 every Hermite function underflows to 0; clipping keeps
    # infinite arguments from producing inf * 0
    return np.clip(np.asarray(x, dtype=float), -1e4, 1e4)


def hermite_functions(alpha: int, x):
    """Return ``[h_0(x), ..., h_alpha(x)]`` stacked along axis 0.

    ``h_n(x) = H_n(x) exp(-x^2/4) (2 pi)^{-1/4}`` with ``H_n`` orthonormal for
    the standard Gaussian weight, so that ``h_n^2`` is a probability density.
    """
    _check_hermite_degree(alpha)
    x = _clip_far(x)
    out = np.empty((alpha + 1,) + x.shape)
    out[0] = np.exp(-0.25 * x * x) / SQRT_2PI**0.5
    if alpha >= 1:
        out[1] = x * out[0]
    for n in range(1, alpha):
        out[n + 1] = (x * out[n] - math.sqrt(n) * out[n - 1]) / math.sqrt(n + 1)
    return out


def hermite_sq(alpha: int, x, deriv: int = 0):
    """Density ``h_alpha(x)^2`` of the harmonic-oscillator variable Z_alpha.

    ``deriv`` in {0, 1, 2, 3} selects an analytic x-derivative. With
    ``u = H_alpha^2`` and ``phi`` the Gaussian density these are polynomial
    combinations of neighbouring Hermite functions (using ``H_n' = sqrt(n) H_{n-1}``).
    """
    if deriv not in (0, 1, 2, 3):
        raise ValueError("deriv must be 0, 1, 2 or 3")
    a = int(alpha)
    h = hermite_functions(a, x)
    x = _clip_far(x)

    def hh(i, j):
        # h_{a-i} * h_{a-j}, zero when an index drops below 0
        if a - i < 0 or a - j < 0:
            return np.zeros_like(x)
        return h[a - i] * h[a - j]

    u0 = hh(0, 0)
    if deriv == 0:
        return u0
    u1 = 2.0 * math.sqrt(a) * hh(1, 0)
    if deriv == 1:
        return u1 - x * u0
    u2 = 2.0 * math.sqrt(a) * (math.sqrt(max(a - 1, 0)) * hh(2, 0) + math.sqrt(a) * hh(1, 1))
    if deriv == 2:
        return u2 - 2.0 * x * u1 + (x * x - 1.0) * u0
    u3 = (
        2.0
        * math.sqrt(a)
        * math.sqrt(max(a - 1, 0))
        * (math.sqrt(max(a - 2, 0)) * hh(3, 0) + 3.0 * math.sqrt(a) * hh(2, 1))
    )
    return u3 - 3.0 * x * u2 + 3.0 * (x * x - 1.0) * u1 - (x**3 - 3.0 * x) * u0


def hermite_tail(alpha: int, x):
    """``Pr{Z_alpha > x}``, the integral of ``h_alpha^2`` over ``[x, inf)``.

    Uses the telescoping identity
    ``int_x^inf h_n^2 = int_x^inf h_{n-1}^2 + h_{n-1}(x) h_n(x) / sqrt(n)``.
    """
    _check_hermite_degree(alpha)
    x = np.asarray(x, dtype=float)
    h = hermite_functions(alpha, x)
    acc = 0.5 * special.erfc(x / math.sqrt(2.0))
    for n in range(1, alpha + 1):
        acc = acc + h[n - 1] * h[n] / math.sqrt(n)
    return acc


def hermite_cdf(alpha: int, x):
    """``Pr{Z_alpha <= x}``, accurate in the left tail (Z_alpha is symmetric)."""
    return hermite_tail(alpha, -np.asarray(x, dtype=float))


# --------------------------------------------------------------------------
# Laguerre polynomials

def laguerre_classical(alpha: int, beta: float, x):
    """Classical generalized Laguerre polynomial by its three-term recurrence."""
    x = np.asarray(x, dtype=float)
    l_prev = np.ones_like(x)
    if alpha == 0:
        return l_prev
    l_cur = 1.0 + beta - x
    for n in range(1, alpha):
        l_prev, l_cur = l_cur, ((2 * n + 1 + beta - x) * l_cur - (n + beta) * l_prev) / (n + 1)
    return l_cur


def laguerre_log_norm(alpha: int, beta: float) -> float:
    """``log`` of the factor turning the classical polynomial into the orthonormal one."""
    return 0.5 * (math.lgamma(alpha + 1) - math.lgamma(alpha + beta + 1))


def laguerre_eval(alpha: int, beta: float, x):
    """Orthonormal generalized Laguerre ``L_alpha^{(beta)}(x)``.

    Normalized so that ``int_0^inf L^2 x^beta e^{-x} dx = 1``; requires
    ``alpha + beta + 1 > 0`` (that is ``beta >= -alpha`` for integer ``beta``).
    """
    if alpha < 0 or int(alpha) != alpha:
        raise ValueError("Laguerre degree must be a non-negative integer")
    if alpha + beta + 1 <= 0:
        raise ValueError("need alpha + beta + 1 > 0 for a normalizable Laguerre polynomial")
    return laguerre_classical(int(alpha), beta, x) * math.exp(laguerre_log_norm(alpha, beta))


# --------------------------------------------------------------------------
# Incomplete gamma / beta and scaled Bessel

def reg_inc_gamma(k, R):
    """Lower regularized incomplete gamma ``P(k, R) = Pr{Gamma(k, 1) <= R}``."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise ValueError("shape k must be positive")
    R = np.maximum(np.asarray(R, dtype=float), 0.0)
    return special.gammainc(k, R)


def reg_inc_gamma_upper(k, R):
    """Upper regularized incomplete gamma ``Q(k, R) = 1 - P(k, R)``, accurate when small."""
    k = np.asarray(k, dtype=float)
    R = np.maximum(np.asarray(R, dtype=float), 0.0)
    return special.gammaincc(k, R)


def reg_inc_beta(a, b, u):
    """Regularized incomplete beta ``I_u(a, b)``, with ``u`` clipped to ``[0, 1]``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("beta parameters must be positive")
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return special.betainc(a, b, u)


def reg_inc_beta_upper(a, b, u):
    """``1 - I_u(a, b)`` computed without cancellation."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return special.betaincc(a, b, u)


def bessel_I_scaled(nu: int, x):
    """``exp(-x) I_nu(x)`` for ``nu`` in {0, 1} and ``x >= 0``."""
    if nu not in (0, 1):
        raise ValueError("only nu = 0 and nu = 1 are supported")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be non-negative")
    return special.ive(nu, x)


def gauss_tail(x):
    """Standard Gaussian tail ``Pr{N(0,1) >= x}``."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def gauss_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / SQRT_2PI
