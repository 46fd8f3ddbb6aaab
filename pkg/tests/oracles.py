"""Independent numerical oracles used to freeze expected test values.

Nothing here may call into the package: Bessel functions come from raw power
series / asymptotic expansions, inverses from plain bisection, integrals from
fixed-grid composite Simpson, and the exact accuracy of the simulated noisy
process from its circular-moment Fourier series (scipy's ``ive`` is used
there, which the package never touches for that computation path).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import i0e as _scipy_i0e
from scipy.special import ive as _scipy_ive
from scipy.stats import norm as _norm


def i0_series(x: float, terms: int = 60) -> float:
    """Power series for I0, accurate to machine precision for x < ~15."""
    t = x * x / 4.0
    term = 1.0
    total = 1.0
    for k in range(1, terms):
        term *= t / (k * k)
        total += term
    return total


def i1_series(x: float, terms: int = 60) -> float:
    t = x * x / 4.0
    term = x / 2.0
    total = term
    for k in range(1, terms):
        term *= t / (k * (k + 1))
        total += term
    return total


def _scaled_asymptotic(order: int, x: float, terms: int = 10) -> float:
    """Large-x expansion of exp(-x) I_order(x)."""
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    for k in range(1, terms):
        term *= -(mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total += term
    return total / math.sqrt(2.0 * math.pi * x)


def i0_scaled(x: float) -> float:
    if x < 15.0:
        return i0_series(x) * math.exp(-x)
    return _scaled_asymptotic(0, x)


def i1_scaled(x: float) -> float:
    if x < 15.0:
        return i1_series(x) * math.exp(-x)
    return _scaled_asymptotic(1, x)


def ratio(kappa: float) -> float:
    """A(kappa) = I1/I0 from the series/asymptotic paths above."""
    if kappa == 0.0:
        return 0.0
    return i1_scaled(kappa) / i0_scaled(kappa)


def ratio_inv_bisect(r: float, hi: float = 1e7, iters: int = 200) -> float:
    """Invert A by plain bisection against the series/asymptotic oracle."""
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ratio(mid) < r:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def simpson_fixed(f, a: float, b: float, n: int) -> float:
    """Composite Simpson on a fixed n-interval grid (n even)."""
    x = np.linspace(a, b, n + 1)
    y = f(x)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(w @ y) * (b - a) / n / 3.0


def accuracy_quadrature(kappa: float, j_classes: int, n: int = 1_000_000) -> float:
    """Fine-grid Simpson evaluation of the accuracy integral."""
    a = math.pi / j_classes
    integral = simpson_fixed(lambda x: np.exp(kappa * (np.cos(x) - 1.0)), 0.0, a, n)
    return integral / (math.pi * i0_scaled(kappa))


def error_quadrature(kappa: float, j_classes: int, n: int = 1_000_000) -> float:
    """Fine-grid Simpson evaluation of 1 - accuracy (the complement integral).

    Computing the complement directly keeps full relative precision when the
    error is many orders of magnitude below 1.
    """
    a = math.pi / j_classes
    integral = simpson_fixed(lambda x: np.exp(kappa * (np.cos(x) - 1.0)), a, math.pi, n)
    return integral / (math.pi * i0_scaled(kappa))


def noisy_mixture_accuracy(
    kappa: float, sigma2_eff: float, j_classes: int, terms: int = 600
) -> float:
    """Exact accuracy of the simulated process (vM(kappa) plus wrapped Gaussian).

    The circular moments of the convolution factor exactly:
    ``c_m = (I_m(kappa)/I0(kappa)) * exp(-m^2 sigma2_eff / 2)``, and the mass
    of the decision sector |theta| <= pi/J is the Fourier sum below.
    """
    a = math.pi / j_classes
    total = a / math.pi
    for m in range(1, terms + 1):
        am = float(_scipy_ive(m, kappa) / _scipy_i0e(kappa))
        cm = am * math.exp(-0.5 * m * m * sigma2_eff)
        total += (2.0 / math.pi) * cm * math.sin(m * a) / m
        if abs(cm) < 1e-18:
            break
    return total


def wrapped_gaussian_cdf(x: np.ndarray, sigma2: float, wraps: int = 60) -> np.ndarray:
    """CDF on (-pi, pi] of a zero-mean Gaussian wrapped onto the circle."""
    s = math.sqrt(sigma2)
    total = np.zeros_like(np.asarray(x, dtype=float))
    for k in range(-wraps, wraps + 1):
        total += _norm.cdf((x + 2.0 * np.pi * k) / s) - _norm.cdf(
            (-np.pi + 2.0 * np.pi * k) / s
        )
    return total
