"""Closed-form accuracy model for early-exit inference under quantization.

The chain is: bit-width -> uniform quantization variance -> effective angular
noise at a given traversal depth -> shrunken von Mises concentration -> MAP
accuracy for equally spaced class centroids.  Depth is treated as continuous
throughout so the planner can bisect on it.  Pure functions over immutable
profile/spec values; safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import special

from .circstats import KAPPA_MAX, bessel_ratio, bessel_ratio_inv

__all__ = [
    "FeatureProfile",
    "QuantizerSpec",
    "quant_variance",
    "kappa_bar",
    "grad_energy",
    "kappa_distorted",
    "accuracy_of_kappa",
    "accuracy_model",
    "accuracy_erf_approx",
    "error_scaling",
    "min_depth_for_accuracy",
]

# Above this concentration the erf ratio is exact to well below the quadrature
# tolerance, so the integrator hands over to it.
_ERF_SWITCH = 1.0e4
_QUAD_REL_TOL = 1e-9
_QUAD_MAX_NODES = 2**20
_DEPTH_TOL = 1e-6


@dataclass(frozen=True)
class FeatureProfile:
    """Per-depth statistics of the angular features.

    ``kappa_bar(ell) = c1 ell + c2`` is the undistorted concentration and
    ``grad_energy(ell) = c3 exp(-c4 ell)`` the noise amplification at depth
    ``ell``.  Class centroids are derived, not stored: class ``j`` sits at
    ``-pi + (2j - 1) pi / J``, equally spaced for uniform priors.  ``c4 = 0``
    is admitted as the degenerate flat noise profile.
    """

    j_classes: int
    c1: float
    c2: float
    c3: float
    c4: float
    n_layers: int

    def __post_init__(self) -> None:
        if int(self.j_classes) != self.j_classes or self.j_classes < 2:
            raise ValueError(f"j_classes must be an integer >= 2, got {self.j_classes!r}")
        if int(self.n_layers) != self.n_layers or self.n_layers < 1:
            raise ValueError(f"n_layers must be an integer >= 1, got {self.n_layers!r}")
        for name in ("c1", "c2", "c3", "c4"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.c1 <= 0.0:
            raise ValueError(f"c1 must be > 0, got {self.c1!r}")
        if self.c1 * 1.0 + self.c2 <= 0.0:
            raise ValueError("c1 + c2 must be > 0 so concentration stays positive")
        if self.c3 <= 0.0:
            raise ValueError(f"c3 must be > 0, got {self.c3!r}")
        if self.c4 < 0.0:
            raise ValueError(f"c4 must be >= 0, got {self.c4!r}")
        object.__setattr__(self, "j_classes", int(self.j_classes))
        object.__setattr__(self, "n_layers", int(self.n_layers))

    @property
    def centroids(self) -> np.ndarray:
        """Class centroids on (-pi, pi], index j at -pi + (2j-1) pi / J."""
        j = np.arange(1, self.j_classes + 1, dtype=float)
        return -np.pi + (2.0 * j - 1.0) * np.pi / self.j_classes


@dataclass(frozen=True)
class QuantizerSpec:
    """Uniform quantizer range plus the admissible bit-width alphabet.

    Leaving ``bit_alphabet`` as ``None`` selects the full range
    ``{0, 1, ..., q_max}``; an explicitly empty alphabet is rejected.
    """

    c_min: float
    c_max: float
    q_max: int = 32
    bit_alphabet: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c_min) and math.isfinite(self.c_max)):
            raise ValueError("quantization range bounds must be finite")
        if not self.c_max > self.c_min:
            raise ValueError(f"c_max must exceed c_min, got [{self.c_min!r}, {self.c_max!r}]")
        if int(self.q_max) != self.q_max or self.q_max < 0:
            raise ValueError(f"q_max must be a nonnegative integer, got {self.q_max!r}")
        object.__setattr__(self, "q_max", int(self.q_max))
        if self.bit_alphabet is None:
            alphabet = tuple(range(self.q_max + 1))
        else:
            raw = tuple(self.bit_alphabet)
            if not raw:
                raise ValueError("bit_alphabet must be nonempty")
            if any(int(b) != b for b in raw):
                raise ValueError("bit_alphabet entries must be integers")
            alphabet = tuple(int(b) for b in raw)
        if list(alphabet) != sorted(set(alphabet)):
            raise ValueError("bit_alphabet must be strictly increasing")
        if alphabet[0] < 0 or alphabet[-1] > self.q_max:
            raise ValueError(f"bit_alphabet must lie within [0, {self.q_max}]")
        object.__setattr__(self, "bit_alphabet", alphabet)

    @property
    def quant_range(self) -> float:
        return self.c_max - self.c_min


def quant_variance(q: float, spec: QuantizerSpec) -> float:
    """Element-wise quantization distortion variance for (fractional) bit-width q.

    An average bit-width ``q = q0 + (1 - alpha)`` stands for quantizing an
    ``alpha`` fraction of the features at ``q0`` bits and the rest at
    ``q0 + 1``, giving variance ``(1 + 3 alpha)/4 * range^2 / (12 * 4^q0)``.
    At integer q this reduces exactly to ``range^2 / (12 * 4^q)``.
    """
    q = float(q)
    if not math.isfinite(q) or q < 0.0:
        raise ValueError(f"q must be a finite nonnegative real, got {q!r}")
    q0 = int(math.floor(q))
    alpha = 1.0 - (q - q0)
    # exact power-of-two scaling; underflows to 0 instead of overflowing for
    # the huge bit-widths the continuous relaxation can produce
    base = math.ldexp(spec.quant_range**2 / 12.0, -2 * min(q0, 2048))
    return (1.0 + 3.0 * alpha) / 4.0 * base


def _check_depth(ell: float, profile: FeatureProfile) -> float:
    ell = float(ell)
    if not math.isfinite(ell) or ell < 1.0 or ell > profile.n_layers:
        raise ValueError(f"depth must lie in [1, {profile.n_layers}], got {ell!r}")
    return ell


def kappa_bar(ell: float, profile: FeatureProfile) -> float:
    """Undistorted concentration at depth ell: ``c1 ell + c2``."""
    ell = _check_depth(ell, profile)
    return profile.c1 * ell + profile.c2


def grad_energy(ell: float, profile: FeatureProfile) -> float:
    """Angular noise amplification at depth ell: ``c3 exp(-c4 ell)``."""
    ell = _check_depth(ell, profile)
    return profile.c3 * math.exp(-profile.c4 * ell)


def kappa_distorted(sigma2: float, ell: float, profile: FeatureProfile) -> float:
    """Concentration after quantization noise of variance sigma2 propagates to depth ell.

    The distorted resultant is the product of the clean resultant and the
    circular first moment ``exp(-sigma2 * grad_energy(ell) / 2)`` of the
    induced angular noise; inverting the resultant map returns the shrunken
    concentration.  Never exceeds ``kappa_bar(ell)``, and equals it exactly
    when the effective noise vanishes.
    """
    sigma2 = float(sigma2)
    if not math.isfinite(sigma2) or sigma2 < 0.0:
        raise ValueError(f"sigma2 must be a finite nonnegative real, got {sigma2!r}")
    kbar = kappa_bar(ell, profile)
    shrink = math.exp(-0.5 * sigma2 * grad_energy(ell, profile))
    if shrink >= 1.0:
        return kbar
    r = bessel_ratio(min(kbar, KAPPA_MAX)) * shrink
    return min(bessel_ratio_inv(r).value, kbar)


def _simpson(values: np.ndarray, h: float) -> float:
    weights = np.ones_like(values)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return float(weights @ values) * h / 3.0


def accuracy_of_kappa(kappa: float, j_classes: int) -> float:
    """MAP accuracy for J equally spaced classes at shared concentration kappa.

    Evaluates ``int_0^{pi/J} exp(kappa cos x) / (pi I0(kappa)) dx`` with the
    scaled integrand and composite Simpson refinement until the relative
    change drops below 1e-9 (node cap 2^20).  For kappa above 1e4 the erf
    ratio is used instead; its error there is below the quadrature tolerance.
    """
    kappa = float(kappa)
    if not math.isfinite(kappa) or kappa < 0.0:
        raise ValueError(f"kappa must be a finite nonnegative real, got {kappa!r}")
    j_classes = int(j_classes)
    if j_classes < 2:
        raise ValueError(f"j_classes must be >= 2, got {j_classes}")
    if kappa > _ERF_SWITCH:
        return accuracy_erf_approx(kappa, j_classes)

    a = np.pi / j_classes
    norm = np.pi * float(special.i0e(kappa))
    n = 16
    prev = None
    while True:
        x = np.linspace(0.0, a, n + 1)
        integral = _simpson(np.exp(kappa * (np.cos(x) - 1.0)), a / n)
        value = integral / norm
        if prev is not None and abs(value - prev) <= _QUAD_REL_TOL * abs(value):
            break
        if n >= _QUAD_MAX_NODES:
            break
        prev = value
        n *= 2
    return min(value, 1.0)


def accuracy_model(
    q: float, ell: float, profile: FeatureProfile, spec: QuantizerSpec
) -> float:
    """End-to-end accuracy at bit-width q and traversal depth ell."""
    sigma2 = quant_variance(q, spec)
    return accuracy_of_kappa(kappa_distorted(sigma2, ell, profile), profile.j_classes)


def accuracy_erf_approx(kappa: float, j_classes: int) -> float:
    """Gaussian-limit accuracy ``erf((pi/J) sqrt(k/2)) / erf(pi sqrt(k/2))``."""
    kappa = float(kappa)
    if not math.isfinite(kappa) or kappa <= 0.0:
        raise ValueError(f"kappa must be a finite positive real, got {kappa!r}")
    j_classes = int(j_classes)
    if j_classes < 2:
        raise ValueError(f"j_classes must be >= 2, got {j_classes}")
    root = math.sqrt(0.5 * kappa)
    return math.erf(math.pi / j_classes * root) / math.erf(math.pi * root)


def error_scaling(ell: float, profile: FeatureProfile) -> float:
    """Large-depth error law for the distortion-free regime.

    ``sqrt(2) J / (pi^{3/2} sqrt(kbar)) * exp(-pi^2 kbar / (2 J^2))`` with
    ``kbar = c1 ell + c2``; an intermediate-regime approximation of ``1 - P``.
    """
    kbar = kappa_bar(ell, profile)
    j = profile.j_classes
    prefactor = math.sqrt(2.0) * j / (math.pi**1.5 * math.sqrt(kbar))
    return prefactor * math.exp(-(math.pi**2) / (2.0 * j * j) * kbar)


def min_depth_for_accuracy(
    sigma2: float, p0: float, profile: FeatureProfile
) -> Optional[float]:
    """Smallest continuous depth reaching accuracy p0 at quantization variance sigma2.

    Bisection over [1, n_layers] exploiting monotonicity of accuracy in depth,
    to absolute depth tolerance 1e-6.  Returns ``None`` when even the full
    depth misses p0 -- infeasibility is a value the planner must handle, not
    an error.
    """
    p0 = float(p0)
    if not (1.0 / profile.j_classes < p0 < 1.0):
        raise ValueError(
            f"p0 must lie in (1/{profile.j_classes}, 1) exclusive, got {p0!r}"
        )

    def acc(ell: float) -> float:
        return accuracy_of_kappa(kappa_distorted(sigma2, ell, profile), profile.j_classes)

    if acc(1.0) >= p0:
        return 1.0
    top = float(profile.n_layers)
    if acc(top) < p0:
        return None
    lo, hi = 1.0, top
    while hi - lo > _DEPTH_TOL:
        mid = 0.5 * (lo + hi)
        if acc(mid) >= p0:
            hi = mid
        else:
            lo = mid
    return hi
