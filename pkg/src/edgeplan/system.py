"""Link and compute latency model plus the edge processing rate (EPR).

Units are SI throughout: Hz, seconds, bits.  SNR is stored linear; use
:func:`snr_db_to_linear` when ingesting dB values.  Pure functions; safe for
concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .accuracy import QuantizerSpec

__all__ = [
    "LinkState",
    "ComputeProfile",
    "snr_db_to_linear",
    "snr_linear_to_db",
    "shannon_rate",
    "comm_latency",
    "comp_latency",
    "epr",
    "max_bitwidth_continuous",
    "max_bitwidth_discrete",
]


def snr_db_to_linear(snr_db: float) -> float:
    return 10.0 ** (float(snr_db) / 10.0)


def snr_linear_to_db(snr: float) -> float:
    return 10.0 * math.log10(float(snr))


@dataclass(frozen=True)
class LinkState:
    """Channel and transmission budget for one feature vector.

    bandwidth_hz: channel bandwidth B.
    snr: linear receive SNR.
    t_max_s: maximal air latency for the feature upload.
    d: number of scalar features per vector.
    """

    bandwidth_hz: float
    snr: float
    t_max_s: float
    d: int

    def __post_init__(self) -> None:
        for name in ("bandwidth_hz", "snr", "t_max_s"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))


@dataclass(frozen=True)
class ComputeProfile:
    """Affine inference-time model: ``t = b1 * depth + b2`` seconds.

    ``b1`` is the per-layer server time and ``b2`` the fixed device-side
    time.  :meth:`from_flops` derives both from FLOP counts and speeds.
    """

    b1: float
    b2: float

    def __post_init__(self) -> None:
        for name in ("b1", "b2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be nonnegative and finite, got {value!r}")

    @classmethod
    def from_flops(
        cls,
        device_flops: float,
        per_layer_flops: float,
        device_flops_per_s: float,
        server_flops_per_s: float,
    ) -> "ComputeProfile":
        if device_flops_per_s <= 0.0 or server_flops_per_s <= 0.0:
            raise ValueError("computation speeds must be positive")
        if device_flops < 0.0 or per_layer_flops < 0.0:
            raise ValueError("FLOP counts must be nonnegative")
        return cls(
            b1=per_layer_flops / server_flops_per_s,
            b2=device_flops / device_flops_per_s,
        )


def shannon_rate(link: LinkState) -> float:
    """Channel rate ``B log2(1 + snr)`` in bits/second."""
    return link.bandwidth_hz * math.log2(1.0 + link.snr)


def comm_latency(q: float, link: LinkState) -> float:
    """Time to upload d features at q bits each: ``d q / (B log2(1+snr))``."""
    q = float(q)
    if not math.isfinite(q) or q < 0.0:
        raise ValueError(f"q must be a finite nonnegative real, got {q!r}")
    return link.d * q / shannon_rate(link)


def comp_latency(ell: float, comp: ComputeProfile) -> float:
    """Inference time through depth ell: ``b1 ell + b2``."""
    ell = float(ell)
    if not math.isfinite(ell) or ell < 1.0:
        raise ValueError(f"depth must be >= 1, got {ell!r}")
    return comp.b1 * ell + comp.b2


def epr(q: float, ell: float, link: LinkState, comp: ComputeProfile) -> float:
    """Edge processing rate: payload bits over end-to-end latency.

    ``d q / (t_comm + t_comp)`` in bits/second; zero when nothing is
    transmitted.  Strictly below the channel rate whenever compute time is
    positive, and approaches it as compute time vanishes.
    """
    q = float(q)
    if not math.isfinite(q) or q < 0.0:
        raise ValueError(f"q must be a finite nonnegative real, got {q!r}")
    if q == 0.0:
        return 0.0
    return link.d * q / (comm_latency(q, link) + comp_latency(ell, comp))


def max_bitwidth_continuous(link: LinkState) -> float:
    """Largest (real) bit-width whose upload still fits the air-latency budget."""
    return link.t_max_s * shannon_rate(link) / link.d


def max_bitwidth_discrete(link: LinkState, spec: QuantizerSpec) -> int:
    """Largest alphabet bit-width within the air-latency budget.

    Falls back to 0 ("nothing transmitted this block") when even the smallest
    positive alphabet entry exceeds the budget.
    """
    if not spec.bit_alphabet:
        raise ValueError("bit alphabet must be nonempty")
    ceiling = max_bitwidth_continuous(link)
    feasible = [b for b in spec.bit_alphabet if b <= ceiling]
    if not feasible:
        return 0
    return max(feasible)
