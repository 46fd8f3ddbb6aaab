"""Run configuration: JSON schema, loading, and validation.

Every invariant violation is reported as a :class:`ConfigError` whose message
starts with the exact field path (``link.bandwidth_hz: ...``), so a bad
config is diagnosable without reading this module.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List

from .accuracy import FeatureProfile, QuantizerSpec
from .optimizer import ExitSet
from .system import ComputeProfile, LinkState, snr_db_to_linear

__all__ = ["ConfigError", "MonteCarloConfig", "RunConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class MonteCarloConfig:
    n_per_class: int = 20000
    tasks: int = 2000

    def __post_init__(self) -> None:
        if int(self.n_per_class) != self.n_per_class or self.n_per_class < 1:
            raise ValueError("n_per_class must be a positive integer")
        if int(self.tasks) != self.tasks or self.tasks < 1:
            raise ValueError("tasks must be a positive integer")
        object.__setattr__(self, "n_per_class", int(self.n_per_class))
        object.__setattr__(self, "tasks", int(self.tasks))


@dataclass(frozen=True)
class RunConfig:
    link: LinkState
    compute: ComputeProfile
    profile: FeatureProfile
    quantizer: QuantizerSpec
    exits: ExitSet
    target_accuracy: float
    seed: int
    monte_carlo: MonteCarloConfig


def _expect_mapping(raw: Any, path: str) -> Dict[str, Any]:
    if not isinstance(raw, dict):
        raise ConfigError(path, f"expected an object, got {type(raw).__name__}")
    return raw


def _reject_unknown(raw: Dict[str, Any], path: str, known: List[str]) -> None:
    for key in raw:
        if key not in known:
            where = f"{path}.{key}" if path else key
            raise ConfigError(where, "unknown field")


def _get(raw: Dict[str, Any], path: str, key: str) -> Any:
    if key not in raw:
        where = f"{path}.{key}" if path else key
        raise ConfigError(where, "required field is missing")
    return raw[key]


def _number(raw: Dict[str, Any], path: str, key: str) -> float:
    value = _get(raw, path, key)
    where = f"{path}.{key}" if path else key
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(where, f"must be finite, got {value!r}")
    return float(value)


def _positive(raw: Dict[str, Any], path: str, key: str) -> float:
    value = _number(raw, path, key)
    if value <= 0.0:
        raise ConfigError(f"{path}.{key}" if path else key, f"must be > 0, got {value!r}")
    return value


def _nonneg(raw: Dict[str, Any], path: str, key: str) -> float:
    value = _number(raw, path, key)
    if value < 0.0:
        raise ConfigError(f"{path}.{key}" if path else key, f"must be >= 0, got {value!r}")
    return value


def _integer(raw: Dict[str, Any], path: str, key: str, minimum: int) -> int:
    value = _get(raw, path, key)
    where = f"{path}.{key}" if path else key
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(where, f"must be >= {minimum}, got {value}")
    return value


def _parse_link(raw: Any) -> LinkState:
    raw = _expect_mapping(raw, "link")
    _reject_unknown(raw, "link", ["bandwidth_hz", "snr_db", "snr_linear", "t_max_s", "d"])
    has_db = "snr_db" in raw
    has_linear = "snr_linear" in raw
    if has_db == has_linear:
        raise ConfigError("link", "provide exactly one of snr_db or snr_linear")
    if has_db:
        snr = snr_db_to_linear(_number(raw, "link", "snr_db"))
    else:
        snr = _positive(raw, "link", "snr_linear")
    return LinkState(
        bandwidth_hz=_positive(raw, "link", "bandwidth_hz"),
        snr=snr,
        t_max_s=_positive(raw, "link", "t_max_s"),
        d=_integer(raw, "link", "d", minimum=1),
    )


_FLOPS_KEYS = ["device_flops", "per_layer_flops", "device_flops_per_s", "server_flops_per_s"]


def _parse_compute(raw: Any) -> ComputeProfile:
    raw = _expect_mapping(raw, "compute")
    _reject_unknown(raw, "compute", ["b1_s", "b2_s"] + _FLOPS_KEYS)
    affine = "b1_s" in raw or "b2_s" in raw
    flops = any(key in raw for key in _FLOPS_KEYS)
    if affine and flops:
        raise ConfigError("compute", "provide either b1_s/b2_s or the FLOPs block, not both")
    if affine:
        return ComputeProfile(
            b1=_nonneg(raw, "compute", "b1_s"),
            b2=_nonneg(raw, "compute", "b2_s"),
        )
    if flops:
        return ComputeProfile.from_flops(
            device_flops=_nonneg(raw, "compute", "device_flops"),
            per_layer_flops=_nonneg(raw, "compute", "per_layer_flops"),
            device_flops_per_s=_positive(raw, "compute", "device_flops_per_s"),
            server_flops_per_s=_positive(raw, "compute", "server_flops_per_s"),
        )
    raise ConfigError("compute", "provide either b1_s/b2_s or the FLOPs block")


def _parse_profile(raw: Any) -> FeatureProfile:
    raw = _expect_mapping(raw, "feature_profile")
    _reject_unknown(raw, "feature_profile", ["J", "c1", "c2", "c3", "c4", "L"])
    j = _integer(raw, "feature_profile", "J", minimum=2)
    n_layers = _integer(raw, "feature_profile", "L", minimum=1)
    c1 = _positive(raw, "feature_profile", "c1")
    c2 = _number(raw, "feature_profile", "c2")
    c3 = _positive(raw, "feature_profile", "c3")
    c4 = _nonneg(raw, "feature_profile", "c4")
    if c1 + c2 <= 0.0:
        raise ConfigError("feature_profile.c2", "c1 + c2 must be > 0 at the first layer")
    return FeatureProfile(j_classes=j, c1=c1, c2=c2, c3=c3, c4=c4, n_layers=n_layers)


def _parse_quantizer(raw: Any) -> QuantizerSpec:
    raw = _expect_mapping(raw, "quantizer")
    _reject_unknown(raw, "quantizer", ["c_min", "c_max", "q_max", "bit_alphabet"])
    c_min = _number(raw, "quantizer", "c_min")
    c_max = _number(raw, "quantizer", "c_max")
    if c_max <= c_min:
        raise ConfigError("quantizer.c_max", f"must exceed c_min ({c_min!r}), got {c_max!r}")
    q_max = _integer(raw, "quantizer", "q_max", minimum=0)
    alphabet = None
    if "bit_alphabet" in raw:
        entries = raw["bit_alphabet"]
        if not isinstance(entries, list) or not entries:
            raise ConfigError("quantizer.bit_alphabet", "expected a nonempty list of integers")
        parsed = []
        for i, entry in enumerate(entries):
            if isinstance(entry, bool) or not isinstance(entry, int):
                raise ConfigError(f"quantizer.bit_alphabet[{i}]", f"expected an integer, got {entry!r}")
            if entry < 0 or entry > q_max:
                raise ConfigError(
                    f"quantizer.bit_alphabet[{i}]", f"must lie within [0, {q_max}], got {entry}"
                )
            parsed.append(entry)
        if parsed != sorted(set(parsed)):
            raise ConfigError("quantizer.bit_alphabet", "must be strictly increasing")
        alphabet = tuple(parsed)
    return QuantizerSpec(c_min=c_min, c_max=c_max, q_max=q_max, bit_alphabet=alphabet)


def _parse_exits(raw: Any, profile: FeatureProfile) -> ExitSet:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("exits", "expected a nonempty list of layer indices")
    for i, entry in enumerate(raw):
        if isinstance(entry, bool) or not isinstance(entry, int):
            raise ConfigError(f"exits[{i}]", f"expected an integer, got {entry!r}")
        if entry < 1 or entry > profile.n_layers:
            raise ConfigError(f"exits[{i}]", f"must lie within [1, {profile.n_layers}], got {entry}")
    if list(raw) != sorted(set(raw)):
        raise ConfigError("exits", "must be strictly increasing")
    return ExitSet(layers=tuple(raw))


def _parse_monte_carlo(raw: Any) -> MonteCarloConfig:
    if raw is None:
        return MonteCarloConfig()
    raw = _expect_mapping(raw, "monte_carlo")
    _reject_unknown(raw, "monte_carlo", ["n_per_class", "tasks"])
    kwargs = {}
    if "n_per_class" in raw:
        kwargs["n_per_class"] = _integer(raw, "monte_carlo", "n_per_class", minimum=1)
    if "tasks" in raw:
        kwargs["tasks"] = _integer(raw, "monte_carlo", "tasks", minimum=1)
    return MonteCarloConfig(**kwargs)


_TOP_LEVEL = [
    "link",
    "compute",
    "feature_profile",
    "quantizer",
    "exits",
    "target_accuracy",
    "seed",
    "monte_carlo",
]


def parse_config(raw: Any) -> RunConfig:
    """Validate a parsed JSON object into a :class:`RunConfig`."""
    raw = _expect_mapping(raw, "<config>")
    _reject_unknown(raw, "", _TOP_LEVEL)
    profile = _parse_profile(_get(raw, "", "feature_profile"))
    link = _parse_link(_get(raw, "", "link"))
    compute = _parse_compute(_get(raw, "", "compute"))
    quantizer = _parse_quantizer(_get(raw, "", "quantizer"))
    exits = _parse_exits(_get(raw, "", "exits"), profile)
    target = _number(raw, "", "target_accuracy")
    if not 1.0 / profile.j_classes < target < 1.0:
        raise ConfigError(
            "target_accuracy",
            f"must lie in (1/{profile.j_classes}, 1) exclusive, got {target!r}",
        )
    seed = _get(raw, "", "seed")
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed", f"expected an integer, got {seed!r}")
    monte_carlo = _parse_monte_carlo(raw.get("monte_carlo"))
    return RunConfig(
        link=link,
        compute=compute,
        profile=profile,
        quantizer=quantizer,
        exits=exits,
        target_accuracy=target,
        seed=seed,
        monte_carlo=monte_carlo,
    )


def load_config(path: str | Path) -> RunConfig:
    """Load and validate a JSON run configuration from disk."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<config>", f"cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<config>", f"invalid JSON in {path}: {exc}") from exc
    return parse_config(raw)
