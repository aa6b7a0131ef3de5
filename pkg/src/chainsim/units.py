"""Unit-aware number parsing for scenario files.

Bare JSON numbers are taken in the field's native unit (nanoseconds for
latencies, seconds for traffic durations, bytes, bytes/second, hertz).
Strings may carry an explicit suffix such as ``"7.3e5ns"``, ``"1Gbps"``,
``"657MBps"``, ``"16GB"`` or ``"1.59GHz"``.
"""

from __future__ import annotations

import math
import re

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-zµ/]*)\s*$")

# "ε" marks a negligible quantity in published thread tables.
_EPSILON_TOKENS = {"ε", "eps", "epsilon"}

_TIME_NS = {"ns": 1.0, "us": 1e3, "µs": 1e3, "ms": 1e6, "s": 1e9, "min": 60e9}
_BYTES = {
    "b": 1.0, "kb": 1e3, "mb": 1e6, "gb": 1e9, "tb": 1e12,
    "kib": 2.0**10, "mib": 2.0**20, "gib": 2.0**30, "tib": 2.0**40,
}
_FREQ = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}


class UnitError(ValueError):
    """A value could not be interpreted in the requested unit family."""


def _split(value):
    if isinstance(value, bool):
        raise UnitError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value), ""
    if isinstance(value, str):
        if value.strip() in _EPSILON_TOKENS:
            return 0.0, ""
        m = _NUMBER.match(value)
        if m:
            return float(m.group(1)), m.group(2)
    raise UnitError(f"cannot parse {value!r} as a number")


def _finite(x: float, value) -> float:
    if not math.isfinite(x):
        raise UnitError(f"non-finite value {value!r}")
    return x


def parse_real(value) -> float:
    x, unit = _split(value)
    if unit:
        raise UnitError(f"unexpected unit {unit!r} in {value!r}")
    return _finite(x, value)


def parse_count(value) -> int:
    """Integer count; scientific notation such as 1.4e9 is accepted."""
    return int(round(parse_real(value)))


def parse_time_ns(value, default_unit: str = "ns") -> int:
    """Duration normalised to integer nanoseconds."""
    x, unit = _split(value)
    unit = unit or default_unit
    if unit not in _TIME_NS:
        raise UnitError(f"unknown time unit {unit!r} in {value!r}")
    return int(round(_finite(x * _TIME_NS[unit], value)))


def parse_bytes(value) -> int:
    x, unit = _split(value)
    if not unit:
        return int(round(_finite(x, value)))
    key = unit.lower()
    if key not in _BYTES or unit[-1] != "B":
        raise UnitError(f"unknown size unit {unit!r} in {value!r}")
    return int(round(_finite(x * _BYTES[key], value)))


def parse_bandwidth(value) -> float:
    """Bandwidth in bytes/second.

    ``bps`` suffixes are bits per second (``1Gbps`` = 1.25e8 B/s); ``Bps``
    suffixes are bytes per second (``657MBps`` = 6.57e8 B/s).
    """
    x, unit = _split(value)
    if not unit:
        return _finite(x, value)
    if not unit.endswith("ps"):
        raise UnitError(f"unknown bandwidth unit {unit!r} in {value!r}")
    base, scale = unit[:-2], 1.0
    if base[:-1]:
        prefix = base[:-1].lower()
        scale = {"k": 1e3, "m": 1e6, "g": 1e9, "t": 1e12}.get(prefix)
        if scale is None:
            raise UnitError(f"unknown bandwidth prefix in {value!r}")
    if base.endswith("b"):
        scale /= 8.0
    elif not base.endswith("B"):
        raise UnitError(f"unknown bandwidth unit {unit!r} in {value!r}")
    return _finite(x * scale, value)


def parse_frequency(value) -> float:
    x, unit = _split(value)
    if not unit:
        return _finite(x, value)
    key = unit.lower()
    if key not in _FREQ:
        raise UnitError(f"unknown frequency unit {unit!r} in {value!r}")
    return _finite(x * _FREQ[key], value)
