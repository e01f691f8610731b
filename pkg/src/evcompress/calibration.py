"""Quartile threshold calibration and density-driven transform selection.

Thresholds are the 25th and 75th percentiles of window densities observed on
a calibration split, computed with the linear-interpolation percentile rule
(rank ``q * (n - 1)``, interpolate between neighbors).  Once calibrated they
are immutable: classification during deployment never re-fits them.

Selection maps the regime straight to a transform family: sparse windows get
wavelets (localized support for isolated activity), moderate windows get the
complex-exponential transform (temporal fidelity), dense windows get the
cosine transform (energy compaction).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CalibrationError, ParseError, ValidationError

__all__ = [
    "Regime",
    "TransformKind",
    "DensityThresholds",
    "calibrate_thresholds",
    "classify_regime",
    "select_transform",
    "save_thresholds",
    "load_thresholds",
]


class Regime(IntEnum):
    """Window activity class, ordered by increasing density."""

    SPARSE = 0
    MODERATE = 1
    DENSE = 2


class TransformKind(IntEnum):
    """Transform family; integer values double as the on-disk codes."""

    DWT = 0
    DTFT = 1
    DCT = 2


@dataclass(frozen=True, slots=True)
class DensityThresholds:
    """Calibrated density split points, in events per pixel per second."""

    tau_low: float
    tau_high: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.tau_low) and math.isfinite(self.tau_high)):
            raise ValidationError("thresholds must be finite")
        if not (0.0 <= self.tau_low <= self.tau_high):
            raise ValidationError(
                f"thresholds must satisfy 0 <= tau_low <= tau_high, got ({self.tau_low}, {self.tau_high})"
            )


def calibrate_thresholds(densities: Sequence[float]) -> DensityThresholds:
    """Fit thresholds as the 25th/75th percentiles of the given densities.

    Args:
        densities: non-empty sample of window densities, all finite and >= 0.

    Raises:
        CalibrationError: on an empty sample.
        ValidationError: on NaN, infinite, or negative densities.
    """
    arr = np.asarray(densities, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size == 0:
        raise CalibrationError("cannot calibrate thresholds from an empty density sample")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("densities must be finite")
    if np.any(arr < 0.0):
        raise ValidationError("densities must be non-negative")
    if arr.size < 4:
        warnings.warn(
            f"calibrating from only {arr.size} window(s); quartile thresholds will collapse",
            stacklevel=2,
        )
    tau_low = float(np.percentile(arr, 25.0))  # numpy default = linear interpolation
    tau_high = float(np.percentile(arr, 75.0))
    return DensityThresholds(tau_low=tau_low, tau_high=tau_high)


def classify_regime(density: float, thresholds: DensityThresholds) -> Regime:
    """Classify a window density against calibrated thresholds.

    Boundary semantics: the lower bound is inclusive for MODERATE and the
    upper bound is inclusive for DENSE, i.e. ``density == tau_low`` is
    MODERATE and ``density == tau_high`` is DENSE.
    """
    if density < thresholds.tau_low:
        return Regime.SPARSE
    if density < thresholds.tau_high:
        return Regime.MODERATE
    return Regime.DENSE


_TRANSFORM_BY_REGIME = {
    Regime.SPARSE: TransformKind.DWT,
    Regime.MODERATE: TransformKind.DTFT,
    Regime.DENSE: TransformKind.DCT,
}


def select_transform(regime: Regime) -> TransformKind:
    """Map a density regime to its transform family."""
    return _TRANSFORM_BY_REGIME[regime]


def save_thresholds(thresholds: DensityThresholds, path: str | Path) -> None:
    """Write thresholds as a two-line UTF-8 text record."""
    text = f"tau_low={thresholds.tau_low!r}\ntau_high={thresholds.tau_high!r}\n"
    Path(path).write_text(text, encoding="utf-8")


def load_thresholds(path: str | Path) -> DensityThresholds:
    """Parse a threshold file written by :func:`save_thresholds`.

    The format is strict: exactly two lines, ``tau_low=<decimal>`` then
    ``tau_high=<decimal>``.  Anything else raises :class:`ParseError` with
    the offending line number.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) != 2:
        raise ParseError(f"threshold file must have exactly 2 lines, got {len(lines)}")
    values = {}
    for lineno, (key, line) in enumerate(zip(("tau_low", "tau_high"), lines), start=1):
        prefix = key + "="
        if not line.startswith(prefix):
            raise ParseError(f"line {lineno}: expected '{prefix}<decimal>', got {line!r}")
        try:
            values[key] = float(line[len(prefix):])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: invalid decimal {line[len(prefix):]!r}") from exc
    try:
        return DensityThresholds(tau_low=values["tau_low"], tau_high=values["tau_high"])
    except ValidationError as exc:
        raise ParseError(f"threshold file violates invariants: {exc}") from exc
