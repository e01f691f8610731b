"""Core event/window types, time normalization, and the event density measure.

An event stream is a time-ordered sequence of signed impulses ``(t, x, y, p)``.
Windows are half-open time slices ``[t_start, t_start + duration)``; an event
whose timestamp equals the upper edge belongs to the next window, so
consecutive windows tile a stream without double counting.

Timestamps are stored as double-precision seconds.  Event cameras report
integer microseconds; doubles hold those exactly over realistic session
lengths, so convert at ingestion and keep seconds everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import ValidationError

__all__ = [
    "Event",
    "SensorGeometry",
    "EventWindow",
    "make_window",
    "compute_density",
    "normalize_times",
]


@dataclass(frozen=True, slots=True)
class Event:
    """One sensor event: a polarity impulse at pixel ``(x, y)`` and time ``t``.

    Attributes:
        t: timestamp in seconds, finite and non-negative.
        x: column index, ``0 <= x < width`` of the owning sensor.
        y: row index, ``0 <= y < height`` of the owning sensor.
        p: polarity, exactly ``-1`` or ``+1``.  Datasets using ``{0, 1}`` are
           remapped at the I/O layer, never here.
    """

    t: float
    x: int
    y: int
    p: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.t) or self.t < 0.0:
            raise ValidationError(f"event timestamp must be finite and >= 0, got {self.t!r}")
        if self.p not in (-1, 1):
            raise ValidationError(f"event polarity must be -1 or +1, got {self.p!r}")
        if self.x < 0 or self.y < 0:
            raise ValidationError(f"event coordinates must be non-negative, got ({self.x}, {self.y})")


@dataclass(frozen=True, slots=True)
class SensorGeometry:
    """Sensor pixel grid: ``height`` rows by ``width`` columns."""

    height: int
    width: int

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1:
            raise ValidationError(f"sensor geometry must be at least 1x1, got {self.height}x{self.width}")

    @property
    def pixel_count(self) -> int:
        return self.height * self.width


@dataclass(frozen=True)
class EventWindow:
    """A half-open time slice ``[t_start, t_start + duration)`` of a stream.

    Events are stored sorted by timestamp (stable on ties).  Instances are
    immutable after construction and safe to share across concurrent readers.
    Use :func:`make_window` to build a fully validated window from unordered
    input.
    """

    t_start: float
    duration: float
    events: tuple[Event, ...]
    geometry: SensorGeometry

    def __post_init__(self) -> None:
        if not math.isfinite(self.duration) or self.duration <= 0.0:
            raise ValidationError(f"window duration must be finite and > 0, got {self.duration!r}")
        if not math.isfinite(self.t_start):
            raise ValidationError(f"window start must be finite, got {self.t_start!r}")

    def __len__(self) -> int:
        return len(self.events)

    @cached_property
    def columns(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Event fields as parallel arrays ``(t, x, y, p)``, cached per window."""
        n = len(self.events)
        t = np.empty(n, dtype=np.float64)
        x = np.empty(n, dtype=np.int64)
        y = np.empty(n, dtype=np.int64)
        p = np.empty(n, dtype=np.float64)
        for i, ev in enumerate(self.events):
            t[i] = ev.t
            x[i] = ev.x
            y[i] = ev.y
            p[i] = ev.p
        for arr in (t, x, y, p):
            arr.setflags(write=False)
        return t, x, y, p


def make_window(
    events: Iterable[Event],
    t_start: float,
    duration: float,
    geometry: SensorGeometry,
) -> EventWindow:
    """Build a validated :class:`EventWindow` from events in any order.

    Events are sorted by timestamp; input order of equal timestamps is
    preserved.  Raises :class:`ValidationError` identifying the offending
    event index for out-of-range coordinates or out-of-window timestamps.
    """
    evs = list(events)
    if not math.isfinite(duration) or duration <= 0.0:
        raise ValidationError(f"window duration must be finite and > 0, got {duration!r}")
    t_end = t_start + duration
    h, w = geometry.height, geometry.width
    for i, ev in enumerate(evs):
        if not (0 <= ev.x < w) or not (0 <= ev.y < h):
            raise ValidationError(
                f"event {i}: coordinates ({ev.x}, {ev.y}) outside {h}x{w} sensor"
            )
        if not (t_start <= ev.t < t_end):
            raise ValidationError(
                f"event {i}: timestamp {ev.t!r} outside window [{t_start!r}, {t_end!r})"
            )
    evs.sort(key=lambda ev: ev.t)  # timsort is stable: ties keep input order
    return EventWindow(t_start=t_start, duration=duration, events=tuple(evs), geometry=geometry)


def compute_density(window: EventWindow) -> float:
    """Normalized event density: events per pixel per second.

    ``density = N / (H * W * T)`` where ``N`` is the window's event count.
    The normalization makes densities comparable across sensor resolutions
    and window durations.
    """
    return len(window.events) / (window.geometry.pixel_count * window.duration)


def normalize_times(window: EventWindow) -> np.ndarray:
    """Map event timestamps onto canonical window time ``tau = (t - t_start) / T``.

    Returns an array of values in ``[0, 1)`` in event order.
    """
    t = window.columns[0]
    return (t - window.t_start) / window.duration
