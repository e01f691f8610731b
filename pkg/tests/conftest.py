from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from evcompress import Event, EventWindow, SensorGeometry, make_window


def random_events(
    rng: np.random.Generator,
    count: int,
    geometry: SensorGeometry,
    t_start: float = 0.0,
    duration: float = 1.0,
) -> list[Event]:
    """Random events inside one window, microsecond-quantized timestamps."""
    taus = np.floor(rng.random(count) * 1e6) / 1e6
    xs = rng.integers(0, geometry.width, count)
    ys = rng.integers(0, geometry.height, count)
    ps = rng.choice([-1, 1], count)
    events = [
        Event(t=float(t_start + tau * duration), x=int(x), y=int(y), p=int(p))
        for tau, x, y, p in zip(taus, xs, ys, ps)
    ]
    events.sort(key=lambda ev: ev.t)
    return events


def random_window(
    rng: np.random.Generator,
    count: int,
    geometry: SensorGeometry,
    t_start: float = 0.0,
    duration: float = 1.0,
) -> EventWindow:
    return make_window(random_events(rng, count, geometry, t_start, duration), t_start, duration, geometry)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
