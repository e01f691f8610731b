"""Retention budgeting, coefficient pruning, descriptor packing, tensor export.

Two pruning rules, matched to how each transform concentrates energy:

* DCT keeps the first ``r`` grid indices in frequency order, regardless of
  magnitudes: dense activity concentrates energy at low frequency.
* DTFT and DWT keep the ``r`` largest-magnitude coefficients (complex
  modulus for DTFT); ties go to the earlier grid position, i.e. the lower
  frequency or coarser scale.  Exact-zero coefficients carry no information
  and are never retained, so a pixel's retained list has length
  ``min(r, nonzero candidates)``.

``r = min(budget, candidate_count)`` so retention never exceeds the basis.
A coefficient counts as one unit of budget whether real or complex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .calibration import TransformKind
from .errors import ConfigurationError, ContractError
from .events import SensorGeometry
from .transforms import AtomGrid, AtomIndex, CoefficientVector

__all__ = [
    "RetentionPolicy",
    "RetainedCoefficient",
    "WindowDescriptor",
    "DenseTensor",
    "retention_budget",
    "prune_dct",
    "prune_magnitude",
    "pack_descriptor",
    "to_dense_tensor",
]


@dataclass(frozen=True, slots=True)
class RetentionPolicy:
    """Per-pixel coefficient budget.  Default 16."""

    budget: int = 16

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ConfigurationError(f"retention budget must be >= 1, got {self.budget}")


class RetainedCoefficient(NamedTuple):
    """One kept coefficient: its atom index and value (complex for DTFT)."""

    index: AtomIndex
    value: float | complex


@dataclass(frozen=True)
class WindowDescriptor:
    """The packed artifact of one compressed window.

    ``pixels`` maps ``(x, y)`` to that pixel's retained coefficients: grid
    order for DCT, descending magnitude (ties toward lower position) for
    DTFT/DWT.  Pixels whose candidate vector was entirely zero are absent.
    Immutable once packed.
    """

    transform: TransformKind
    geometry: SensorGeometry
    t_start: float
    duration: float
    budget: int
    candidate_count: int
    pixels: dict[tuple[int, int], tuple[RetainedCoefficient, ...]]


def retention_budget(budget: int, candidate_count: int) -> int:
    """Effective retention count ``r = min(budget, candidate_count)``."""
    if budget < 1:
        raise ConfigurationError(f"retention budget must be >= 1, got {budget}")
    if candidate_count < 1:
        raise ConfigurationError(f"candidate_count must be >= 1, got {candidate_count}")
    return min(budget, candidate_count)


def _check_prune_args(coeffs: CoefficientVector, r: int, allowed: tuple[TransformKind, ...]) -> None:
    if coeffs.grid.transform not in allowed:
        names = "/".join(t.name for t in allowed)
        raise ContractError(f"pruning rule for {names} applied to {coeffs.grid.transform.name} coefficients")
    if not (0 <= r <= coeffs.grid.candidate_count):
        raise ContractError(
            f"retention count {r} outside [0, {coeffs.grid.candidate_count}]"
        )


def prune_dct(coeffs: CoefficientVector, r: int) -> tuple[RetainedCoefficient, ...]:
    """Low-frequency retention: exactly the first ``r`` grid indices, in order."""
    _check_prune_args(coeffs, r, (TransformKind.DCT,))
    indices = coeffs.grid.indices
    return tuple(map(RetainedCoefficient, indices[:r], coeffs.values[:r].tolist()))


def prune_magnitude(coeffs: CoefficientVector, r: int) -> tuple[RetainedCoefficient, ...]:
    """Magnitude selection: up to ``r`` largest-|value| coefficients.

    Output is sorted by descending magnitude, then ascending grid position;
    ties between equal magnitudes resolve to the lower frequency / coarser
    scale.  Exact zeros are dropped, so fewer than ``r`` entries come back
    when the vector has fewer nonzero candidates.
    """
    _check_prune_args(coeffs, r, (TransformKind.DTFT, TransformKind.DWT))
    mags = np.abs(coeffs.values)
    # stable sort on negated magnitude: equal |c| resolve to the earlier
    # (lower-frequency / coarser-scale) grid position
    order = np.argsort(-mags, kind="stable")[:r]
    keep = int(np.searchsorted(-mags[order], 0.0))  # zeros sort last and are never retained
    order = order[:keep]
    indices = coeffs.grid.indices
    values = coeffs.values[order].tolist()
    return tuple(map(RetainedCoefficient, (indices[pos] for pos in order.tolist()), values))


def pack_descriptor(
    per_pixel: Mapping[tuple[int, int], CoefficientVector],
    policy: RetentionPolicy,
    transform: TransformKind,
    geometry: SensorGeometry,
    t_start: float,
    duration: float,
    candidate_count: int | None = None,
) -> WindowDescriptor:
    """Prune every pixel's coefficients and pack them into a descriptor.

    All coefficient vectors must share one grid, whose transform must equal
    ``transform``.  ``candidate_count`` is required when ``per_pixel`` is
    empty (there is no grid to read it from) and must agree with the shared
    grid otherwise.  Pixels whose vectors are entirely zero are dropped.
    """
    grids = {vec.grid for vec in per_pixel.values()}
    if len(grids) > 1:
        raise ContractError("all coefficient vectors in a window must share one grid")
    if grids:
        grid = next(iter(grids))
        if grid.transform is not transform:
            raise ContractError(
                f"descriptor transform {transform.name} does not match grid transform {grid.transform.name}"
            )
        if candidate_count is not None and candidate_count != grid.candidate_count:
            raise ContractError(
                f"candidate_count {candidate_count} does not match grid size {grid.candidate_count}"
            )
        candidate_count = grid.candidate_count
    elif candidate_count is None:
        raise ConfigurationError("candidate_count is required when packing an empty window")
    else:
        AtomGrid(transform, candidate_count)  # validate even with no pixels

    r = retention_budget(policy.budget, candidate_count)
    prune = prune_dct if transform is TransformKind.DCT else prune_magnitude
    pixels: dict[tuple[int, int], tuple[RetainedCoefficient, ...]] = {}
    for key in sorted(per_pixel, key=lambda xy: (xy[1], xy[0])):
        vec = per_pixel[key]
        if not np.any(vec.values):
            continue
        pixels[key] = prune(vec, r)
    return WindowDescriptor(
        transform=transform,
        geometry=geometry,
        t_start=t_start,
        duration=duration,
        budget=policy.budget,
        candidate_count=candidate_count,
        pixels=pixels,
    )


@dataclass(frozen=True)
class DenseTensor:
    """``(H, W, M)`` channel layout of retained coefficients.

    Channel ``m`` of pixel ``(x, y)`` carries the real part of that pixel's
    m-th retained coefficient; channels past the retained count are exactly
    zero.  ``channel_positions`` records each pixel's atom grid positions in
    channel order, so the mapping back to the descriptor's real parts is
    invertible.
    """

    values: np.ndarray
    channel_positions: dict[tuple[int, int], tuple[int, ...]]
    transform: TransformKind
    budget: int


def to_dense_tensor(descriptor: WindowDescriptor) -> DenseTensor:
    """Lay a descriptor out as a dense ``(H, W, M)`` tensor for perception stacks."""
    h, w = descriptor.geometry.height, descriptor.geometry.width
    m = descriptor.budget
    values = np.zeros((h, w, m), dtype=np.float64)
    channel_positions: dict[tuple[int, int], tuple[int, ...]] = {}
    for (x, y), retained in descriptor.pixels.items():
        for chan, rc in enumerate(retained):
            values[y, x, chan] = rc.value.real if isinstance(rc.value, complex) else rc.value
        channel_positions[(x, y)] = tuple(rc.index.position for rc in retained)
    values.setflags(write=False)
    return DenseTensor(
        values=values,
        channel_positions=channel_positions,
        transform=descriptor.transform,
        budget=m,
    )
