"""Transform atom families and Dirac-sampled per-pixel coefficient accumulation.

A pixel's events inside a window are modeled as a signed impulse train on
normalized window time ``tau in [0, 1)``.  Because the signal is a sum of
Dirac impulses, every transform coefficient reduces to a plain sum of atom
samples at the exact event times::

    c_k = sum_i p_i * phi_k(tau_i)

with no temporal binning anywhere.  The three atom families, all on
normalized time, are

* DCT:  ``phi_k(tau) = cos(pi * k * tau)``, ``k = 0, 1, ...``
* DTFT: ``phi_n(tau) = exp(-i * 2*pi*n * tau)``, ``n = 0, 1, ...``
  (polarity trains are real-valued, so negative frequencies are
  conjugate-redundant and the grid keeps non-negative ones only)
* DWT:  the Haar family, a constant scaling atom at position 0 and then
  ``psi_{j,m}(tau) = 2^(j/2) * psi(2^j * tau - m)`` with the mother wavelet
  ``psi = +1`` on ``[0, 1/2)`` and ``-1`` on ``[1/2, 1)``; supports are
  restricted to lie inside the window.

Grid orderings run from low frequency / coarse scale to high/fine: DCT and
DTFT by index, DWT as DC, (j=0,m=0), (j=1,m=0), (j=1,m=1), ... so that grid
position ``2^j + m`` always denotes scale ``j``, shift ``m``.

Accumulation is always in double precision; dense windows sum thousands of
terms.  No normalization factor is applied here: the sums are unnormalized
inner products, and all normalization lives in reconstruction.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .calibration import TransformKind
from .errors import ConfigurationError, ContractError
from .events import EventWindow, normalize_times

__all__ = [
    "AtomIndex",
    "AtomGrid",
    "CoefficientVector",
    "atom_value",
    "atom_matrix",
    "encode_pixel",
    "encode_window",
]

# Leading-block atom matrices are built with one-multiply recurrences
# (Chebyshev for DCT, phasor product for DTFT).  Accumulated rounding stays
# below ~1e-12 of the closed forms for any practical grid size, far inside
# the 1e-9 bit-compatibility bound required of fast evaluation paths.


@dataclass(frozen=True, slots=True)
class AtomIndex:
    """One atom of a transform grid, identified by its canonical position.

    For DCT the position is the cosine index ``k``; for DTFT it is the
    frequency index ``n`` (angular frequency ``2*pi*n`` on normalized time).
    For DWT, position 0 is the constant scaling atom and position
    ``2^j + m`` is the Haar atom at scale ``j``, shift ``m``.
    """

    transform: TransformKind
    position: int

    def __post_init__(self) -> None:
        if self.position < 0:
            raise ContractError(f"atom position must be >= 0, got {self.position}")

    @property
    def is_dc(self) -> bool:
        """True for the constant atom (position 0 in every family)."""
        return self.position == 0

    @property
    def scale_shift(self) -> tuple[int, int] | None:
        """Haar ``(scale, shift)`` for a DWT wavelet atom, else None."""
        if self.transform is not TransformKind.DWT or self.position == 0:
            return None
        j = self.position.bit_length() - 1
        return j, self.position - (1 << j)

    @classmethod
    def haar(cls, scale: int, shift: int) -> "AtomIndex":
        """DWT atom from ``(scale, shift)``; requires ``0 <= shift < 2**scale``."""
        if scale < 0 or not (0 <= shift < (1 << scale)):
            raise ContractError(f"invalid haar atom (scale={scale}, shift={shift})")
        return cls(TransformKind.DWT, (1 << scale) + shift)


@dataclass(frozen=True)
class AtomGrid:
    """The candidate atom set of one window: a transform plus its size.

    ``candidate_count`` atoms are taken in canonical order (positions
    ``0 .. candidate_count - 1``).  DWT grids must have power-of-two size so
    that scales close: size ``2^L`` covers DC plus all shifts of scales
    ``0 .. L-1``.
    """

    transform: TransformKind
    candidate_count: int

    def __post_init__(self) -> None:
        if self.candidate_count < 1:
            raise ConfigurationError(f"candidate_count must be >= 1, got {self.candidate_count}")
        if self.transform is TransformKind.DWT and self.candidate_count & (self.candidate_count - 1):
            raise ConfigurationError(
                f"DWT candidate_count must be a power of two, got {self.candidate_count}"
            )

    @cached_property
    def indices(self) -> tuple[AtomIndex, ...]:
        """All atom indices in canonical (low-to-high) order, built once."""
        return tuple(AtomIndex(self.transform, pos) for pos in range(self.candidate_count))


@dataclass(frozen=True)
class CoefficientVector:
    """Coefficients of one pixel over a full atom grid.

    ``values`` is aligned with the grid ordering: entry ``k`` belongs to
    ``grid.indices[k]``.  The dtype is complex128 for DTFT and float64
    otherwise (the imaginary part is identically zero outside DTFT, so it is
    not stored).  Arrays are frozen after construction.
    """

    grid: AtomGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        wanted = np.complex128 if self.grid.transform is TransformKind.DTFT else np.float64
        arr = np.asarray(self.values)
        if wanted is np.float64 and np.iscomplexobj(arr):
            raise ContractError(f"{self.grid.transform.name} coefficients must be real-valued")
        arr = np.array(arr, dtype=wanted)
        if arr.shape != (self.grid.candidate_count,):
            raise ContractError(
                f"coefficient vector has shape {arr.shape}, grid expects ({self.grid.candidate_count},)"
            )
        if not np.all(np.isfinite(arr)):
            raise ContractError("coefficient values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoefficientVector):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    @staticmethod
    def _trusted(grid: AtomGrid, values: np.ndarray) -> "CoefficientVector":
        # batch encoders validate whole coefficient matrices in one pass;
        # re-checking per pixel would dominate dense-window encode time
        vec = object.__new__(CoefficientVector)
        object.__setattr__(vec, "grid", grid)
        object.__setattr__(vec, "values", values)
        return vec


def atom_value(index: AtomIndex, tau: float) -> float | complex:
    """Evaluate one atom at one normalized time.

    Returns a float for DCT/DWT and a complex value for DTFT.  ``tau`` must
    lie in ``[0, 1)``.
    """
    if not (0.0 <= tau < 1.0):
        raise ContractError(f"normalized time must lie in [0, 1), got {tau!r}")
    if index.transform is TransformKind.DCT:
        return math.cos(math.pi * index.position * tau)
    if index.transform is TransformKind.DTFT:
        return cmath.exp(-2j * math.pi * index.position * tau)
    if index.position == 0:
        return 1.0
    j, m = index.scale_shift
    u = tau * (1 << j) - m
    if 0.0 <= u < 0.5:
        return 2.0 ** (j / 2.0)
    if 0.5 <= u < 1.0:
        return -(2.0 ** (j / 2.0))
    return 0.0


def atom_matrix(transform: TransformKind, count: int, taus: np.ndarray) -> np.ndarray:
    """Sample the leading ``count`` atoms at the given times.

    Returns a ``(count, len(taus))`` matrix, complex128 for DTFT and float64
    otherwise.  DWT requires ``count`` to be a power of two (whole scales).
    """
    AtomGrid(transform, count)  # reuse grid validation
    taus = np.asarray(taus, dtype=np.float64)
    n = taus.shape[0]
    if transform is TransformKind.DCT:
        out = np.empty((count, n), dtype=np.float64)
        out[0] = 1.0
        if count > 1:
            np.cos(np.pi * taus, out=out[1])
            two_c1 = 2.0 * out[1]
            for k in range(2, count):  # cos((k+1)x) = 2 cos(x) cos(kx) - cos((k-1)x)
                np.subtract(two_c1 * out[k - 1], out[k - 2], out=out[k])
        return out
    if transform is TransformKind.DTFT:
        out = np.empty((count, n), dtype=np.complex128)
        out[0] = 1.0
        if count > 1:
            z = np.exp(-2j * np.pi * taus)
            out[1] = z
            for k in range(2, count):
                np.multiply(out[k - 1], z, out=out[k])
        return out
    out = np.zeros((count, n), dtype=np.float64)
    out[0] = 1.0
    cols = np.arange(n)
    for j in range(count.bit_length() - 1):
        u = taus * (1 << j)
        m = np.floor(u).astype(np.int64)  # active shift at this scale; tau < 1 keeps m < 2^j
        amp = 2.0 ** (j / 2.0)
        out[(1 << j) + m, cols] = np.where(u - m < 0.5, amp, -amp)
    return out


_ROW_BUFFERS = threading.local()


def _row_buffer(transform: TransformKind, count: int, n: int) -> np.ndarray:
    """Reusable (count, n) scratch matrix, per thread and dtype.

    Dense windows allocate tens of megabytes per encode; recycling one
    buffer avoids page-fault churn that would otherwise dominate encode
    time on large streams.
    """
    dtype = np.complex128 if transform is TransformKind.DTFT else np.float64
    cache = getattr(_ROW_BUFFERS, "cache", None)
    if cache is None:
        cache = _ROW_BUFFERS.cache = {}
    buf = cache.get(dtype.__name__)
    if buf is None or buf.shape[0] < count or buf.shape[1] < n:
        rows = max(count, 0 if buf is None else buf.shape[0])
        cols = max(n, 0 if buf is None else buf.shape[1])
        buf = cache[dtype.__name__] = np.empty((rows, cols), dtype=dtype)
    return buf[:count, :n]


def _weighted_atom_rows(
    transform: TransformKind, count: int, taus: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """Leading-block atom samples pre-multiplied by per-event weights.

    Folding the weights into the recurrence seeds makes each output row a
    single pass, with no separate (count, n) product.  The result lives in
    the shared scratch buffer: consume it before the next call.
    """
    n = taus.shape[0]
    out = _row_buffer(transform, count, n)
    if transform is TransformKind.DCT:
        out[0] = weights
        if count > 1:
            cos1 = np.cos(np.pi * taus)
            np.multiply(cos1, weights, out=out[1])
            two_c1 = cos1
            two_c1 *= 2.0  # cos1 is not needed past the seed row
            for k in range(2, count):
                np.subtract(two_c1 * out[k - 1], out[k - 2], out=out[k])
        return out
    if transform is TransformKind.DTFT:
        out[0] = weights
        if count > 1:
            z = np.exp(-2j * np.pi * taus)
            np.multiply(z, weights, out=out[1])
            for k in range(2, count):
                np.multiply(out[k - 1], z, out=out[k])
        return out
    out[:] = 0.0
    out[0] = weights
    cols = np.arange(n)
    for j in range(count.bit_length() - 1):
        u = taus * (1 << j)
        m = np.floor(u).astype(np.int64)
        amp = 2.0 ** (j / 2.0)
        out[(1 << j) + m, cols] = np.where(u - m < 0.5, amp, -amp) * weights
    return out


def _rows_at_positions(transform: TransformKind, positions: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """Sample arbitrary atom positions (closed forms, no recurrence)."""
    taus = np.asarray(taus, dtype=np.float64)
    positions = np.asarray(positions, dtype=np.int64)
    if transform is TransformKind.DCT:
        return np.cos(np.pi * positions[:, None] * taus[None, :])
    if transform is TransformKind.DTFT:
        return np.exp(-2j * np.pi * positions[:, None] * taus[None, :])
    out = np.zeros((positions.shape[0], taus.shape[0]), dtype=np.float64)
    for row, pos in enumerate(positions):
        if pos == 0:
            out[row] = 1.0
            continue
        j = int(pos).bit_length() - 1
        m = int(pos) - (1 << j)
        u = taus * (1 << j) - m
        amp = 2.0 ** (j / 2.0)
        out[row] = np.where((u >= 0.0) & (u < 0.5), amp, 0.0) - np.where((u >= 0.5) & (u < 1.0), amp, 0.0)
    return out


def encode_pixel(
    taus: Sequence[float] | np.ndarray,
    polarities: Sequence[float] | np.ndarray,
    grid: AtomGrid,
) -> CoefficientVector:
    """Accumulate one pixel's impulse train into grid coefficients.

    ``values[k] = sum_i polarities[i] * phi_k(taus[i])``.  An empty input
    yields the all-zero vector.
    """
    taus = np.asarray(taus, dtype=np.float64)
    pol = np.asarray(polarities, dtype=np.float64)
    if taus.shape != pol.shape or taus.ndim != 1:
        raise ContractError(
            f"taus and polarities must be 1-D and equal length, got {taus.shape} vs {pol.shape}"
        )
    if taus.size and (taus.min() < 0.0 or taus.max() >= 1.0):
        raise ContractError("normalized times must lie in [0, 1)")
    if taus.size == 0:
        dtype = np.complex128 if grid.transform is TransformKind.DTFT else np.float64
        return CoefficientVector(grid, np.zeros(grid.candidate_count, dtype=dtype))
    rows = atom_matrix(grid.transform, grid.candidate_count, taus)
    return CoefficientVector(grid, rows @ pol)


def encode_window(
    window: EventWindow,
    transform: TransformKind,
    candidate_count: int,
) -> dict[tuple[int, int], CoefficientVector]:
    """Encode every active pixel of a window independently.

    The transform choice is window-level; accumulation is per pixel.  Pixels
    with no events are absent from the result (implicitly zero).  Keys are
    ``(x, y)`` pairs in row-major pixel order.
    """
    grid = AtomGrid(transform, candidate_count)
    n = len(window)
    if n == 0:
        return {}
    taus = normalize_times(window)
    _, xs, ys, ps = window.columns
    pixel_ids = ys * window.geometry.width + xs
    order = np.argsort(pixel_ids, kind="stable")  # stable: events stay time-ordered per pixel
    ids_sorted = pixel_ids[order]
    starts = np.flatnonzero(np.r_[True, ids_sorted[1:] != ids_sorted[:-1]])
    weighted = _weighted_atom_rows(transform, candidate_count, taus[order], ps[order])
    columns = np.ascontiguousarray(np.add.reduceat(weighted, starts, axis=1).T)
    if not np.all(np.isfinite(columns)):
        raise ContractError("coefficient values must be finite")
    columns.setflags(write=False)
    out: dict[tuple[int, int], CoefficientVector] = {}
    width = window.geometry.width
    for seg, start in enumerate(starts):
        pid = int(ids_sorted[start])
        out[(pid % width, pid // width)] = CoefficientVector._trusted(grid, columns[seg])
    return out
