"""Independent reference implementations used to cross-check the library.

Everything here is written from the definitions, deliberately avoiding the
library's evaluation paths (recurrences, vectorized pruning, CDF tricks),
so a test comparing the two routes actually checks something.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from evcompress import TransformKind

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


def atom_sample(transform: TransformKind, position: int, tau: float) -> complex:
    """Closed-form atom value at one normalized time."""
    if transform is TransformKind.DCT:
        return math.cos(math.pi * position * tau)
    if transform is TransformKind.DTFT:
        angle = 2.0 * math.pi * position * tau
        return complex(math.cos(angle), -math.sin(angle))
    if position == 0:
        return 1.0
    scale = position.bit_length() - 1
    shift = position - (1 << scale)
    u = tau * (1 << scale) - shift
    if 0.0 <= u < 0.5:
        return 2.0 ** (scale / 2.0)
    if 0.5 <= u < 1.0:
        return -(2.0 ** (scale / 2.0))
    return 0.0


def binned_coefficients(
    taus: np.ndarray,
    polarities: np.ndarray,
    transform: TransformKind,
    candidate_count: int,
    bins: int = 10**6,
) -> np.ndarray:
    """Dense-binning encoder oracle.

    Bins the impulse train onto ``bins`` uniform sample points ``g / bins``
    (each impulse's mass goes to the nearest sample) and inner-products the
    binned train with the sampled atoms.  Empty bins contribute nothing, so
    only occupied bins are summed: the result is identical to the full
    dense sum.
    """
    mass: dict[int, float] = {}
    for tau, p in zip(taus, polarities):
        g = round(tau * bins)
        assert 0 <= g < bins
        mass[g] = mass.get(g, 0.0) + p
    occupied = sorted(mass)
    sample_taus = np.array([g / bins for g in occupied])
    weights = np.array([mass[g] for g in occupied])
    dtype = np.complex128 if transform is TransformKind.DTFT else np.float64
    out = np.zeros(candidate_count, dtype=dtype)
    for k in range(candidate_count):
        samples = np.array([atom_sample(transform, k, float(t)) for t in sample_taus], dtype=dtype)
        out[k] = np.sum(samples * weights)
    return out


def percentile_linear(values, q: float) -> float:
    """Linear-interpolation percentile: rank q*(n-1), interpolate neighbors."""
    xs = sorted(float(v) for v in values)
    rank = q * (len(xs) - 1)
    lo = int(math.floor(rank))
    hi = min(lo + 1, len(xs) - 1)
    frac = rank - lo
    return xs[lo] + frac * (xs[hi] - xs[lo])


def best_subset_energy(magnitudes: np.ndarray, r: int) -> float:
    """Exhaustive maximum of sum(|c|^2) over all size-r index subsets."""
    energies = [float(m) ** 2 for m in magnitudes]
    best = 0.0
    for subset in itertools.combinations(range(len(energies)), r):
        best = max(best, math.fsum(energies[i] for i in subset))
    return best


def mse_two_loop(a: np.ndarray, b: np.ndarray) -> float:
    """Direct two-loop MSE with the joint max(1, |.|) normalization."""
    peak = 1.0
    for row in range(a.shape[0]):
        for col in range(a.shape[1]):
            peak = max(peak, abs(a[row, col]), abs(b[row, col]))
    total = 0.0
    for row in range(a.shape[0]):
        for col in range(a.shape[1]):
            d = (a[row, col] - b[row, col]) / peak
            total += d * d
    return total / a.size


def ssim_sliding(a: np.ndarray, b: np.ndarray) -> float:
    """Direct sliding-window SSIM: explicit loops over valid positions."""
    half = (SSIM_WINDOW - 1) / 2.0
    coords = np.arange(SSIM_WINDOW) - half
    g = np.exp(-(coords**2) / (2.0 * SSIM_SIGMA**2))
    kernel = np.outer(g, g)
    kernel /= kernel.sum()
    peak = max(1.0, np.abs(a).max(), np.abs(b).max())
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    rows = a.shape[0] - SSIM_WINDOW + 1
    cols = a.shape[1] - SSIM_WINDOW + 1
    total = 0.0
    for row in range(rows):
        for col in range(cols):
            wa = a[row : row + SSIM_WINDOW, col : col + SSIM_WINDOW]
            wb = b[row : row + SSIM_WINDOW, col : col + SSIM_WINDOW]
            mu_a = float((kernel * wa).sum())
            mu_b = float((kernel * wb).sum())
            var_a = float((kernel * wa * wa).sum()) - mu_a * mu_a
            var_b = float((kernel * wb * wb).sum()) - mu_b * mu_b
            cov = float((kernel * wa * wb).sum()) - mu_a * mu_b
            total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
                (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
            )
    return total / (rows * cols)


def emd_linear_program(a: np.ndarray, b: np.ndarray) -> float:
    """Transport-LP oracle for the binned Wasserstein-1 distance.

    Minimizes sum f_ij * |i - j| / G over non-negative flows with marginals
    equal to the unit-normalized histograms.
    """
    from scipy.optimize import linprog

    bins = a.shape[0]
    a = a / a.sum()
    b = b / b.sum()
    cost = np.abs(np.subtract.outer(np.arange(bins), np.arange(bins))).reshape(-1) / bins
    a_eq = np.zeros((2 * bins, bins * bins))
    for i in range(bins):
        a_eq[i, i * bins : (i + 1) * bins] = 1.0  # row marginal
        a_eq[bins + i, i::bins] = 1.0  # column marginal
    result = linprog(
        cost,
        A_eq=a_eq,
        b_eq=np.concatenate([a, b]),
        bounds=(0.0, None),
        method="highs",
    )
    assert result.success
    return float(result.fun)
