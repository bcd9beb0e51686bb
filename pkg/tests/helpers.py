"""Shared draw helpers for randomized tests."""

import numpy as np

from mstasep import RateTable, SpectralPoint, contour_bound


def draw_rates(rng, n, lo=0.5, hi=2.0):
    return RateTable(tuple(rng.uniform(lo, hi, size=n)))


def draw_point(rng, n, rates):
    """Spectral values strictly inside the admissible disk, generic phases."""
    mags = rng.uniform(0.2, 0.9, size=n) * contour_bound(rates)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return SpectralPoint(tuple(mags * np.exp(1j * phases)))
