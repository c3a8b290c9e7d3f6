"""
Smooth steps and plateau bumps, vectorized over numpy arrays.

    sigma(u) = exp(-1/u) for u > 0, else 0
    s(u)     = sigma(u) / (sigma(u) + sigma(1 - u))
    B(t)     = s(2 (1 - |t|))     (1 on |t| <= 1/2, 0 on |t| >= 1)
"""

import numpy as np


def flat(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    positive = u > 0
    out[positive] = np.exp(-1.0 / u[positive])
    return out


def smooth_step(u: np.ndarray) -> np.ndarray:
    rising = flat(u)
    return rising / (rising + flat(1.0 - np.asarray(u, dtype=float)))


def plateau(t: np.ndarray) -> np.ndarray:
    return smooth_step(2.0 * (1.0 - np.abs(np.asarray(t, dtype=float))))


def circle_distance(x: np.ndarray, center) -> np.ndarray:
    """Distance on R/Z, elementwise."""
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(center, dtype=float)) % 1.0
    return np.minimum(d, 1.0 - d)


def wrapped_difference(x: float, center: float) -> float:
    """x - center reduced to [-1/2, 1/2)."""
    return (x - center + 0.5) % 1.0 - 0.5


def periodic_box_bump(coords: np.ndarray, center, half_width: float) -> np.ndarray:
    """Product of per-axis plateaus B(d_a / h); an axis with h >= 1/2 contributes 1."""
    if half_width >= 0.5:
        return np.ones(coords.shape[0])
    d = circle_distance(coords, np.asarray(center, dtype=float)[None, :])
    return np.prod(plateau(d / half_width), axis=1)


def spectral_derivative(values: np.ndarray, order: int) -> np.ndarray:
    """
    d^order/dx^order of periodic samples on [0, 1) by FFT.
    The Nyquist mode is dropped for odd orders.
    """
    n = len(values)
    if order == 0:
        return np.asarray(values, dtype=float).copy()
    wavenumbers = 2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / n)
    multiplier = (1j * wavenumbers) ** order
    if order % 2 == 1 and n % 2 == 0:
        multiplier[n // 2] = 0.0
    return np.real(np.fft.ifft(multiplier * np.fft.fft(values)))
