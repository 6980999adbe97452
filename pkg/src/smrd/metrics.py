"""PSNR and SSIM on magnitude images.

Both metrics compare |ref| against |test| (global phase is invisible) with
the dynamic range taken from the reference, which is the common reporting
convention for complex MR images.
"""

from __future__ import annotations

import numpy as np

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _magnitudes(ref: np.ndarray, test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ref = np.asarray(ref)
    test = np.asarray(test)
    if ref.shape != test.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {test.shape}")
    return np.abs(ref), np.abs(test)


def psnr(ref: np.ndarray, test: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical magnitudes."""
    a, b = _magnitudes(ref, test)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return float("inf")
    peak = float(a.max())
    return float(20.0 * np.log10(peak / np.sqrt(mse)))


def _gaussian_kernel() -> np.ndarray:
    offsets = np.arange(SSIM_WINDOW) - SSIM_WINDOW // 2
    g = np.exp(-(offsets**2) / (2.0 * SSIM_SIGMA**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # separable valid-mode convolution, rows then columns
    k = len(kernel)
    rows = sum(kernel[i] * img[i : img.shape[0] - k + 1 + i, :] for i in range(k))
    return sum(kernel[i] * rows[:, i : img.shape[1] - k + 1 + i] for i in range(k))


def ssim(ref: np.ndarray, test: np.ndarray) -> float:
    """Mean local SSIM (11x11 Gaussian window, sigma 1.5, K1=0.01, K2=0.03)
    over all fully interior windows; dynamic range is max |ref|."""
    a, b = _magnitudes(ref, test)
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(
            f"image {a.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    dyn = float(a.max())
    c1 = (SSIM_K1 * dyn) ** 2
    c2 = (SSIM_K2 * dyn) ** 2

    kernel = _gaussian_kernel()
    mu_a = _filter_valid(a, kernel)
    mu_b = _filter_valid(b, kernel)
    var_a = _filter_valid(a * a, kernel) - mu_a * mu_a
    var_b = _filter_valid(b * b, kernel) - mu_b * mu_b
    cov = _filter_valid(a * b, kernel) - mu_a * mu_b

    ssim_map = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return float(ssim_map.mean())
