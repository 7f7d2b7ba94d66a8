#!/usr/bin/env python3
"""Regenerates the frozen SSIM reference values used by test_metrics.cpp.

SSIM is computed straight from the published formula with an 11x11 Gaussian
window (sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1) and replicate
('nearest') boundary handling, using scipy.ndimage.correlate as the windowing
engine. The test images are closed-form sine patterns that the C++ test
reproduces digit for digit, so the frozen values exercise the full pipeline.
"""

import numpy as np
from scipy import ndimage


def window_kernel(sigma=1.5, radius=5):
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k1 = np.exp(-(x * x) / (2.0 * sigma * sigma))
    k2 = np.outer(k1, k1)
    return k2 / k2.sum()


def ssim(a, b):
    kernel = window_kernel()

    def filt(img):
        return ndimage.correlate(img, kernel, mode="nearest")

    c1, c2 = 0.01**2, 0.03**2
    mu_a, mu_b = filt(a), filt(b)
    aa, bb, ab = filt(a * a), filt(b * b), filt(a * b)
    var_a = aa - mu_a * mu_a
    var_b = bb - mu_b * mu_b
    cov = ab - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float((num / den).mean())


def reference_pair(t):
    w, h = 16 + 2 * t, 16 + (3 * t) % 7
    r = np.arange(h, dtype=np.float64)[:, None]
    c = np.arange(w, dtype=np.float64)[None, :]
    a = 0.5 + 0.4 * np.sin(0.31 * r + 0.17 * t) * np.cos(0.23 * c - 0.11 * t)
    b = np.clip(a + 0.12 * np.sin(0.41 * r - 0.27 * c + 0.5 * t), 0.0, 1.0)
    return a, b


if __name__ == "__main__":
    for t in range(10):
        a, b = reference_pair(t)
        print(f"{ssim(a, b):.12f},  // pair {t} ({a.shape[1]}x{a.shape[0]})")
