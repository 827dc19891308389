"""Monte-Carlo sampling of the quenched chi-GUE.

Each configuration is an n x (n+nu) matrix of independent complex Gaussians
with E|W_ij|^2 = 1 (real and imaginary parts of variance 1/2), so the
squared singular values carry the weight x^(2 nu + 1) exp(-x^2) the analytic
formulas use.  Configuration index i draws from its own counter-derived
substream (seed, i), which makes the sample stream identical for any worker
count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .refstats import Histogram

_EIG_MAX_N = 200  # above this, bidiagonalisation SVD instead of W W^dagger


@dataclass(frozen=True)
class EnsembleConfig:
    n: int
    nu: int = 0
    n_conf: int = 1
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.n < 1 or self.nu < 0 or self.n_conf < 1 or self.workers < 1:
            raise ValueError("need n >= 1, nu >= 0, n_conf >= 1, workers >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class SpectrumSample:
    """Sorted positive singular values of one configuration."""

    values: np.ndarray
    retries: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or np.any(v <= 0) or np.any(np.diff(v) < 0):
            raise ValueError("values must be sorted ascending and positive")
        object.__setattr__(self, "values", v)


def _rng(seed, index, retry=0):
    key = (index,) if retry == 0 else (index, retry)
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence(entropy=seed, spawn_key=key)))


def _draw(rng, n, nu):
    re = rng.standard_normal((n, n + nu))
    im = rng.standard_normal((n, n + nu))
    return (re + 1j * im) * np.sqrt(0.5)


def sample_spectrum(config, index):
    """Singular values of configuration `index` (deterministic in
    (seed, index)); eigensolver failures redraw from a retry substream."""
    if not (0 <= index < config.n_conf):
        raise ValueError("configuration index out of range")
    for retry in range(5):
        w = _draw(_rng(config.seed, index, retry), config.n, config.nu)
        try:
            if config.n <= _EIG_MAX_N:
                lam = np.linalg.eigvalsh(w @ w.conj().T)
                vals = np.sqrt(np.maximum(lam, 0.0))
            else:
                vals = np.linalg.svd(w, compute_uv=False)[::-1].copy()
            vals.sort()
            return SpectrumSample(vals, retries=retry)
        except np.linalg.LinAlgError:
            continue
    raise RuntimeError(f"eigensolver failed 5 times for configuration {index}")


def kth_spacing(sample, k):
    """x_{k+1} - x_k of a sorted sample (1-based k)."""
    v = sample.values
    if not (1 <= k <= len(v) - 1):
        raise ValueError(f"k must be in 1..{len(v) - 1}")
    return float(v[k] - v[k - 1])


def spacing_samples(config, ks):
    """Spacings for each requested k across all configurations.

    Returns {k: array of n_conf spacings}, bit-identical for any worker
    count (results land in index order).
    """
    ks = sorted(set(int(k) for k in ks))
    if any(k < 1 or k > config.n - 1 for k in ks):
        raise ValueError("every k must be in 1..n-1")
    out = np.empty((len(ks), config.n_conf))

    def work(lo, hi):
        for i in range(lo, hi):
            v = sample_spectrum(config, i).values
            for j, k in enumerate(ks):
                out[j, i] = v[k] - v[k - 1]

    if config.workers == 1:
        work(0, config.n_conf)
    else:
        chunk = -(-config.n_conf // config.workers)
        bounds = [(i, min(i + chunk, config.n_conf))
                  for i in range(0, config.n_conf, chunk)]
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            list(pool.map(lambda b: work(*b), bounds))
    return {k: out[j].copy() for j, k in enumerate(ks)}


def build_histogram(spacings, bin_width):
    """Probability-mass histogram from 0 to the largest spacing."""
    spacings = np.asarray(spacings, dtype=float)
    if spacings.size == 0:
        raise ValueError("no spacings to bin")
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    nbins = max(int(np.ceil(spacings.max() / bin_width)), 1)
    edges = np.arange(nbins + 1) * bin_width
    counts, _ = np.histogram(spacings, bins=edges)
    return Histogram(edges, counts / spacings.size, n_conf=spacings.size)


def unfold_histogram(hist):
    """Rescale edges so the empirical first moment equals one."""
    m = hist.first_moment
    if m <= 0:
        raise ValueError("histogram first moment must be positive")
    return Histogram(hist.edges / m, hist.masses, n_conf=hist.n_conf)


def spacing_histogram(config, k, target_bin_width=0.2):
    """The full pipeline for one k: sample, bin, unfold.

    The raw bin width is target_bin_width times the empirical mean, so that
    after unfolding the bins have width about target_bin_width.
    Returns (unfolded Histogram, raw spacings array).
    """
    spac = spacing_samples(config, [k])[k]
    raw_bw = target_bin_width * float(np.mean(spac))
    return unfold_histogram(build_histogram(spac, raw_bw)), spac
