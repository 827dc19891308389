"""Row-equilibrated determinants for stacks of small matrices.

The spacing determinants mix factorial prefactors with exponentially large
Laguerre/Bessel values, so rows are rescaled by their largest magnitude
before LU factorisation and the scales re-applied in log space.
"""

from __future__ import annotations

import numpy as np


def slogdet_rowscaled(mats):
    """(sign, log|det|) for an (..., M, M) stack with per-row equilibration."""
    mats = np.asarray(mats, dtype=float)
    scale = np.max(np.abs(mats), axis=-1)
    zero_row = scale == 0.0
    safe = np.where(zero_row, 1.0, scale)
    sign, logdet = np.linalg.slogdet(mats / safe[..., None])
    logdet = logdet + np.sum(np.log(safe), axis=-1)
    sign = np.where(np.any(zero_row, axis=-1), 0.0, sign)
    logdet = np.where(np.any(zero_row, axis=-1), -np.inf, logdet)
    return sign, logdet


def det_rowscaled(mats):
    """Determinants of an (..., M, M) stack via slogdet_rowscaled."""
    sign, logdet = slogdet_rowscaled(mats)
    with np.errstate(over="ignore"):
        return sign * np.exp(logdet)


def slogdet_logentries(logmag, sign):
    """(sign, log|det|) for matrices given entrywise as (log-magnitude, sign).

    Entries may represent numbers far beyond double range; each row is
    shifted by its maximum log-magnitude before exponentiation.
    """
    logmag = np.asarray(logmag, dtype=float)
    sign = np.asarray(sign, dtype=float)
    rowmax = np.max(logmag, axis=-1)
    rowmax = np.where(np.isfinite(rowmax), rowmax, 0.0)
    mats = sign * np.exp(logmag - rowmax[..., None])
    dsign, dlog = np.linalg.slogdet(mats)
    return dsign, dlog + np.sum(rowmax, axis=-1)


def condition_estimate(mat):
    """2-norm condition number of one row-equilibrated matrix."""
    mat = np.asarray(mat, dtype=float)
    scale = np.max(np.abs(mat), axis=-1, keepdims=True)
    scale = np.where(scale == 0, 1.0, scale)
    return float(np.linalg.cond(mat / scale))
