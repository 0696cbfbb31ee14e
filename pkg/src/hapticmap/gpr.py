"""Exact Gaussian process regression with a squared-exponential kernel."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

MAX_JITTER = 1e-6  # relative to the signal variance
_PREDICT_CHUNK = 2048


class GprFitError(RuntimeError):
    pass


def se_kernel(a, b, signal_var: float, length_scale: float) -> np.ndarray:
    d2 = cdist(np.asarray(a, dtype=float), np.asarray(b, dtype=float), "sqeuclidean")
    return signal_var * np.exp(-0.5 * d2 / length_scale ** 2)


@dataclass(frozen=True, eq=False)
class GprModel:
    inputs: np.ndarray
    targets: np.ndarray
    signal_var: float
    length_scale: float
    noise_var: float
    jitter: float  # extra diagonal actually needed for the factorization
    _chol: tuple
    _alpha: np.ndarray

    def predict(self, points, return_var: bool = False):
        """Posterior mean (and optionally variance) at ``points``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        mean = np.empty(len(pts))
        var = np.empty(len(pts)) if return_var else None
        for start in range(0, len(pts), _PREDICT_CHUNK):
            block = pts[start:start + _PREDICT_CHUNK]
            k_star = se_kernel(block, self.inputs, self.signal_var, self.length_scale)
            mean[start:start + len(block)] = k_star @ self._alpha
            if return_var:
                v = linalg.solve_triangular(self._chol[0], k_star.T, lower=True, check_finite=False)
                var[start:start + len(block)] = np.maximum(
                    self.signal_var - np.einsum("ij,ij->j", v, v), 0.0)
        return (mean, var) if return_var else mean


def fit_gpr(inputs, targets, signal_var: float, length_scale: float, noise_var: float) -> GprModel:
    """Condition a zero-mean SE-kernel GP on ``(inputs, targets)``.

    If the Cholesky factorization fails, diagonal jitter is escalated by
    decades from 1e-12 up to :data:`MAX_JITTER` times ``signal_var``.
    """
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(targets, dtype=float).ravel()
    if len(x) == 0 or len(x) != len(y):
        raise ValueError(f"need matching, non-empty inputs and targets ({len(x)} vs {len(y)})")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
        raise ValueError("GPR training data must be finite")
    if not (signal_var > 0 and length_scale > 0 and noise_var >= 0):
        raise ValueError("need signal_var > 0, length_scale > 0, noise_var >= 0")

    k = se_kernel(x, x, signal_var, length_scale)
    k[np.diag_indices_from(k)] += noise_var
    jitters = [0.0] + [signal_var * 10.0 ** e for e in range(-12, int(np.log10(MAX_JITTER)) + 1)]
    for jitter in jitters:
        try:
            kj = k.copy()
            kj[np.diag_indices_from(kj)] += jitter
            chol = linalg.cho_factor(kj, lower=True, overwrite_a=True, check_finite=False)
            break
        except linalg.LinAlgError:
            continue
    else:
        raise GprFitError(f"kernel matrix not positive definite even with {MAX_JITTER:g} relative jitter")
    alpha = linalg.cho_solve(chol, y, check_finite=False)
    return GprModel(x, y, float(signal_var), float(length_scale), float(noise_var), jitter, chol, alpha)
