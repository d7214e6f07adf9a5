"""Pure-numpy implementations of the hot sampler kernels.

`bitemper.kernels` re-exports either these or the compiled extension with the
same signatures.  Everything here operates on raw arrays: `bits` is the uint8
coordinate vector of the current state, `dists` the int64 vector of L1
distances to each mode, `modes` the (m, p) uint8 mode matrix.
"""
from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

# balancing-kind codes shared with the compiled kernels
KIND_MIN = 0
KIND_SQRT = 1
KIND_BOUNDED_SQRT = 2
KIND_MAX = 3


def _logsumexp(a: np.ndarray, axis=None):
    amax = np.max(a, axis=axis, keepdims=True)
    out = amax + np.log(np.sum(np.exp(a - amax), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis) if axis is not None else float(out.ravel()[0])


def log_ratios(bits, dists, modes, theta, beta, out):
    """Fill ``out[i]`` with log pi^beta(flip i) - log pi^beta(x).

    Uses the +-1 distance update: flipping coordinate i moves distance to
    mode j by +1 when the current bit agrees with the mode's bit, else -1.
    """
    sign = np.where(modes.T == bits[:, None], 1, -1)  # (p, m)
    cur = -theta * dists  # (m,)
    base = _logsumexp(cur)
    a = cur[None, :] - theta * sign
    np.subtract(_logsumexp(a, axis=1), base, out=out)
    out *= beta
    return out


def single_log_ratio(bits, dists, modes, theta, beta, i):
    """Log ratio for flipping coordinate i only (one target evaluation)."""
    sign = np.where(modes[:, i] == bits[i], 1, -1)
    cur = -theta * dists
    return beta * (_logsumexp(cur - theta * sign) - _logsumexp(cur))


def log_h(log_r, kind, log_gamma):
    """Log of the balancing function applied to exp(log_r), elementwise."""
    scalar = np.ndim(log_r) == 0
    log_r = np.asarray(log_r, dtype=np.float64)
    if kind == KIND_MIN:
        out = np.minimum(0.0, log_r)
    elif kind == KIND_MAX:
        out = np.maximum(0.0, log_r)
    elif kind == KIND_SQRT:
        out = 0.5 * log_r
    elif kind == KIND_BOUNDED_SQRT:
        out = np.minimum(np.minimum(0.0, log_r), 0.5 * log_r - log_gamma)
    else:
        raise ValueError(f"unknown balancing kind code {kind}")
    return float(out) if scalar else out


def informed_step(log_r, kind, log_gamma, u):
    """Escape probability, neighbor choice and bound statistic in one pass.

    Returns ``(choice, z, max_abs_log_r)`` where ``choice`` is the flip index
    drawn with probability proportional to h(ratio) using the uniform draw
    ``u``, and ``z`` is the mean of h over the p neighbors.
    """
    h = np.exp(log_h(log_r, kind, log_gamma))
    total = float(h.sum())
    z = total / log_r.size
    if total <= 0.0 or not math.isfinite(total):
        return -1, z, float(np.max(np.abs(log_r)))
    cum = np.cumsum(h)
    choice = int(np.searchsorted(cum, u * total, side="right"))
    choice = min(choice, log_r.size - 1)
    return choice, z, float(np.max(np.abs(log_r)))


def ssiit_advance(bits, dists, modes, theta, beta, log_gamma, adapt,
                  stat_coeff, u_prop, u_acc, kind):
    """Run len(u_prop) single-proposal steps in place.

    Each step proposes a uniform coordinate flip, optionally updates the
    bound from that single ratio (candidate log-bound is ``stat_coeff`` times
    the absolute log ratio), and accepts with probability h(ratio).  ``u_acc``
    entries must lie in (0, 1].  Returns ``(log_gamma, n_accept)``.
    """
    p = bits.size
    n_accept = 0
    for k in range(u_prop.size):
        i = int(u_prop[k] * p)
        if i >= p:
            i = p - 1
        lr = single_log_ratio(bits, dists, modes, theta, beta, i)
        if adapt and stat_coeff * abs(lr) > log_gamma:
            log_gamma = stat_coeff * abs(lr)
        lh = float(log_h(lr, kind, log_gamma))
        if math.log(u_acc[k]) < lh:
            dists += np.where(modes[:, i] == bits[i], 1, -1)
            bits[i] ^= 1
            n_accept += 1
    return log_gamma, n_accept
