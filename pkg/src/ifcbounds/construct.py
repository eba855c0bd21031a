"""Channel families with exactly known sum capacity.

`build_z_channel` turns any feasible noise correlation into an
upper-triangular gain matrix for which the correlated-noise bound provably
collapses onto the interference-as-noise ladder: column k (k = K..2) is

    H[1:k-1, k] = (h_kk / (1 + ||H[k, k+1:]||^2)) * (rho_{k-1} + H[1:k-1, k+1:] H[k, k+1:]^H)

with rho_{k-1} the first k-1 entries of sigma's column k.  The product's
second factor is conjugated (forming a column); that convention is the one
under which the degradedness identity holds, and every construction is
checked against the witness before being returned, so a convention or
feasibility slip fails loudly instead of producing a quietly wrong channel.

`many_to_one` (only receiver 1 suffers interference) and `rank_one_channel`
(all rows proportional) are the two special cases with closed-form capacity
used by the certificate paths.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .certify import degradedness_witness
from .errors import (
    ConditionViolated,
    NonPositiveDiagonal,
    NonStandardDiagonal,
    NotSorted,
    WitnessFailure,
)
from .model import ChannelMatrix, NoiseCorrelation, validate_channel, validate_noise_correlation


def _positive_gains(diag_gains: Sequence[float], K: int) -> np.ndarray:
    g = np.asarray(diag_gains, dtype=float)
    if g.shape != (K,):
        raise NonPositiveDiagonal(f"expected {K} diagonal gains, got shape {g.shape}")
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise NonPositiveDiagonal("diagonal gains must be finite and strictly positive")
    return g


def build_z_channel(noise: NoiseCorrelation, diag_gains: Sequence[float]) -> ChannelMatrix:
    """Upper-triangular channel whose sum capacity is the ladder value.

    The recursion fills columns right to left, so each column sees the
    already-built tail of its own row.  The output is validated by the
    degradedness witness under the generating correlation.
    """
    K = noise.K
    g = _positive_gains(diag_gains, K)
    sigma = noise.sigma
    H = np.zeros((K, K), dtype=complex)
    np.fill_diagonal(H, g)
    for k in range(K, 1, -1):
        tail = H[k - 1, k:]
        t2 = float(np.sum(np.abs(tail) ** 2))
        rho = sigma[:k - 1, k - 1]
        col = rho.copy()
        if tail.size:
            col = col + H[:k - 1, k:] @ tail.conj()
        H[:k - 1, k - 1] = (g[k - 1] / (1.0 + t2)) * col
    ch = validate_channel(H)
    report = degradedness_witness(ch, noise)
    if not report.passed:
        raise WitnessFailure(
            f"constructed channel failed the degradedness check "
            f"(max residual {report.max_residual():.3e})")
    return ch


def many_to_one(v: Sequence[complex], diag_gains: Sequence[float],
                strict: bool = True) -> ChannelMatrix:
    """Channel where only receiver 1 is interfered: h_{1,k} = v_k h_{k,k}.

    The ladder value is the sum capacity when sum |v_k|^2 <= 1; `strict`
    enforces that condition (disable it to build the channel anyway, with no
    capacity claim attached).
    """
    v = np.asarray(v, dtype=complex)
    K = v.shape[0] + 1
    g = _positive_gains(diag_gains, K)
    power = float(np.sum(np.abs(v) ** 2))
    if strict and power > 1.0 + 1e-12:
        raise ConditionViolated(
            f"sum |v_k|^2 = {power:.6f} > 1; pass strict=False to build anyway")
    H = np.zeros((K, K), dtype=complex)
    np.fill_diagonal(H, g)
    H[0, 1:] = v * g[1:]
    return validate_channel(H)


def many_to_one_noise(v: Sequence[complex]) -> NoiseCorrelation:
    """The noise correlation whose recursion reproduces many_to_one(v, ...):
    couples noise 1 to each other noise with coefficient v_k."""
    v = np.asarray(v, dtype=complex)
    K = v.shape[0] + 1
    sigma = np.eye(K, dtype=complex)
    sigma[0, 1:] = v
    sigma[1:, 0] = v.conj()
    return validate_noise_correlation(sigma)


def rank_one_channel(a: Sequence[complex], b: Sequence[complex]) -> ChannelMatrix:
    """Unit-rank channel h_{i,j} = a_i b_j^*.

    Requires |a_1| <= ... <= |a_K| (the receiver ordering the capacity
    argument relies on) and a real, strictly positive diagonal a_k b_k^*.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 1 or a.shape[0] < 1:
        raise NonStandardDiagonal("a and b must be equal-length nonempty vectors")
    mags = np.abs(a)
    if np.any(mags[:-1] > mags[1:]):
        raise NotSorted("entries of a must be sorted by magnitude, ascending")
    diag = a * b.conj()
    if np.any(np.abs(diag.imag) > 1e-12 * np.maximum(1.0, np.abs(diag.real))):
        raise NonStandardDiagonal("a_k b_k^* must be real (phase-align a and b first)")
    if np.any(diag.real <= 0):
        raise NonStandardDiagonal("a_k b_k^* must be strictly positive")
    return validate_channel(np.outer(a, b.conj()))
