"""Envelope normalization and moment estimation with block bootstrap errors.

The complex envelope of channel k is S_k = (x_k + i p_k)/sqrt(2 g_k) with
the effective chain gain g_k; with that normalization S_k equals the
splitter-output mode plus one unit-commutator noise ladder operator.  The
measured quadratures commute, so envelope
moments of any order are plain averages over shots; statistical errors come
from splitting the record into equal blocks and taking the spread of the
block means.
"""

import math

import numpy as np

from . import kernels
from .sampling import split_blocks
from .states import mode_operator_form, moments_of_linear_forms
from .tables import JointMomentTable, MomentTable

__all__ = [
    "envelopes",
    "estimate_moments",
    "estimate_moments_blockwise",
    "estimate_channel_moments",
    "estimate_channel_moments_blockwise",
    "exact_envelope_moments",
    "exact_channel_moments",
    "block_errors",
]

DEFAULT_BLOCKS = 20


def envelopes(batch):
    """Complex envelope records, one column per channel."""
    out = np.empty((batch.n_shots, batch.n_channels), dtype=np.complex128)
    for k in range(batch.n_channels):
        root = math.sqrt(2.0 * batch.gains[k])
        out[:, k] = (batch.data[:, 2 * k] + 1j * batch.data[:, 2 * k + 1]) / root
    return out


def block_errors(block_values, axis=0):
    """Standard error of the mean from per-block values.

    Complex spreads combine real and imaginary variances, so the error is a
    single non-negative scalar per entry.
    """
    blocks = np.asarray(block_values)
    n = blocks.shape[axis]
    if n < 2:
        raise ValueError("need at least two blocks for an error estimate")
    var = np.var(blocks.real, axis=axis, ddof=1) + np.var(
        blocks.imag, axis=axis, ddof=1
    )
    return np.sqrt(var / n)


def _joint_sums(batch, max_order):
    env = envelopes(batch)
    return kernels.joint_power_sums(env[:, 0], env[:, 1], max_order)


def _channel_sums(batch, channel, max_order):
    env = envelopes(batch)
    return kernels.channel_power_sums(env[:, channel], max_order)


def estimate_moments_blockwise(batch, max_order=4, n_blocks=DEFAULT_BLOCKS):
    """Joint envelope moment table plus the per-block tables.

    Returns (table, blocks); the point table carries block bootstrap errors
    and the block tables are the ingredients for block-wise reconstruction.
    """
    if batch.n_channels != 2:
        raise ValueError("joint moment estimation needs a two-channel batch")
    parts = split_blocks(batch, n_blocks)
    size = parts[0].n_shots
    block_sums = [_joint_sums(part, max_order) for part in parts]
    total = np.sum(block_sums, axis=0) / batch.n_shots
    point = JointMomentTable(max_order, data=total, n_shots=batch.n_shots)
    blocks = [
        JointMomentTable(max_order, data=s / size, n_shots=size) for s in block_sums
    ]
    if n_blocks >= 2:
        point.errors = block_errors(np.stack([b.data for b in blocks]))
        point.errors[0, 0, 0, 0] = 0.0
    return point, blocks


def estimate_moments(batch, max_order=4, n_blocks=DEFAULT_BLOCKS):
    """Joint envelope moment table with block bootstrap standard errors."""
    point, _ = estimate_moments_blockwise(batch, max_order, n_blocks)
    return point


def estimate_channel_moments_blockwise(
    batch, channel=0, max_order=4, n_blocks=DEFAULT_BLOCKS
):
    """Single-channel envelope table <Sdag^l S^m> plus per-block tables."""
    if not 0 <= channel < batch.n_channels:
        raise ValueError(f"channel {channel} out of range")
    parts = split_blocks(batch, n_blocks)
    size = parts[0].n_shots
    block_sums = [_channel_sums(part, channel, max_order) for part in parts]
    total = np.sum(block_sums, axis=0) / batch.n_shots
    point = MomentTable(max_order, data=total)
    blocks = [MomentTable(max_order, data=s / size) for s in block_sums]
    if n_blocks >= 2:
        point.errors = block_errors(np.stack([b.data for b in blocks]))
        point.errors[0, 0] = 0.0
    return point, blocks


def estimate_channel_moments(batch, channel=0, max_order=4, n_blocks=DEFAULT_BLOCKS):
    """Single-channel envelope moment table with block bootstrap errors."""
    point, _ = estimate_channel_moments_blockwise(batch, channel, max_order, n_blocks)
    return point


def _envelope_forms(model):
    """Coefficient rows of S_k and S_k^dag over the measured quadratures."""
    n_modes = model.measured.num_modes
    forms = []
    for k in range(n_modes):
        root = math.sqrt(model.effective_gains[k])
        s = mode_operator_form(n_modes, k, dagger=False) / root
        forms.append((np.conj(s), s))
    return forms


def exact_envelope_moments(model, max_order=4):
    """Joint envelope moments implied by the model's measured Gaussian.

    The measured quadratures commute, so the classical Isserlis pairing (the
    plain covariance, no symplectic part) gives every envelope moment.
    """
    if model.n_channels != 2:
        raise ValueError("exact joint moments need a two-channel model")
    (c1, s1), (c2, s2) = _envelope_forms(model)
    table = JointMomentTable(max_order)
    mean = model.measured.mean
    cov = model.measured.cov
    for l1, m1, l2, m2 in table.indices():
        forms = [c1] * l1 + [s1] * m1 + [c2] * l2 + [s2] * m2
        table.data[l1, m1, l2, m2] = moments_of_linear_forms(mean, cov, forms)
    return table


def exact_channel_moments(model, channel=0, max_order=4):
    """Single-channel envelope moments implied by the measured Gaussian."""
    if not 0 <= channel < model.n_channels:
        raise ValueError(f"channel {channel} out of range")
    conj_form, form = _envelope_forms(model)[channel]
    table = MomentTable(max_order)
    for (l, m), _ in table.items():
        forms = [conj_form] * l + [form] * m
        table.data[l, m] = moments_of_linear_forms(
            model.measured.mean, model.measured.cov, forms
        )
    return table
