"""Envelope moment estimation against the exact measured-record Gaussian."""

import numpy as np
import pytest

from dualpath.chain import ChainConfig, build_dual_path, build_single_path
from dualpath.moments import (
    block_errors,
    envelopes,
    estimate_channel_moments,
    estimate_channel_moments_blockwise,
    estimate_moments,
    estimate_moments_blockwise,
    exact_channel_moments,
    exact_envelope_moments,
)
from dualpath.sampling import ShotBatch, sample
from dualpath.states import coherent, squeezed_vacuum


CFG = ChainConfig(g1=100.0, g2=120.0, n_amp1=2.0, n_amp2=3.0)


def test_envelope_normalization():
    data = np.array([[3.0, 4.0, 1.0, -1.0]])
    batch = ShotBatch(data, gains=(2.0, 8.0), seed=0)
    env = envelopes(batch)
    assert np.isclose(env[0, 0], (3.0 + 4.0j) / 2.0)
    assert np.isclose(env[0, 1], (1.0 - 1.0j) / 4.0)


def test_estimates_track_exact_moments():
    model = build_dual_path(squeezed_vacuum(0.5j), CFG)
    batch = sample(model, 150000, seed=31)
    point, blocks = estimate_moments_blockwise(batch, 3, 20)
    exact = exact_envelope_moments(model, 3)
    assert len(blocks) == 20
    for idx, value in point.items():
        if idx == (0, 0, 0, 0):
            assert value == 1.0
            continue
        err = point.error(*idx)
        assert err > 0
        assert abs(value - exact.entry(*idx)) < 6 * err, idx


def test_estimate_channel_moments_match_exact():
    model = build_single_path(coherent(0.8 - 0.2j), CFG)
    batch = sample(model, 100000, seed=32)
    point, blocks = estimate_channel_moments_blockwise(batch, 0, 4, 10)
    exact = exact_channel_moments(model, 0, 4)
    for (l, m), value in point.items():
        if (l, m) == (0, 0):
            continue
        assert abs(value - exact.entry(l, m)) < 6 * point.error(l, m), (l, m)


def test_point_estimate_is_mean_of_blocks():
    # equal blocks, so the full-record moment is the block average
    model = build_dual_path(squeezed_vacuum(0.3), CFG)
    batch = sample(model, 20000, seed=33)
    point, blocks = estimate_moments_blockwise(batch, 2, 10)
    stacked = np.stack([b.data for b in blocks])
    assert np.allclose(stacked.mean(axis=0), point.data, atol=1e-12)


def test_constant_record_has_zero_error():
    data = np.tile([1.0, 2.0], (400, 1))
    batch = ShotBatch(data, gains=(2.0,), seed=0)
    point, _ = estimate_channel_moments_blockwise(batch, 0, 2, 8)
    assert point.error(1, 1) == 0
    env = (1.0 + 2.0j) / 2.0
    assert np.isclose(point.entry(1, 1), abs(env) ** 2)


def test_block_errors_scale():
    rng = np.random.default_rng(0)
    values = rng.normal(size=50) + 1j * rng.normal(size=50)
    err = block_errors(values)
    expected = np.sqrt(
        (np.var(values.real, ddof=1) + np.var(values.imag, ddof=1)) / 50
    )
    assert np.isclose(err, expected)
    with pytest.raises(ValueError):
        block_errors(values[:1])


def test_moment_estimates_are_deterministic():
    model = build_dual_path(squeezed_vacuum(0.5j), CFG)
    batch = sample(model, 30000, seed=34)
    a = estimate_moments(batch, 4)
    b = estimate_moments(batch, 4)
    assert np.array_equal(a.data, b.data)
    assert np.array_equal(a.errors, b.errors)


def test_estimated_table_conjugation_residual_small():
    model = build_dual_path(squeezed_vacuum(0.5j), CFG)
    batch = sample(model, 50000, seed=35)
    table = estimate_moments(batch, 4)
    # estimated from the same record, conjugate pairs agree exactly
    assert table.conjugation_residual() < 1e-12
    single = estimate_channel_moments(batch, 1, 4)
    assert single.conjugation_residual() < 1e-12


def test_exact_moments_need_matching_channel_count():
    model = build_single_path(coherent(1.0), CFG)
    with pytest.raises(ValueError):
        exact_envelope_moments(model, 2)
    dual = build_dual_path(coherent(1.0), CFG)
    with pytest.raises(ValueError):
        exact_channel_moments(dual, 5, 2)
