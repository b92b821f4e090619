"""Receiver chain maps: splitter, amplifier, loss, readout, noise budgets."""

import math

import numpy as np
import pytest

from dualpath.chain import (
    ChainConfig,
    amplifier,
    beam_splitter,
    build_dual_path,
    build_single_path,
    effective_noise_occupation,
    envelope_noise_occupation,
    iq_readout,
    iq_readout_map,
    loss,
    raw_noise_occupation,
)
from dualpath.moments import exact_channel_moments, exact_envelope_moments
from dualpath.states import (
    coherent,
    joint_wick_moments,
    squeezed_vacuum,
    symplectic_form,
    tensor,
    thermal,
    vacuum,
    wick_moments,
)


def test_splitter_conserves_photon_number():
    for state in (coherent(1 + 2j), squeezed_vacuum(0.7j), thermal(1.5)):
        pair = tensor(state, thermal(0.4))
        before = joint_wick_moments(pair, (0, 1), 2)
        after = joint_wick_moments(beam_splitter(pair), (0, 1), 2)
        n_before = before.entry(1, 1, 0, 0) + before.entry(0, 0, 1, 1)
        n_after = after.entry(1, 1, 0, 0) + after.entry(0, 0, 1, 1)
        assert abs(n_before - n_after) < 1e-10


def test_splitter_output_modes():
    alpha = 0.8 - 0.5j
    split = beam_splitter(tensor(coherent(alpha), vacuum()))
    table = joint_wick_moments(split, (0, 1), 1)
    root = 1.0 / math.sqrt(2.0)
    assert np.isclose(table.entry(0, 1, 0, 0), alpha * root, atol=1e-12)
    assert np.isclose(table.entry(0, 0, 0, 1), -alpha * root, atol=1e-12)


def test_amplifier_photon_number():
    g, n_amp, n_in = 40.0, 3.0, 1.2
    out = amplifier(thermal(n_in), 0, g, n_amp)
    table = wick_moments(out, 0, 2)
    expected = g * n_in + (g - 1.0) * (n_amp + 1.0)
    assert np.isclose(table.entry(1, 1), expected, atol=1e-10)


def test_amplifier_scales_mean():
    g = 25.0
    out = amplifier(coherent(1 - 0.5j), 0, g, 0.0)
    assert np.allclose(out.mean, math.sqrt(g) * coherent(1 - 0.5j).mean)


def test_amplifier_needs_gain_above_one():
    with pytest.raises(ValueError):
        amplifier(vacuum(), 0, 1.0, 0.0)


def test_loss_attenuates_mean_and_occupation():
    eta, n_env = 0.6, 2.0
    out = loss(coherent(2.0), 0, eta, n_env)
    assert np.allclose(out.mean, math.sqrt(eta) * coherent(2.0).mean)
    n_out = wick_moments(out, 0, 2).entry(1, 1)
    expected = eta * 4.0 + (1.0 - eta) * n_env
    assert np.isclose(n_out, expected, atol=1e-10)


def test_iq_readout_record_commutes():
    t = iq_readout_map(2)
    omega = symplectic_form(4)
    assert np.allclose(t @ omega @ t.T, 0.0, atol=1e-14)


def test_iq_readout_preserves_means():
    state = tensor(coherent(1 + 1j), coherent(-2j))
    measured = iq_readout(state, (0.0, 0.0))
    assert np.allclose(measured.mean, state.mean)


def test_effective_noise_closed_forms():
    g, eta, n_l, n_a = 100.0, 0.7, 0.3, 5.0
    before = effective_noise_occupation(g, n_a, eta, "before_amp", n_l)
    c_loss = (1.0 - eta) / (eta - 1.0 / g)
    c_amp = (1.0 - 1.0 / g) / (eta - 1.0 / g)
    assert np.isclose(before, c_loss * (n_l + 1.0) + c_amp * n_a, atol=1e-12)
    after = effective_noise_occupation(g, n_a, eta, "after_amp", n_l)
    denom = g * eta - 1.0
    assert np.isclose(
        after,
        (1.0 - eta) / denom * (n_l + 1.0) + eta * (g - 1.0) / denom * n_a,
        atol=1e-12,
    )
    plain = effective_noise_occupation(g, n_a)
    assert np.isclose(plain, n_a, atol=1e-12)


def test_loss_placement_inequality_and_gap():
    # the same physical elements produce more effective noise when the loss
    # sits before the amplifier; the gap has a closed form
    for g in (5.0, 100.0, 1e4):
        for eta in (0.4, 0.8, 0.99):
            if g * eta <= 1.0:
                continue
            for n_l in (0.0, 1.0):
                for n_a in (0.0, 10.0):
                    before = effective_noise_occupation(g, n_a, eta, "before_amp", n_l)
                    after = effective_noise_occupation(g, n_a, eta, "after_amp", n_l)
                    gap = (g - 1.0) * (1.0 - eta) * (n_l + 1.0 + n_a) / (g * eta - 1.0)
                    assert before >= after - 1e-12
                    assert np.isclose(before - after, gap, rtol=1e-10)


def test_envelope_moments_follow_noise_budget():
    # <S^dag S> of a vacuum input run is <V V^dag> = n_env + 1, for every
    # loss placement and with IQ ancilla heating
    for placement, eta in (("none", None), ("before_amp", 0.8), ("after_amp", 0.8)):
        cfg = ChainConfig(
            g1=200.0,
            g2=150.0,
            n_amp1=4.0,
            n_amp2=6.0,
            n_iq1=0.5,
            n_iq2=0.25,
            eta=eta,
            loss_placement=placement,
            loss_n=0.7,
        )
        model = build_dual_path(vacuum(), cfg)
        joint = exact_envelope_moments(model, 2)
        for chain, idx in ((1, (1, 1, 0, 0)), (2, (0, 0, 1, 1))):
            expected = envelope_noise_occupation(cfg, chain) + 1.0
            assert np.isclose(joint.entry(*idx), expected, atol=1e-9), (placement, chain)


def test_envelope_second_moment_vanishes_for_vacuum_run():
    cfg = ChainConfig(g1=300.0, g2=300.0, n_amp1=2.0, n_amp2=2.0)
    model = build_dual_path(vacuum(), cfg)
    joint = exact_envelope_moments(model, 2)
    assert abs(joint.entry(0, 2, 0, 0)) < 1e-12
    assert abs(joint.entry(0, 1, 0, 1)) < 1e-12


def test_high_gain_envelope_limit():
    cfg_full = ChainConfig(g1=1e6, g2=1e6, n_amp1=10.0, n_amp2=10.0)
    cfg_env = ChainConfig(
        g1=1e6, g2=1e6, n_amp1=10.0, n_amp2=10.0, high_gain_envelope=True
    )
    state = squeezed_vacuum(0.5j)
    full = exact_envelope_moments(build_dual_path(state, cfg_full), 2)
    env = exact_envelope_moments(build_dual_path(state, cfg_env), 2)
    assert np.allclose(full.data, env.data, atol=1e-4)


def test_single_path_envelope_matches_raw_budget():
    cfg = ChainConfig(g1=80.0, n_amp1=3.0, n_iq1=0.4)
    model = build_single_path(coherent(0.5), cfg)
    table = exact_channel_moments(model, 0, 2)
    g = cfg.effective_gain(1)
    # <A^dag A> = g |alpha|^2 + (g - 1) <h h^dag>
    raw = g * table.entry(1, 1)
    expected = g * 0.25 + (g - 1.0) * (raw_noise_occupation(cfg, 1) + 1.0)
    assert np.isclose(raw, expected, atol=1e-9)


def test_truth_tables_match_input():
    state = squeezed_vacuum(0.3)
    model = build_dual_path(state, ChainConfig(n_anc=0.2))
    assert np.allclose(
        model.truth_signal.data, wick_moments(state, 0, 8).data, atol=1e-12
    )
    assert np.isclose(model.truth_ancilla.entry(1, 1), 0.2, atol=1e-12)
    n_env = envelope_noise_occupation(model.config, 1)
    assert np.isclose(model.truth_noise[0].entry(1, 1), n_env + 1.0, atol=1e-9)


def test_config_validation():
    with pytest.raises(ValueError):
        ChainConfig(g1=0.5)
    with pytest.raises(ValueError):
        ChainConfig(n_amp1=-1.0)
    with pytest.raises(ValueError):
        ChainConfig(eta=0.9)  # eta without placement
    with pytest.raises(ValueError):
        ChainConfig(loss_placement="before_amp")  # placement without eta
    with pytest.raises(ValueError):
        ChainConfig(loss_placement="sideways", eta=0.9)
    with pytest.raises(ValueError):
        # g * eta must exceed one for the effective description
        ChainConfig(g1=2.0, g2=2.0, eta=0.4, loss_placement="before_amp")


def test_config_dict_round_trip():
    cfg = ChainConfig(g1=500.0, n_amp1=7.0, eta=0.9, loss_placement="after_amp")
    clone = ChainConfig.from_dict(cfg.to_dict())
    assert clone == cfg
    with pytest.raises(ValueError):
        ChainConfig.from_dict({"gain": 10.0})


def test_effective_gain_includes_loss():
    cfg = ChainConfig(g1=100.0, g2=40.0, eta=0.5, loss_placement="before_amp")
    assert np.isclose(cfg.effective_gain(1), 50.0)
    assert np.isclose(cfg.effective_gain(2), 20.0)
    plain = ChainConfig(g1=100.0)
    assert np.isclose(plain.effective_gain(1), 100.0)
