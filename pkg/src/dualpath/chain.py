"""Detection chain models: splitter, amplifiers, loss, and IQ readout.

A dual-path receiver splits the signal on a balanced beam splitter against an
ancilla mode, amplifies each output with a phase-insensitive amplifier of gain
g_k and added noise occupation n_amp_k, and reads both outputs out with IQ
mixers whose image-band ancillas carry occupation n_iq_k.  The measured
quadrature pairs commute, so a run produces a classical joint Gaussian record.
"""

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .states import (
    GaussianState,
    linear_transform,
    tensor,
    thermal,
    wick_moments,
)
from .tables import MomentTable

__all__ = [
    "ChainConfig",
    "DetectionModel",
    "beam_splitter",
    "amplifier",
    "loss",
    "iq_readout",
    "iq_readout_map",
    "effective_noise_occupation",
    "effective_noise_moments",
    "envelope_noise_occupation",
    "raw_noise_occupation",
    "build_dual_path",
    "build_single_path",
]

LOSS_PLACEMENTS = ("none", "before_amp", "after_amp")


@dataclass(frozen=True)
class ChainConfig:
    """Parameters of the amplification chains and ancilla occupations.

    When a loss channel is configured it applies to both chains with the same
    transmissivity; the effective chain gain is then g_k * eta and must stay
    above one for the amplifier-plus-loss composition to remain an effective
    linear amplifier.
    """

    g1: float = 1e4
    g2: float = 1e4
    n_amp1: float = 10.0
    n_amp2: float = 10.0
    n_anc: float = 0.0
    n_iq1: float = 0.0
    n_iq2: float = 0.0
    eta: float | None = None
    loss_placement: str = "none"
    loss_n: float = 0.0
    high_gain_envelope: bool = False

    def __post_init__(self):
        for name in ("g1", "g2"):
            if getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must exceed 1, got {getattr(self, name)}")
        for name in ("n_amp1", "n_amp2", "n_anc", "n_iq1", "n_iq2", "loss_n"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")
        if self.loss_placement not in LOSS_PLACEMENTS:
            raise ValueError(
                f"loss_placement must be one of {LOSS_PLACEMENTS}, "
                f"got {self.loss_placement!r}"
            )
        if self.loss_placement == "none":
            if self.eta is not None:
                raise ValueError("eta given without a loss placement")
        else:
            if self.eta is None:
                raise ValueError("loss placement set but eta missing")
            if not 0.0 < self.eta <= 1.0:
                raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
            for name in ("g1", "g2"):
                if getattr(self, name) * self.eta <= 1.0:
                    raise ValueError(
                        f"effective gain {name}*eta must exceed 1 for the "
                        "loss-amplifier composition"
                    )

    def effective_gain(self, chain):
        """Effective gain of chain 1 or 2, including any loss channel."""
        g = {1: self.g1, 2: self.g2}[chain]
        return g * self.eta if self.loss_placement != "none" else g

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, payload):
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown chain config keys: {sorted(unknown)}")
        return cls(**payload)


# ---------------------------------------------------------------------------
# Chain elements
# ---------------------------------------------------------------------------


def beam_splitter(state):
    """Balanced splitter on a two-mode state: a1 = (a+v)/sqrt2, a2 = (-a+v)/sqrt2."""
    if state.num_modes != 2:
        raise ValueError("beam_splitter expects a two-mode state")
    inv = 1.0 / math.sqrt(2)
    t = inv * np.array(
        [
            [1, 0, 1, 0],
            [0, 1, 0, 1],
            [-1, 0, 1, 0],
            [0, -1, 0, 1],
        ],
        dtype=np.float64,
    )
    return linear_transform(state, t)


def _embedded_map(state, mode, xx, xa, pp, pa):
    """Map acting on one mode with one appended auxiliary mode.

    Returns the output matrix for b_x = xx*x + xa*x_aux, b_p = pp*p + pa*p_aux
    on the selected mode, identity elsewhere; the auxiliary mode is dropped.
    """
    n = state.mean.size
    t = np.zeros((n, n + 2))
    t[:n, :n] = np.eye(n)
    t[2 * mode, 2 * mode] = xx
    t[2 * mode, n] = xa
    t[2 * mode + 1, 2 * mode + 1] = pp
    t[2 * mode + 1, n + 1] = pa
    return t


def amplifier(state, mode, gain, noise_occupation=0.0):
    """Phase-insensitive amplifier b = sqrt(g) a + sqrt(g-1) hdag on one mode."""
    if gain <= 1.0:
        raise ValueError(f"amplifier gain must exceed 1, got {gain}")
    if not 0 <= mode < state.num_modes:
        raise ValueError(f"mode index {mode} out of range")
    full = tensor(state, thermal(noise_occupation))
    c = math.sqrt(gain)
    s = math.sqrt(gain - 1.0)
    return linear_transform(state=full, matrix=_embedded_map(state, mode, c, s, c, -s))


def loss(state, mode, transmissivity, env_occupation=0.0):
    """Beam-splitter loss b = sqrt(eta) a + sqrt(1-eta) e on one mode."""
    if not 0.0 < transmissivity <= 1.0:
        raise ValueError(f"transmissivity must lie in (0, 1], got {transmissivity}")
    if not 0 <= mode < state.num_modes:
        raise ValueError(f"mode index {mode} out of range")
    full = tensor(state, thermal(env_occupation))
    c = math.sqrt(transmissivity)
    s = math.sqrt(1.0 - transmissivity)
    return linear_transform(state=full, matrix=_embedded_map(state, mode, c, s, c, s))


def iq_readout_map(num_modes):
    """Measured-quadrature map for IQ mixers on every mode.

    Acts on [signal modes..., ancilla modes...] and returns for each mode the
    commuting pair x + x_anc, p - p_anc.
    """
    t = np.zeros((2 * num_modes, 4 * num_modes))
    for k in range(num_modes):
        t[2 * k, 2 * k] = 1.0
        t[2 * k, 2 * num_modes + 2 * k] = 1.0
        t[2 * k + 1, 2 * k + 1] = 1.0
        t[2 * k + 1, 2 * num_modes + 2 * k + 1] = -1.0
    return t


def iq_readout(state, ancilla_occupations):
    """IQ readout of every mode against its own image-band ancilla.

    The returned GaussianState holds the joint statistics of the measured
    quadrature pairs, which commute and therefore form a classical record.
    """
    occupations = tuple(ancilla_occupations)
    if len(occupations) != state.num_modes:
        raise ValueError(
            f"need one ancilla occupation per mode, got {len(occupations)} "
            f"for {state.num_modes} modes"
        )
    full = tensor(state, *[thermal(n) for n in occupations])
    return linear_transform(full, iq_readout_map(state.num_modes))


# ---------------------------------------------------------------------------
# Effective noise of an amplifier-plus-loss chain
# ---------------------------------------------------------------------------


def effective_noise_occupation(gain, n_amp, eta=None, placement="none", loss_n=0.0):
    """Occupation of the single effective noise mode of one chain.

    A loss channel composed with the amplifier is again an effective linear
    amplifier of gain g*eta whose noise mode V satisfies [V, Vdag] = 1; this
    returns <Vdag V>.  Without loss it is simply n_amp.
    """
    if gain <= 1.0:
        raise ValueError(f"gain must exceed 1, got {gain}")
    if placement == "none":
        return float(n_amp)
    if placement not in LOSS_PLACEMENTS:
        raise ValueError(f"unknown placement {placement!r}")
    if eta is None or not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if gain * eta <= 1.0:
        raise ValueError("effective gain g*eta must exceed 1")
    if placement == "before_amp":
        denom = eta - 1.0 / gain
        c_loss = (1.0 - eta) / denom
        c_amp = (1.0 - 1.0 / gain) / denom
    else:
        denom = gain * eta - 1.0
        c_amp = eta * (gain - 1.0) / denom
        c_loss = (1.0 - eta) / denom
    return c_loss * (loss_n + 1.0) + c_amp * n_amp


def effective_noise_moments(
    gain, n_amp, eta=None, placement="none", loss_n=0.0, max_order=8
):
    """Normally ordered moment table of the effective chain noise mode."""
    occupation = effective_noise_occupation(gain, n_amp, eta, placement, loss_n)
    return wick_moments(thermal(occupation), 0, max_order, ordering="normal")


def envelope_noise_occupation(config, chain):
    """Occupation of the envelope noise mode V_k = (x+ip)/sqrt(g_eff) - s_k.

    Exact composition: V_k = sqrt(1-1/g_eff) V_chain + sqrt(1/g_eff) v_iq.
    With ``high_gain_envelope`` the IQ term is dropped (g >> 1 limit).
    """
    g_eff = config.effective_gain(chain)
    n_amp = {1: config.n_amp1, 2: config.n_amp2}[chain]
    gain = {1: config.g1, 2: config.g2}[chain]
    n_chain = effective_noise_occupation(
        gain, n_amp, config.eta, config.loss_placement, config.loss_n
    )
    if config.high_gain_envelope:
        return n_chain
    n_iq = {1: config.n_iq1, 2: config.n_iq2}[chain]
    return (1.0 - 1.0 / g_eff) * n_chain + n_iq / g_eff


def raw_noise_occupation(config, chain):
    """Occupation of the raw-domain noise mode h_k.

    Single-path inversions write the amplified output as
    A_k = sqrt(g_eff) a + sqrt(g_eff - 1) h_k^dag, which rescales the
    envelope noise: <h h^dag> = g_eff <V V^dag> / (g_eff - 1).
    """
    g_eff = config.effective_gain(chain)
    n_env = envelope_noise_occupation(config, chain)
    return g_eff * (n_env + 1.0) / (g_eff - 1.0) - 1.0


# ---------------------------------------------------------------------------
# Full detection models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DetectionModel:
    """Measured-record model of a detection run plus ground-truth tables.

    ``measured`` holds the classical joint Gaussian of the measured
    quadratures (four for dual path, two for single path).  The truth tables
    give the moments the reconstruction should recover: the input signal and
    splitter ancilla normally ordered, the per-channel noise antinormally
    ordered in the convention the matching method estimates (envelope noise
    for dual path, raw-domain noise for single path).
    """

    measured: GaussianState
    config: ChainConfig
    n_channels: int
    effective_gains: tuple
    truth_signal: MomentTable
    truth_ancilla: MomentTable | None
    truth_noise: tuple


def _apply_chain(state, config, mode, chain):
    gain = {1: config.g1, 2: config.g2}[chain]
    n_amp = {1: config.n_amp1, 2: config.n_amp2}[chain]
    if config.loss_placement == "before_amp":
        state = loss(state, mode, config.eta, config.loss_n)
    state = amplifier(state, mode, gain, n_amp)
    if config.loss_placement == "after_amp":
        state = loss(state, mode, config.eta, config.loss_n)
    return state


def _high_gain_measured(split_state, config, chains):
    """Measured state in the g >> 1 envelope limit: A_k = sqrt(g_eff)(s_k + V_k^dag)."""
    noise = [
        thermal(
            effective_noise_occupation(
                {1: config.g1, 2: config.g2}[c],
                {1: config.n_amp1, 2: config.n_amp2}[c],
                config.eta,
                config.loss_placement,
                config.loss_n,
            )
        )
        for c in chains
    ]
    full = tensor(split_state, *noise)
    n_sig = split_state.num_modes
    t = np.zeros((2 * n_sig, full.mean.size))
    for k, c in enumerate(chains):
        root = math.sqrt(config.effective_gain(c))
        t[2 * k, 2 * k] = root
        t[2 * k + 1, 2 * k + 1] = root
        t[2 * k, 2 * n_sig + 2 * k] = root
        t[2 * k + 1, 2 * n_sig + 2 * k + 1] = -root
    return linear_transform(full, t)


def _truth_noise_tables(config, chains, max_order, occupation=envelope_noise_occupation):
    return tuple(
        wick_moments(
            thermal(occupation(config, c)),
            0,
            max_order,
            ordering="antinormal",
        )
        for c in chains
    )


def build_dual_path(input_state, config, truth_order=8):
    """Detection model of the full dual-path receiver for a one-mode input."""
    if input_state.num_modes != 1:
        raise ValueError("dual-path input must be a single-mode state")
    split = beam_splitter(tensor(input_state, thermal(config.n_anc)))
    if config.high_gain_envelope:
        measured = _high_gain_measured(split, config, (1, 2))
    else:
        state = split
        for mode, chain in ((0, 1), (1, 2)):
            state = _apply_chain(state, config, mode, chain)
        measured = iq_readout(state, (config.n_iq1, config.n_iq2))
    return DetectionModel(
        measured=measured,
        config=config,
        n_channels=2,
        effective_gains=(config.effective_gain(1), config.effective_gain(2)),
        truth_signal=wick_moments(input_state, 0, truth_order),
        truth_ancilla=wick_moments(thermal(config.n_anc), 0, truth_order),
        truth_noise=_truth_noise_tables(config, (1, 2), truth_order),
    )


def build_single_path(input_state, config, truth_order=8):
    """Detection model of a single amplification chain (chain 1 parameters)."""
    if input_state.num_modes != 1:
        raise ValueError("single-path input must be a single-mode state")
    if config.high_gain_envelope:
        measured = _high_gain_measured(input_state, config, (1,))
    else:
        state = _apply_chain(input_state, config, 0, 1)
        measured = iq_readout(state, (config.n_iq1,))
    return DetectionModel(
        measured=measured,
        config=config,
        n_channels=1,
        effective_gains=(config.effective_gain(1),),
        truth_signal=wick_moments(input_state, 0, truth_order),
        truth_ancilla=None,
        truth_noise=_truth_noise_tables(
            config, (1,), truth_order, occupation=raw_noise_occupation
        ),
    )
