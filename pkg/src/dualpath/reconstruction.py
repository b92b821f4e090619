"""Moment reconstruction from single-path and dual-path detection records.

Single-path reconstruction (SPM) cascades two exact binomial inversions of
the amplifier input-output relation a' = sqrt(g) a + sqrt(g-1) hdag: a
reference run (vacuum or known coherent input) determines the antinormal
noise table <h^l hdag^m>, which the signal run then deconvolves.

Dual-path reconstruction (DPM) works on the joint envelope moments of both
receiver channels, S1 = (a+v)/sqrt2 + V1dag and S2 = (-a+v)/sqrt2 + V2dag.
Every measured joint moment of total order t is a linear combination of
signal, ancilla and noise moments of order <= t; recursing over the total
order, each unknown moment appears in several measured combinations at once
and is taken as the average of all of them.  Within one order the passes run
signal -> noise -> ancilla.  The ancilla moments of the current order that
the signal estimators would need are not yet known and enter as zero; their
weights cancel for odd orders, and for a vacuum ancilla they vanish anyway,
so only even orders with a bright ancilla pick up a bias.

Reference-state reconstruction replaces any noise model with a measured one:
a vacuum-input run of the same receiver directly yields the joint antinormal
noise table, and one binomial inversion returns the joint moments of the two
modes leaving the splitter.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .tables import (
    JointMomentTable,
    MomentTable,
    NoiseJointTable,
    pairs_of_order,
)

__all__ = [
    "AncillaMoments",
    "ReconstructionResult",
    "envelope_to_raw",
    "spm_noise_from_reference",
    "spm_signal",
    "spm_reconstruct",
    "combination_estimators",
    "dpm_reconstruct",
    "reference_noise_joint",
    "reference_output_moments",
    "refstate_reconstruct",
    "blockwise_reconstruction",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AncillaMoments:
    """Known first and second moments of the splitter ancilla mode."""

    mean: complex = 0.0 + 0.0j
    mean_square: complex = 0.0 + 0.0j
    occupation: float = 0.0

    @classmethod
    def thermal(cls, occupation):
        return cls(0.0j, 0.0j, float(occupation))


@dataclass
class ReconstructionResult:
    """Reconstructed moment tables of one method.

    ``signal`` is normally ordered; ``noise`` holds one antinormal table per
    channel.  For DPM ``ancilla`` contains the supplied moments up to order
    two and reconstructed entries from order three on, and ``ancilla_mean``
    is the measured sum-channel estimate of <v> used as a consistency check.
    The reference-state method fills ``output_moments`` instead.
    """

    method: str
    max_order: int
    signal: MomentTable | None = None
    noise: tuple = ()
    ancilla: MomentTable | None = None
    ancilla_mean: complex | None = None
    ancilla_mean_error: float | None = None
    output_moments: JointMomentTable | None = None


def envelope_to_raw(table, gain):
    """Rescale an envelope table <Sdag^l S^m> to raw moments <a'dag^l a'^m>."""
    if gain <= 0:
        raise ValueError(f"gain must be positive, got {gain}")
    out = table.copy()
    for (l, m), value in table.items():
        scale = gain ** ((l + m) / 2.0)
        out.data[l, m] = value * scale
        if out.errors is not None:
            out.errors[l, m] = table.errors[l, m] * scale
    return out


# ---------------------------------------------------------------------------
# Single-path method
# ---------------------------------------------------------------------------


def spm_noise_from_reference(
    raw_reference, gain, reference_amplitude=0.0 + 0.0j, assume_zero_mean=True
):
    """Antinormal amplifier-noise table from a reference-input run.

    ``raw_reference`` holds raw output moments <a'dag^l a'^m> taken with a
    vacuum or coherent reference of amplitude ``reference_amplitude`` at the
    input.  Inverts the exact expansion

        <a'dag^l a'^m> = sum_{i1,i2} C(l,i1) C(m,i2) g^((l+m-i1-i2)/2)
                         (g-1)^((i1+i2)/2) conj(alpha)^(l-i1) alpha^(m-i2)
                         <h^i1 hdag^i2>

    order by order.  With ``assume_zero_mean`` the first-order noise moments
    are pinned to zero instead of being taken from the (shot-noisy) record.
    """
    if gain <= 1.0:
        raise ValueError(f"gain must exceed 1, got {gain}")
    K = raw_reference.max_order
    alpha = complex(reference_amplitude)
    noise = MomentTable(K, ordering="antinormal")
    ratio = gain / (gain - 1.0)
    for t in range(1, K + 1):
        for l, m in pairs_of_order(t):
            if assume_zero_mean and t == 1:
                noise.data[l, m] = 0.0
                continue
            acc = raw_reference.data[l, m] / (gain - 1.0) ** (t / 2.0)
            for i1 in range(l + 1):
                for i2 in range(m + 1):
                    if (i1, i2) == (l, m):
                        continue
                    coeff = (
                        math.comb(l, i1)
                        * math.comb(m, i2)
                        * ratio ** ((l + m - i1 - i2) / 2.0)
                        * np.conj(alpha) ** (l - i1)
                        * alpha ** (m - i2)
                    )
                    acc -= coeff * noise.data[i1, i2]
            noise.data[l, m] = acc
    return noise


def spm_signal(raw_output, noise, gain):
    """Normally ordered signal moments from raw output and noise tables.

    Inverts the same amplifier expansion with the antinormal ``noise`` table
    known and the input moments <adag^l a^m> unknown.
    """
    if gain <= 1.0:
        raise ValueError(f"gain must exceed 1, got {gain}")
    if noise.ordering != "antinormal":
        raise ValueError("noise table must be antinormally ordered")
    K = min(raw_output.max_order, noise.max_order)
    signal = MomentTable(K, ordering="normal")
    ratio = (gain - 1.0) / gain
    for t in range(1, K + 1):
        for l, m in pairs_of_order(t):
            acc = raw_output.data[l, m] / gain ** (t / 2.0)
            for i1 in range(l + 1):
                for i2 in range(m + 1):
                    if (i1, i2) == (0, 0):
                        continue
                    coeff = (
                        math.comb(l, i1)
                        * math.comb(m, i2)
                        * ratio ** ((i1 + i2) / 2.0)
                    )
                    acc -= coeff * signal.data[l - i1, m - i2] * noise.data[i1, i2]
            signal.data[l, m] = acc
    return signal


def spm_reconstruct(
    raw_output,
    raw_reference,
    gain,
    reference_amplitude=0.0 + 0.0j,
    assume_zero_mean=True,
    max_order=None,
):
    """Full single-path reconstruction from signal-run and reference-run tables."""
    K = max_order or min(raw_output.max_order, raw_reference.max_order)
    noise = spm_noise_from_reference(
        raw_reference, gain, reference_amplitude, assume_zero_mean
    )
    signal = spm_signal(raw_output, noise, gain)
    return ReconstructionResult(
        method="spm",
        max_order=K,
        signal=signal,
        noise=(noise,),
    )


# ---------------------------------------------------------------------------
# Dual-path method
# ---------------------------------------------------------------------------


def combination_estimators(joint, signal, ancilla, noise1, noise2, l, m, target="signal"):
    """Independent estimates of one unknown moment of total order l + m.

    Every joint measured moment <S1dag^l1 S1^m1 S2dag^l2 S2^m2> with
    l1 + l2 = l, m1 + m2 = m and (l1, m1) not in {(0, 0), (l, m)} contains
    the target moment exactly once; subtracting all known terms and dividing
    by its coefficient gives one estimate per index pair, (l+1)(m+1) - 2 in
    total.  ``target`` selects whether the signal moment <adag^l a^m> or the
    ancilla moment <vdag^l v^m> is treated as unknown.
    """
    if target not in ("signal", "ancilla"):
        raise ValueError(f"unknown target {target!r}")
    t = l + m
    if t < 2:
        raise ValueError("combination estimators exist for total order >= 2 only")
    scale = 2.0 ** (-t / 2.0)
    estimates = []
    for l1 in range(l + 1):
        for m1 in range(m + 1):
            if (l1, m1) in ((0, 0), (l, m)):
                continue
            l2, m2 = l - l1, m - m1
            known = kernels.correction_sum(
                signal.data,
                ancilla.data,
                noise1.data,
                noise2.data,
                l1,
                m1,
                l2,
                m2,
                skip_signal_full=target == "signal",
                skip_ancilla_full=target == "ancilla",
            )
            coeff = scale
            if target == "signal" and (l2 + m2) % 2:
                coeff = -coeff
            estimates.append((joint.data[l1, m1, l2, m2] - known) / coeff)
    return np.array(estimates)


def dpm_reconstruct(joint, ancilla=AncillaMoments(), max_order=None):
    """Dual-path reconstruction from a joint envelope moment table.

    Order one uses the difference and sum channels: the difference gives
    <a> under the zero-mean-noise assumption, the sum channel estimate of
    <v> is returned as ``ancilla_mean`` for comparison with the supplied
    value.  From order two on every moment is the average of its
    combination estimators; the per-channel noise tables follow from the
    single-channel moments, and from order three on the ancilla table is
    reconstructed the same way as the signal.
    """
    K = max_order if max_order is not None else joint.max_order
    if K > joint.max_order:
        raise ValueError(
            f"max_order {K} exceeds the joint table order {joint.max_order}"
        )
    sig = MomentTable(K, ordering="normal")
    anc = MomentTable(K, ordering="normal")
    noise = tuple(MomentTable(K, ordering="antinormal") for _ in range(2))

    anc.data[0, 1] = ancilla.mean
    anc.data[1, 0] = np.conj(ancilla.mean)
    if K >= 2:
        anc.data[0, 2] = ancilla.mean_square
        anc.data[2, 0] = np.conj(ancilla.mean_square)
        anc.data[1, 1] = ancilla.occupation

    sig.data[0, 1] = (joint.data[0, 1, 0, 0] - joint.data[0, 0, 0, 1]) / _SQRT2
    sig.data[1, 0] = np.conj(sig.data[0, 1])
    ancilla_mean = (joint.data[0, 1, 0, 0] + joint.data[0, 0, 0, 1]) / _SQRT2

    for t in range(2, K + 1):
        for l, m in pairs_of_order(t):
            if l > m:
                continue
            value = np.mean(
                combination_estimators(joint, sig, anc, *noise, l, m, "signal")
            )
            sig.data[l, m] = value
            if l != m:
                sig.data[m, l] = np.conj(value)
        for r, s in pairs_of_order(t):
            if r > s:
                continue
            for chan, table in enumerate(noise):
                idx = (r, s, 0, 0) if chan == 0 else (0, 0, r, s)
                known = kernels.correction_sum(
                    sig.data,
                    anc.data,
                    noise[0].data,
                    noise[1].data,
                    *idx,
                    skip_noise_full=True,
                )
                value = joint.data[idx] - known
                table.data[r, s] = value
                if r != s:
                    table.data[s, r] = np.conj(value)
        if t >= 3:
            for l, m in pairs_of_order(t):
                if l > m:
                    continue
                value = np.mean(
                    combination_estimators(joint, sig, anc, *noise, l, m, "ancilla")
                )
                anc.data[l, m] = value
                if l != m:
                    anc.data[m, l] = np.conj(value)

    return ReconstructionResult(
        method="dpm",
        max_order=K,
        signal=sig,
        noise=noise,
        ancilla=anc,
        ancilla_mean=complex(ancilla_mean),
    )


# ---------------------------------------------------------------------------
# Reference-state method
# ---------------------------------------------------------------------------


def reference_noise_joint(vacuum_joint):
    """Joint antinormal noise table from a vacuum-input run of the receiver.

    With the signal input in vacuum every normally ordered
    splitter-output factor averages to zero, so the measured joint envelope
    moments are exactly the antinormal noise moments:
    <S1dag^k1 S1^j1 S2dag^k2 S2^j2>_vac = <V1^k1 V1dag^j1 V2^k2 V2dag^j2>.
    """
    table = NoiseJointTable(vacuum_joint.max_order, data=vacuum_joint.data)
    if abs(table.data[0, 0, 0, 0] - 1.0) > 1e-12:
        raise ValueError("vacuum-run table entry (0,0,0,0) must be 1")
    return table


def reference_output_moments(signal_joint, noise_joint, max_order=None):
    """Joint moments of the two splitter-output modes, by order recursion.

    Inverts <S1dag^l1 S1^m1 S2dag^l2 S2^m2> =
    sum C(l1,k1) C(m1,j1) C(l2,k2) C(m2,j2)
        <s1dag^(l1-k1) s1^(m1-j1) s2dag^(l2-k2) s2^(m2-j2)>
        <V1^k1 V1dag^j1 V2^k2 V2dag^j2>
    for the splitter-output moments; no model of the noise is needed beyond
    the measured vacuum-run table.
    """
    K = max_order if max_order is not None else signal_joint.max_order
    if K > signal_joint.max_order or K > noise_joint.max_order:
        raise ValueError("max_order exceeds an input table order")
    out = JointMomentTable(K)
    for l1, m1, l2, m2 in out.indices():
        if l1 + m1 + l2 + m2 == 0:
            continue
        acc = signal_joint.data[l1, m1, l2, m2]
        for k1 in range(l1 + 1):
            for j1 in range(m1 + 1):
                for k2 in range(l2 + 1):
                    for j2 in range(m2 + 1):
                        if (k1, j1, k2, j2) == (0, 0, 0, 0):
                            continue
                        coeff = (
                            math.comb(l1, k1)
                            * math.comb(m1, j1)
                            * math.comb(l2, k2)
                            * math.comb(m2, j2)
                        )
                        acc -= (
                            coeff
                            * out.data[l1 - k1, m1 - j1, l2 - k2, m2 - j2]
                            * noise_joint.data[k1, j1, k2, j2]
                        )
        out.data[l1, m1, l2, m2] = acc
    return out


def refstate_reconstruct(signal_joint, vacuum_joint, max_order=None):
    """Reference-state reconstruction from signal-run and vacuum-run tables.

    The vacuum run absorbs everything it sees, including any splitter
    ancilla brightness, into the joint noise tables, so the returned
    ``output_moments`` are those of the splitter with its reference port in
    vacuum whatever the actual ancilla occupation.
    """
    noise = reference_noise_joint(vacuum_joint)
    out = reference_output_moments(signal_joint, noise, max_order)
    return ReconstructionResult(
        method="refstate",
        max_order=out.max_order,
        output_moments=out,
    )


# ---------------------------------------------------------------------------
# Block-wise error propagation
# ---------------------------------------------------------------------------


def _attach_errors(point, blocks, pick):
    table = pick(point)
    if table is None:
        return
    stack = np.stack([pick(b).data for b in blocks])
    n = stack.shape[0]
    var = np.var(stack.real, axis=0, ddof=1) + np.var(stack.imag, axis=0, ddof=1)
    table.errors = np.sqrt(var / n)


def blockwise_reconstruction(reconstructor, point_tables, block_tables, **kwargs):
    """Run a reconstruction on the full record and on every block.

    ``point_tables`` is a tuple of positional table arguments for
    ``reconstructor``; ``block_tables`` is a list of such tuples, one per
    block.  Returns (result, block_results) where every moment table in
    ``result`` carries block bootstrap standard errors.
    """
    if len(block_tables) < 2:
        raise ValueError("need at least two blocks for error propagation")
    result = reconstructor(*point_tables, **kwargs)
    block_results = [reconstructor(*args, **kwargs) for args in block_tables]
    _attach_errors(result, block_results, lambda r: r.signal)
    _attach_errors(result, block_results, lambda r: r.ancilla)
    _attach_errors(result, block_results, lambda r: r.output_moments)
    for idx in range(len(result.noise)):
        _attach_errors(result, block_results, lambda r, i=idx: r.noise[i])
    if result.ancilla_mean is not None:
        means = np.array([b.ancilla_mean for b in block_results])
        var = np.var(means.real, ddof=1) + np.var(means.imag, ddof=1)
        result.ancilla_mean_error = float(np.sqrt(var / len(means)))
    return result, block_results
