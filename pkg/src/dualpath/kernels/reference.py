"""Reference numpy implementation of the hot kernels.

These functions are the fallback twins of the compiled versions in
``_fast.pyx``; both backends must produce identical results up to float
summation order.
"""

import math

import numpy as np

_BINOM = np.array(
    [[math.comb(n, k) if k <= n else 0 for k in range(17)] for n in range(17)],
    dtype=np.float64,
)
_INV_SQRT2_POW = np.array([2.0 ** (-0.5 * e) for e in range(65)])

_CHUNK = 1 << 16


def correction_sum(
    signal,
    ancilla,
    noise1,
    noise2,
    l1,
    m1,
    l2,
    m2,
    skip_signal_full=False,
    skip_ancilla_full=False,
    skip_noise_full=False,
):
    """Known-term expansion of one measured joint envelope moment.

    Expands <S1dag^l1 S1^m1 S2dag^l2 S2^m2> for the split-and-amplify model
    S1 = (a + v)/sqrt(2) + V1dag, S2 = (-a + v)/sqrt(2) + V2dag into products
    of signal, ancilla and per-channel noise moments.  ``signal`` and
    ``ancilla`` are normally ordered tables (<adag^l a^m>), ``noise1`` and
    ``noise2`` antinormally ordered ones (<V^r Vdag^s>); all four are dense
    complex (K+1, K+1) arrays.

    The optional flags drop exactly one term each, which is how the
    reconstruction isolates an unknown moment: ``skip_signal_full`` drops the
    term carrying <adag^(l1+l2) a^(m1+m2)>, ``skip_ancilla_full`` the one
    carrying the same ancilla moment, ``skip_noise_full`` the all-noise term
    <V1^l1 V1dag^m1><V2^l2 V2dag^m2>.  Unknown table entries may simply be
    left at zero; by linearity that is equivalent to dropping their terms.
    """
    binom = _BINOM
    scale = _INV_SQRT2_POW
    total = 0.0 + 0.0j
    for k1 in range(l1 + 1):
        for k1p in range(l1 - k1 + 1):
            c1 = binom[l1, k1] * binom[l1 - k1, k1p]
            for j1 in range(m1 + 1):
                for j1p in range(m1 - j1 + 1):
                    c2 = c1 * binom[m1, j1] * binom[m1 - j1, j1p]
                    for k2 in range(l2 + 1):
                        for k2p in range(l2 - k2 + 1):
                            c3 = c2 * binom[l2, k2] * binom[l2 - k2, k2p]
                            for j2 in range(m2 + 1):
                                for j2p in range(m2 - j2 + 1):
                                    if (
                                        skip_signal_full
                                        and k1 == l1
                                        and j1 == m1
                                        and k2 == l2
                                        and j2 == m2
                                    ):
                                        continue
                                    if (
                                        skip_ancilla_full
                                        and k1p == l1
                                        and j1p == m1
                                        and k2p == l2
                                        and j2p == m2
                                    ):
                                        continue
                                    if skip_noise_full and not (
                                        k1 | k1p | j1 | j1p | k2 | k2p | j2 | j2p
                                    ):
                                        continue
                                    coeff = (
                                        c3 * binom[m2, j2] * binom[m2 - j2, j2p]
                                    ) * scale[k1 + k1p + j1 + j1p + k2 + k2p + j2 + j2p]
                                    if (k2 + j2) % 2:
                                        coeff = -coeff
                                    term = (
                                        signal[k1 + k2, j1 + j2]
                                        * ancilla[k1p + k2p, j1p + j2p]
                                        * noise1[l1 - k1 - k1p, m1 - j1 - j1p]
                                        * noise2[l2 - k2 - k2p, m2 - j2 - j2p]
                                    )
                                    total += coeff * term
    return total


def _chunk_powers(values, max_order):
    powers = np.empty((max_order + 1, values.size), dtype=np.complex128)
    powers[0] = 1.0
    for i in range(1, max_order + 1):
        np.multiply(powers[i - 1], values, out=powers[i])
    return powers


def channel_power_sums(samples, max_order):
    """Sums over shots of conj(s)^l s^m for l + m <= max_order.

    Returns a dense complex (max_order+1, max_order+1) array; entries above
    the order cap stay zero.
    """
    samples = np.ascontiguousarray(samples, dtype=np.complex128)
    K = max_order
    out = np.zeros((K + 1, K + 1), dtype=np.complex128)
    for start in range(0, samples.size, _CHUNK):
        powers = _chunk_powers(samples[start : start + _CHUNK], K)
        conj = powers.conj()
        for l in range(K + 1):
            for m in range(K + 1 - l):
                out[l, m] += np.dot(conj[l], powers[m])
    return out


def joint_power_sums(samples1, samples2, max_order):
    """Sums over shots of conj(s1)^l1 s1^m1 conj(s2)^l2 s2^m2.

    Returns a dense complex (max_order+1,)*4 array filled for total order
    l1 + m1 + l2 + m2 <= max_order.
    """
    samples1 = np.ascontiguousarray(samples1, dtype=np.complex128)
    samples2 = np.ascontiguousarray(samples2, dtype=np.complex128)
    if samples1.shape != samples2.shape:
        raise ValueError("channel sample arrays must have equal length")
    K = max_order
    out = np.zeros((K + 1,) * 4, dtype=np.complex128)
    buf1 = np.empty(min(_CHUNK, samples1.size), dtype=np.complex128)
    buf2 = np.empty_like(buf1)
    for start in range(0, samples1.size, _CHUNK):
        p1 = _chunk_powers(samples1[start : start + _CHUNK], K)
        p2 = _chunk_powers(samples2[start : start + _CHUNK], K)
        c1 = p1.conj()
        c2 = p2.conj()
        n = p1.shape[1]
        b1 = buf1[:n]
        b2 = buf2[:n]
        for l1 in range(K + 1):
            for m1 in range(K + 1 - l1):
                np.multiply(c1[l1], p1[m1], out=b1)
                for l2 in range(K + 1 - l1 - m1):
                    np.multiply(b1, c2[l2], out=b2)
                    for m2 in range(K + 1 - l1 - m1 - l2):
                        out[l1, m1, l2, m2] += np.dot(b2, p2[m2])
    return out
