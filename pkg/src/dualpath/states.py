"""Gaussian states of bosonic modes and their moment machinery.

Conventions: quadratures x = (a + adag)/sqrt(2), p = (a - adag)/(i sqrt(2)),
so the vacuum variance is 1/2 and [x, p] = i.  A state of M modes is a real
mean vector (x1, p1, ..., xM, pM) plus a symmetric 2M x 2M covariance matrix.
"""

import math
from dataclasses import dataclass

import numpy as np

from .tables import JointMomentTable, MomentTable

__all__ = [
    "GaussianState",
    "vacuum",
    "thermal",
    "coherent",
    "squeezed_vacuum",
    "tensor",
    "symplectic_form",
    "symplectic_eigenvalues",
    "linear_transform",
    "quadrature_variance",
    "min_variance_angle",
    "moments_of_linear_forms",
    "wick_moments",
    "joint_wick_moments",
    "mode_operator_form",
]

VACUUM_VARIANCE = 0.5
PHYSICALITY_TOL = 1e-10
SYMMETRY_RTOL = 1e-12


def symplectic_form(num_modes):
    """Block-diagonal symplectic form for (x1, p1, ..., xM, pM) ordering."""
    omega = np.zeros((2 * num_modes, 2 * num_modes))
    for k in range(num_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


def symplectic_eigenvalues(cov):
    """Symplectic spectrum of a covariance matrix, ascending.

    The values are the moduli of the eigenvalues of i Omega cov, each of
    which appears twice; every physical mode contributes one value >= 1/2.
    """
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise ValueError(f"covariance must be square with even size, got {cov.shape}")
    scale = max(1.0, float(np.max(np.abs(cov))))
    if np.max(np.abs(cov - cov.T)) > SYMMETRY_RTOL * scale:
        raise ValueError("covariance matrix is not symmetric")
    omega = symplectic_form(cov.shape[0] // 2)
    spectrum = np.sort(np.abs(np.linalg.eigvals(1j * omega @ cov)))
    return spectrum[::2]


@dataclass(frozen=True)
class GaussianState:
    """Immutable Gaussian state given by mean vector and covariance matrix."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64)
        cov = np.array(self.cov, dtype=np.float64)
        if mean.ndim != 1 or mean.size % 2:
            raise ValueError(f"mean must have even length, got shape {mean.shape}")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(
                f"covariance shape {cov.shape} does not match mean of size {mean.size}"
            )
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_RTOL * scale:
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        nu_min = float(np.min(symplectic_eigenvalues(cov)))
        if nu_min < VACUUM_VARIANCE - PHYSICALITY_TOL * scale:
            raise ValueError(
                f"covariance violates the uncertainty bound: min symplectic "
                f"eigenvalue {nu_min} < {VACUUM_VARIANCE}"
            )
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def num_modes(self):
        return self.mean.size // 2

    def marginal(self, modes):
        """Reduced state over the given mode indices, in the given order."""
        idx = []
        for m in modes:
            if not 0 <= m < self.num_modes:
                raise ValueError(f"mode index {m} out of range")
            idx.extend((2 * m, 2 * m + 1))
        idx = np.array(idx)
        return GaussianState(self.mean[idx], self.cov[np.ix_(idx, idx)])


def vacuum(num_modes=1):
    """Vacuum state of the requested number of modes."""
    n = 2 * num_modes
    return GaussianState(np.zeros(n), VACUUM_VARIANCE * np.eye(n))


def thermal(occupation, num_modes=1):
    """Thermal state with the given mean photon number in every mode."""
    if occupation < 0:
        raise ValueError(f"occupation must be non-negative, got {occupation}")
    n = 2 * num_modes
    return GaussianState(np.zeros(n), (occupation + VACUUM_VARIANCE) * np.eye(n))


def coherent(alpha):
    """Single-mode coherent state |alpha>."""
    alpha = complex(alpha)
    mean = np.array([math.sqrt(2) * alpha.real, math.sqrt(2) * alpha.imag])
    return GaussianState(mean, VACUUM_VARIANCE * np.eye(2))


def squeezed_vacuum(xi):
    """Single-mode squeezed vacuum S(xi)|0> with xi = r exp(i theta).

    The convention is S(xi) = exp((conj(xi) a^2 - xi adag^2) / 2), for which
    <a^2> = -exp(i theta) sinh(r) cosh(r) and <adag a> = sinh(r)^2.
    """
    xi = complex(xi)
    r = abs(xi)
    theta = math.atan2(xi.imag, xi.real)
    rot = np.array(
        [
            [math.cos(theta / 2), -math.sin(theta / 2)],
            [math.sin(theta / 2), math.cos(theta / 2)],
        ]
    )
    core = np.diag([math.exp(-2 * r), math.exp(2 * r)]) * VACUUM_VARIANCE
    return GaussianState(np.zeros(2), rot @ core @ rot.T)


def tensor(*states):
    """Tensor product of Gaussian states (modes concatenated in order)."""
    if not states:
        raise ValueError("tensor() needs at least one state")
    mean = np.concatenate([s.mean for s in states])
    total = mean.size
    cov = np.zeros((total, total))
    offset = 0
    for s in states:
        n = s.mean.size
        cov[offset : offset + n, offset : offset + n] = s.cov
        offset += n
    return GaussianState(mean, cov)


def linear_transform(state, matrix):
    """State of linear output observables R' = matrix @ R.

    The matrix may be rectangular (2M_out x 2M_in); the output must satisfy
    the uncertainty bound with respect to the standard symplectic form, which
    holds for every map realized by passive/active optics plus added noise.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != state.mean.size:
        raise ValueError(
            f"matrix shape {matrix.shape} does not act on {state.mean.size} quadratures"
        )
    return GaussianState(matrix @ state.mean, matrix @ state.cov @ matrix.T)


def quadrature_variance(state, mode, theta):
    """Variance of x cos(theta) + p sin(theta) in the given mode."""
    if not 0 <= mode < state.num_modes:
        raise ValueError(f"mode index {mode} out of range")
    c = np.zeros(state.mean.size)
    c[2 * mode] = math.cos(theta)
    c[2 * mode + 1] = math.sin(theta)
    return float(c @ state.cov @ c)


def min_variance_angle(state, mode):
    """Angle in [0, pi) minimizing the quadrature variance, and that variance."""
    if not 0 <= mode < state.num_modes:
        raise ValueError(f"mode index {mode} out of range")
    sxx = state.cov[2 * mode, 2 * mode]
    spp = state.cov[2 * mode + 1, 2 * mode + 1]
    sxp = state.cov[2 * mode, 2 * mode + 1]
    theta = 0.5 * math.atan2(-2.0 * sxp, -(sxx - spp))
    if theta < 0:
        theta += math.pi
    return theta, quadrature_variance(state, mode, theta)


# ---------------------------------------------------------------------------
# Wick machinery
# ---------------------------------------------------------------------------

_PARTITION_CACHE = {}


def _pair_partitions(n):
    """All partitions of range(n) into singletons and ordered pairs (i < j)."""
    if n in _PARTITION_CACHE:
        return _PARTITION_CACHE[n]

    def recurse(remaining):
        if not remaining:
            return [((), ())]
        first, rest = remaining[0], remaining[1:]
        out = []
        for singles, pairs in recurse(rest):
            out.append(((first,) + singles, pairs))
        for k, second in enumerate(rest):
            reduced = rest[:k] + rest[k + 1 :]
            for singles, pairs in recurse(reduced):
                out.append((singles, ((first, second),) + pairs))
        return out

    result = recurse(tuple(range(n)))
    _PARTITION_CACHE[n] = result
    return result


def moments_of_linear_forms(mean, second_moments, forms):
    """Expectation of an ordered product of linear forms under Wick's rule.

    Args:
        mean: length-D vector of first moments of the underlying variables R.
        second_moments: D x D matrix M such that the ordered pair expectation
            of the centered factors i (left) and j (right) is c_i @ M @ c_j.
            Pass the covariance for commuting (classical) variables and
            cov + (i/2) Omega for canonical operators.
        forms: (n, D) complex array; row i holds the coefficients c_i of the
            i-th factor in the product.

    Returns:
        The complex expectation value; 1 for an empty product.
    """
    forms = np.asarray(forms, dtype=np.complex128)
    if forms.size == 0:
        return 1.0 + 0.0j
    forms = np.atleast_2d(forms)
    n = forms.shape[0]
    mus = forms @ np.asarray(mean, dtype=np.complex128)
    pairings = forms @ np.asarray(second_moments, dtype=np.complex128) @ forms.T
    total = 0.0 + 0.0j
    for singles, pairs in _pair_partitions(n):
        term = 1.0 + 0.0j
        for i in singles:
            term *= mus[i]
        for i, j in pairs:
            term *= pairings[i, j]
        total += term
    return total


def mode_operator_form(num_modes, mode, dagger):
    """Coefficient row expressing a (or adag) of one mode over quadratures."""
    c = np.zeros(2 * num_modes, dtype=np.complex128)
    inv = 1.0 / math.sqrt(2)
    c[2 * mode] = inv
    c[2 * mode + 1] = -1j * inv if dagger else 1j * inv
    return c


def _quantum_pair_matrix(state):
    return state.cov + 0.5j * symplectic_form(state.num_modes)


def wick_moments(state, mode=0, max_order=8, ordering="normal"):
    """Moment table of one mode of a Gaussian state.

    For ``"normal"`` ordering entry (l, m) is ``<adag^l a^m>``; for
    ``"antinormal"`` it is ``<a^r adag^s>``.
    """
    if not 0 <= mode < state.num_modes:
        raise ValueError(f"mode index {mode} out of range")
    table = MomentTable(max_order, ordering)
    pair_matrix = _quantum_pair_matrix(state)
    a = mode_operator_form(state.num_modes, mode, dagger=False)
    adag = mode_operator_form(state.num_modes, mode, dagger=True)
    first, second = (adag, a) if ordering == "normal" else (a, adag)
    for (l, m), _ in table.items():
        forms = [first] * l + [second] * m
        table.data[l, m] = moments_of_linear_forms(state.mean, pair_matrix, forms)
    return table


def joint_wick_moments(state, modes=(0, 1), max_order=8):
    """Joint normally ordered moment table of two modes of a Gaussian state.

    Entry (l1, m1, l2, m2) is ``<adag_1^l1 a_1^m1 adag_2^l2 a_2^m2>`` for the
    two selected modes.
    """
    i, j = modes
    for m in (i, j):
        if not 0 <= m < state.num_modes:
            raise ValueError(f"mode index {m} out of range")
    table = JointMomentTable(max_order)
    pair_matrix = _quantum_pair_matrix(state)
    a1 = mode_operator_form(state.num_modes, i, dagger=False)
    adag1 = mode_operator_form(state.num_modes, i, dagger=True)
    a2 = mode_operator_form(state.num_modes, j, dagger=False)
    adag2 = mode_operator_form(state.num_modes, j, dagger=True)
    for l1, m1, l2, m2 in table.indices():
        forms = [adag1] * l1 + [a1] * m1 + [adag2] * l2 + [a2] * m2
        table.data[l1, m1, l2, m2] = moments_of_linear_forms(
            state.mean, pair_matrix, forms
        )
    return table
