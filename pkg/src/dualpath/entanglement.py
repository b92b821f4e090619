"""Two-mode covariance recovery and the Gaussian negativity witness.

The witness evaluates the negativity a Gaussian state would have given the
reconstructed first and second moments.  Because the Gaussian state is the
negativity minimizer at fixed second moments, a positive kernel certifies
entanglement for the actual state as well, whatever its higher moments.
"""

import math
from dataclasses import dataclass

import numpy as np

from .states import VACUUM_VARIANCE, symplectic_eigenvalues
from .tables import JointMomentTable

__all__ = [
    "TwoModeCovariance",
    "NegativityResult",
    "WitnessReport",
    "moments_to_covariance",
    "negativity_gaussian",
    "witness_report",
]

_CONSISTENCY_TOL = 1e-8


@dataclass(frozen=True)
class TwoModeCovariance:
    """Mean vector and covariance of two modes in (x1, p1, x2, p2) order."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64)
        cov = np.array(self.cov, dtype=np.float64)
        if mean.shape != (4,) or cov.shape != (4, 4):
            raise ValueError("two-mode covariance needs a 4-vector and 4x4 matrix")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > _CONSISTENCY_TOL * scale:
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def block_a(self):
        return self.cov[:2, :2]

    @property
    def block_b(self):
        return self.cov[2:, 2:]

    @property
    def block_c(self):
        return self.cov[:2, 2:]


def _real_entry(value, what):
    if abs(value.imag) > _CONSISTENCY_TOL * max(1.0, abs(value)):
        raise ValueError(
            f"{what} has imaginary part {value.imag}; the moment table is "
            "not conjugation symmetric"
        )
    return value.real


def moments_to_covariance(joint):
    """Two-mode covariance from a joint moment table of orders <= 2.

    The table holds per-channel normally ordered moments of the two
    reconstructed modes; the +1/2 vacuum terms of the same-mode variances
    restore the symmetrized quadrature covariances.
    """
    if joint.max_order < 2:
        raise ValueError("need moments up to order two")
    m1 = joint.entry(0, 1, 0, 0)
    m2 = joint.entry(0, 0, 0, 1)
    mean = math.sqrt(2.0) * np.array([m1.real, m1.imag, m2.real, m2.imag])
    x1, p1, x2, p2 = mean

    sq1 = joint.entry(0, 2, 0, 0)
    occ1 = _real_entry(joint.entry(1, 1, 0, 0), "<s1dag s1>")
    sq2 = joint.entry(0, 0, 0, 2)
    occ2 = _real_entry(joint.entry(0, 0, 1, 1), "<s2dag s2>")
    both = joint.entry(0, 1, 0, 1)
    cross = joint.entry(1, 0, 0, 1)

    cov = np.empty((4, 4))
    cov[0, 0] = sq1.real + occ1 + VACUUM_VARIANCE - x1 * x1
    cov[1, 1] = -sq1.real + occ1 + VACUUM_VARIANCE - p1 * p1
    cov[0, 1] = cov[1, 0] = sq1.imag - x1 * p1
    cov[2, 2] = sq2.real + occ2 + VACUUM_VARIANCE - x2 * x2
    cov[3, 3] = -sq2.real + occ2 + VACUUM_VARIANCE - p2 * p2
    cov[2, 3] = cov[3, 2] = sq2.imag - x2 * p2
    cov[0, 2] = cov[2, 0] = both.real + cross.real - x1 * x2
    cov[0, 3] = cov[3, 0] = both.imag + cross.imag - x1 * p2
    cov[1, 2] = cov[2, 1] = both.imag - cross.imag - p1 * x2
    cov[1, 3] = cov[3, 1] = -both.real + cross.real - p1 * p2
    return TwoModeCovariance(mean, cov)


@dataclass(frozen=True)
class NegativityResult:
    """Partial-transpose spectrum summary of a two-mode covariance.

    ``nu`` is the smallest partial-transpose symplectic eigenvalue scaled so
    that separable states satisfy nu >= 1; ``kernel`` is (1 - nu)/(2 nu),
    positive exactly when the Gaussian state is entangled; ``negativity``
    clips the kernel at zero.
    """

    nu: float
    kernel: float
    negativity: float


def negativity_gaussian(cov, tol=1e-8):
    """Gaussian negativity of a two-mode covariance via the PT spectrum.

    ``cov`` may be a TwoModeCovariance or a raw 4x4 matrix.  With ``tol``
    set, the covariance must be physical (symplectic eigenvalues >=
    1/2 - tol); pass ``tol=None`` to skip the gate for statistical input
    where the estimate may dip below the pure-state boundary.
    """
    matrix = cov.cov if isinstance(cov, TwoModeCovariance) else np.asarray(cov, float)
    if matrix.shape != (4, 4):
        raise ValueError(f"expected a 4x4 covariance, got {matrix.shape}")
    if tol is not None:
        nu_min = float(np.min(symplectic_eigenvalues(matrix)))
        if nu_min < VACUUM_VARIANCE - tol:
            raise ValueError(
                f"covariance is unphysical: min symplectic eigenvalue {nu_min}"
            )
    det_a = float(np.linalg.det(matrix[:2, :2]))
    det_b = float(np.linalg.det(matrix[2:, 2:]))
    det_c = float(np.linalg.det(matrix[:2, 2:]))
    det_full = float(np.linalg.det(matrix))
    delta_pt = det_a + det_b - 2.0 * det_c
    disc = delta_pt * delta_pt - 4.0 * det_full
    if disc < 0:
        # equal PT eigenvalues make the discriminant analytically zero but
        # numerically a rounding-scale negative; only reject real violations
        scale = max(delta_pt * delta_pt, abs(4.0 * det_full), 1.0e-300)
        if disc < -1.0e-10 * scale:
            raise ValueError(
                "partial-transpose discriminant is negative; the matrix is "
                "not a two-mode covariance"
            )
        disc = 0.0
    nu_sq = 0.5 * (delta_pt - math.sqrt(disc))
    if nu_sq <= 0:
        raise ValueError("partial-transpose symplectic eigenvalue is not positive")
    nu = 2.0 * math.sqrt(nu_sq)
    kernel = (1.0 - nu) / (2.0 * nu)
    return NegativityResult(nu=nu, kernel=kernel, negativity=max(0.0, kernel))


@dataclass(frozen=True)
class WitnessReport:
    """Outcome of the moment-based entanglement witness."""

    kernel: float | None
    kernel_error: float | None
    nu: float | None
    negativity: float | None
    verdict: str
    sigma_threshold: float
    n_blocks: int
    note: str

    def to_dict(self):
        return {
            "kernel": self.kernel,
            "kernel_error": self.kernel_error,
            "nu": self.nu,
            "negativity": self.negativity,
            "verdict": self.verdict,
            "sigma_threshold": self.sigma_threshold,
            "n_blocks": self.n_blocks,
            "note": self.note,
        }


_WITNESS_NOTE = (
    "kernel > 0 certifies entanglement for any state with these first and "
    "second moments; the Gaussian state minimizes the negativity at fixed "
    "moments"
)


def _leave_one_out(point, block, n_blocks):
    """Moment table with one equal-size block removed from the average."""
    table = JointMomentTable(point.max_order)
    table.data[...] = (n_blocks * point.data - block.data) / (n_blocks - 1)
    return table


def witness_report(output_moments, block_outputs=None, sigma_threshold=5.0):
    """Entanglement verdict from reconstructed output moments.

    ``output_moments`` is the joint table of the two modes leaving the
    splitter; ``block_outputs`` the per-block tables used for the kernel
    uncertainty.  The error is a delete-one jackknife over blocks: each
    replicate table (B * point - block_i) / (B - 1) stays close to the point
    estimate, so the nonlinear kernel is evaluated only where it is defined.
    Without blocks (or if any replicate fails to yield a kernel) the verdict
    is withheld rather than guessed.
    """
    if sigma_threshold <= 0:
        raise ValueError("sigma_threshold must be positive")
    n_blocks = 0 if block_outputs is None else len(block_outputs)

    def kernel_of(table):
        return negativity_gaussian(moments_to_covariance(table), tol=None)

    try:
        point = kernel_of(output_moments)
    except ValueError as exc:
        return WitnessReport(
            kernel=None,
            kernel_error=None,
            nu=None,
            negativity=None,
            verdict="withheld",
            sigma_threshold=sigma_threshold,
            n_blocks=n_blocks,
            note=f"kernel undefined: {exc}",
        )
    if block_outputs is None or len(block_outputs) < 2:
        return WitnessReport(
            kernel=point.kernel,
            kernel_error=None,
            nu=point.nu,
            negativity=point.negativity,
            verdict="withheld",
            sigma_threshold=sigma_threshold,
            n_blocks=n_blocks,
            note="no block tables, kernel uncertainty unavailable",
        )
    try:
        replicates = [
            kernel_of(_leave_one_out(output_moments, blk, n_blocks)).kernel
            for blk in block_outputs
        ]
    except ValueError as exc:
        return WitnessReport(
            kernel=point.kernel,
            kernel_error=None,
            nu=point.nu,
            negativity=point.negativity,
            verdict="withheld",
            sigma_threshold=sigma_threshold,
            n_blocks=n_blocks,
            note=f"kernel undefined on a jackknife replicate: {exc}",
        )
    centered = np.asarray(replicates) - np.mean(replicates)
    error = float(math.sqrt((n_blocks - 1) / n_blocks * np.sum(centered**2)))
    entangled = point.kernel > sigma_threshold * error
    return WitnessReport(
        kernel=point.kernel,
        kernel_error=error,
        nu=point.nu,
        negativity=point.negativity,
        verdict="entangled" if entangled else "not_detected",
        sigma_threshold=sigma_threshold,
        n_blocks=n_blocks,
        note=_WITNESS_NOTE,
    )
