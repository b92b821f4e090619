"""Equal-budget statistical comparison of dual-path against single-path.

For every grid cell the dual-path receiver takes N shots of four quadratures
while the single-path receiver spends the same budget on two runs (reference
plus signal) of N shots of two quadratures each.  Repeating the experiment R
times gives the statistical spread sigma of every reconstructed moment;
block averages of the R repetitions give the uncertainty of the spread
ratio.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import curve_fit

from .chain import build_dual_path, build_single_path
from .moments import estimate_channel_moments, estimate_moments
from .reconstruction import (
    AncillaMoments,
    dpm_reconstruct,
    envelope_to_raw,
    spm_reconstruct,
)
from .sampling import sample
from .states import vacuum

__all__ = [
    "ComparisonGrid",
    "RatioTable",
    "DEFAULT_MOMENTS",
    "run_comparison",
    "fit_shot_scaling",
    "fit_amp_scaling",
    "fit_order_scaling",
]

DEFAULT_MOMENTS = ((0, 1), (0, 2), (1, 1), (0, 3), (1, 2), (0, 4), (1, 3), (2, 2))


@dataclass(frozen=True)
class ComparisonGrid:
    """Grid of shot counts and amplifier occupations for the comparison."""

    shot_counts: tuple
    amp_occupations: tuple
    repetitions: int = 5000
    n_blocks: int = 20
    max_order: int = 4
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "shot_counts", tuple(int(n) for n in self.shot_counts))
        object.__setattr__(
            self, "amp_occupations", tuple(float(n) for n in self.amp_occupations)
        )
        if not self.shot_counts or not self.amp_occupations:
            raise ValueError("grid must contain at least one cell")
        if any(n <= 0 for n in self.shot_counts):
            raise ValueError("shot counts must be positive")
        if self.repetitions < 2 or self.n_blocks < 2:
            raise ValueError("need at least two repetitions and two blocks")
        if self.repetitions % self.n_blocks:
            raise ValueError("repetitions must divide into equal blocks")

    @property
    def cells(self):
        return tuple(
            (n, occ) for n in self.shot_counts for occ in self.amp_occupations
        )


@dataclass
class RatioTable:
    """Per-cell, per-moment spread ratios sigma_DP / sigma_SP."""

    moments: tuple
    cells: tuple
    ratio: np.ndarray
    ratio_err: np.ndarray
    sigma_dpm: np.ndarray
    sigma_spm: np.ndarray
    grid: ComparisonGrid

    def rows(self):
        out = []
        for ci, (n, occ) in enumerate(self.cells):
            for mi, (l, m) in enumerate(self.moments):
                out.append(
                    {
                        "n_shots": n,
                        "n_amp": occ,
                        "l": l,
                        "m": m,
                        "ratio": float(self.ratio[ci, mi]),
                        "ratio_err": float(self.ratio_err[ci, mi]),
                        "sigma_dpm": float(self.sigma_dpm[ci, mi]),
                        "sigma_spm": float(self.sigma_spm[ci, mi]),
                    }
                )
        return out

    def save_csv(self, path):
        names = [
            "n_shots",
            "n_amp",
            "l",
            "m",
            "ratio",
            "ratio_err",
            "sigma_dpm",
            "sigma_spm",
        ]
        lines = [",".join(names)]
        for row in self.rows():
            lines.append(",".join(repr(row[k]) for k in names))
        with open(path, "w") as fh:
            fh.write("\n".join(lines))
            fh.write("\n")

    def cell_index(self, n_shots, n_amp):
        for ci, (n, occ) in enumerate(self.cells):
            if n == n_shots and occ == n_amp:
                return ci
        raise KeyError(f"no cell ({n_shots}, {n_amp}) in the table")


def _rep_seed(base, *path):
    return int(np.random.SeedSequence([base, *path]).generate_state(1)[0])


def _complex_spread(values, n_blocks):
    """Per-block total spread of complex samples, shape (B, ...)."""
    blocks = values.reshape(n_blocks, -1, *values.shape[1:])
    return np.sqrt(
        np.var(blocks.real, axis=1, ddof=1) + np.var(blocks.imag, axis=1, ddof=1)
    )


def run_comparison(input_state, base_config, grid, moments=DEFAULT_MOMENTS):
    """Spread ratio table over the full grid.

    Both methods consume identical record budgets per repetition: the
    dual-path run uses N shots of four quadratures, the single-path pair of
    runs 2N shots of two.
    """
    moments = tuple((int(l), int(m)) for l, m in moments)
    K = grid.max_order
    for l, m in moments:
        if l + m > K or l + m < 1:
            raise ValueError(f"moment ({l}, {m}) outside order range 1..{K}")
    n_cells = len(grid.cells)
    ratio = np.empty((n_cells, len(moments)))
    ratio_err = np.empty_like(ratio)
    sigma_dpm = np.empty_like(ratio)
    sigma_spm = np.empty_like(ratio)

    for ci, (n_shots, n_amp) in enumerate(grid.cells):
        config = replace(base_config, n_amp1=n_amp, n_amp2=n_amp)
        dual = build_dual_path(input_state, config, truth_order=K)
        single = build_single_path(input_state, config, truth_order=K)
        reference = build_single_path(vacuum(), config, truth_order=K)
        gain = single.effective_gains[0]
        budget_dual = n_shots * 4
        budget_single = 2 * (n_shots * 2)
        if budget_dual != budget_single:
            raise AssertionError("record budgets diverged; comparison is unfair")

        vals_dp = np.empty((grid.repetitions, len(moments)), dtype=np.complex128)
        vals_sp = np.empty_like(vals_dp)
        anc = AncillaMoments.thermal(config.n_anc)
        for rep in range(grid.repetitions):
            batch = sample(dual, n_shots, _rep_seed(grid.seed, ci, rep, 0))
            joint = estimate_moments(batch, K, n_blocks=1)
            rec_dp = dpm_reconstruct(joint, anc, K)

            ref_batch = sample(reference, n_shots, _rep_seed(grid.seed, ci, rep, 1))
            sig_batch = sample(single, n_shots, _rep_seed(grid.seed, ci, rep, 2))
            raw_ref = envelope_to_raw(
                estimate_channel_moments(ref_batch, 0, K, n_blocks=1), gain
            )
            raw_sig = envelope_to_raw(
                estimate_channel_moments(sig_batch, 0, K, n_blocks=1), gain
            )
            rec_sp = spm_reconstruct(raw_sig, raw_ref, gain)

            for mi, (l, m) in enumerate(moments):
                vals_dp[rep, mi] = rec_dp.signal.data[l, m]
                vals_sp[rep, mi] = rec_sp.signal.data[l, m]

        spread_dp = _complex_spread(vals_dp, grid.n_blocks)
        spread_sp = _complex_spread(vals_sp, grid.n_blocks)
        block_ratio = spread_dp / spread_sp
        ratio[ci] = block_ratio.mean(axis=0)
        ratio_err[ci] = block_ratio.std(axis=0, ddof=1) / math.sqrt(grid.n_blocks)
        sigma_dpm[ci] = spread_dp.mean(axis=0)
        sigma_spm[ci] = spread_sp.mean(axis=0)

    return RatioTable(
        moments=moments,
        cells=grid.cells,
        ratio=ratio,
        ratio_err=ratio_err,
        sigma_dpm=sigma_dpm,
        sigma_spm=sigma_spm,
        grid=grid,
    )


# ---------------------------------------------------------------------------
# Scaling fits
# ---------------------------------------------------------------------------


def fit_shot_scaling(shot_counts, sigmas):
    """Log-log slope of sigma against the shot count, with its uncertainty."""
    ns = np.asarray(shot_counts, dtype=float)
    sg = np.asarray(sigmas, dtype=float)
    if ns.size < 3:
        raise ValueError("need at least three shot counts for a slope")
    if ns.max() / ns.min() < 10.0:
        raise ValueError("shot counts must span at least a decade")
    coeffs, cov = np.polyfit(np.log10(ns), np.log10(sg), 1, cov=True)
    return float(coeffs[0]), float(math.sqrt(cov[0, 0]))


def fit_amp_scaling(occupations, sigmas, total_order):
    """Fit sigma = a (n_amp + b)^(k/2) with b >= 0, in log space.

    Returns (a, b, rms_log_residual); raises if the optimizer does not
    converge.
    """
    occ = np.asarray(occupations, dtype=float)
    sg = np.asarray(sigmas, dtype=float)
    if occ.size < 3:
        raise ValueError("need at least three occupations for the fit")
    k = float(total_order)

    def model(n, log_a, b):
        return log_a + 0.5 * k * np.log(n + b)

    p0 = (float(np.log(sg[0]) - 0.5 * k * np.log(occ[0] + 1.0)), 1.0)
    try:
        popt, _ = curve_fit(
            model,
            occ,
            np.log(sg),
            p0=p0,
            bounds=([-np.inf, 0.0], [np.inf, np.inf]),
            maxfev=20000,
        )
    except RuntimeError as exc:
        raise ValueError(f"amplifier-noise scaling fit did not converge: {exc}")
    residual = float(np.sqrt(np.mean((np.log(sg) - model(occ, *popt)) ** 2)))
    return float(math.exp(popt[0])), float(popt[1]), residual


def fit_order_scaling(orders, sigmas):
    """Fit sigma = A exp(c k) against the moment order k.

    Returns (rate c, prefactor A, rms_log_residual).
    """
    ks = np.asarray(orders, dtype=float)
    sg = np.asarray(sigmas, dtype=float)
    if ks.size < 3:
        raise ValueError("need at least three orders for the fit")
    coeffs = np.polyfit(ks, np.log(sg), 1)
    residual = float(np.sqrt(np.mean((np.log(sg) - np.polyval(coeffs, ks)) ** 2)))
    return float(coeffs[0]), float(math.exp(coeffs[1])), residual
