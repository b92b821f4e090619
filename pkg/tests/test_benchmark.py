"""Spread-ratio comparison harness and the scaling-law fits."""

import csv

import numpy as np
import pytest

from dualpath.benchmark import (
    ComparisonGrid,
    fit_amp_scaling,
    fit_order_scaling,
    fit_shot_scaling,
    run_comparison,
)
from dualpath.chain import ChainConfig
from dualpath.states import coherent

TINY_GRID = ComparisonGrid(
    shot_counts=(250,),
    amp_occupations=(1.0,),
    repetitions=20,
    n_blocks=4,
    max_order=2,
    seed=7,
)


def test_grid_validation():
    with pytest.raises(ValueError):
        ComparisonGrid(shot_counts=(), amp_occupations=(1.0,))
    with pytest.raises(ValueError):
        ComparisonGrid(shot_counts=(0,), amp_occupations=(1.0,))
    with pytest.raises(ValueError):
        ComparisonGrid(shot_counts=(100,), amp_occupations=(1.0,), repetitions=1)
    with pytest.raises(ValueError):
        # 21 repetitions cannot split into 4 equal blocks
        ComparisonGrid(
            shot_counts=(100,), amp_occupations=(1.0,), repetitions=21, n_blocks=4
        )


def test_grid_cells_cover_product():
    grid = ComparisonGrid(
        shot_counts=(100, 200), amp_occupations=(0.0, 1.0), repetitions=20, n_blocks=4
    )
    assert grid.cells == ((100, 0.0), (100, 1.0), (200, 0.0), (200, 1.0))


def test_comparison_rejects_out_of_range_moment():
    with pytest.raises(ValueError):
        run_comparison(coherent(1.0), ChainConfig(), TINY_GRID, moments=((1, 2),))
    with pytest.raises(ValueError):
        run_comparison(coherent(1.0), ChainConfig(), TINY_GRID, moments=((0, 0),))


def test_comparison_runs_and_is_deterministic():
    moments = ((0, 1), (1, 1))
    table1 = run_comparison(coherent(1.0 + 1.0j), ChainConfig(), TINY_GRID, moments)
    table2 = run_comparison(coherent(1.0 + 1.0j), ChainConfig(), TINY_GRID, moments)
    assert np.array_equal(table1.ratio, table2.ratio)
    assert np.array_equal(table1.sigma_spm, table2.sigma_spm)
    assert np.all(np.isfinite(table1.ratio))
    assert np.all(table1.ratio > 0)
    assert np.all(table1.ratio_err > 0)
    assert np.all(table1.sigma_dpm > 0)
    assert np.all(table1.sigma_spm > 0)
    assert table1.cells == ((250, 1.0),)
    assert table1.cell_index(250, 1.0) == 0
    with pytest.raises(KeyError):
        table1.cell_index(999, 1.0)


def test_ratio_table_csv_round_trip(tmp_path):
    table = run_comparison(
        coherent(1.0), ChainConfig(), TINY_GRID, moments=((0, 1), (0, 2))
    )
    path = tmp_path / "ratios.csv"
    table.save_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(table.cells) * len(table.moments)
    for row, expected in zip(rows, table.rows()):
        assert int(row["n_shots"]) == expected["n_shots"]
        assert float(row["ratio"]) == expected["ratio"]
        assert float(row["sigma_spm"]) == expected["sigma_spm"]


def test_fit_shot_scaling_recovers_inverse_root():
    ns = np.array([100, 300, 1000, 3000, 10000])
    slope, err = fit_shot_scaling(ns, 3.0 / np.sqrt(ns))
    assert abs(slope + 0.5) < 1e-12
    assert err < 1e-12


def test_fit_shot_scaling_input_gates():
    with pytest.raises(ValueError):
        fit_shot_scaling([100, 1000], [0.3, 0.1])
    with pytest.raises(ValueError):
        fit_shot_scaling([100, 200, 400], [0.3, 0.2, 0.1])


def test_fit_amp_scaling_exact_recovery():
    occ = np.array([0.0, 1.0, 2.0, 5.0, 10.0])
    sigmas = 2.5 * (occ + 1.3) ** 2.0
    a, b, residual = fit_amp_scaling(occ, sigmas, total_order=4)
    assert abs(a - 2.5) < 1e-6
    assert abs(b - 1.3) < 1e-6
    assert residual < 1e-8
    with pytest.raises(ValueError):
        fit_amp_scaling([1.0, 2.0], [1.0, 2.0], total_order=2)


def test_fit_order_scaling_exact_recovery():
    orders = np.array([1, 2, 3, 4])
    sigmas = 0.2 * np.exp(0.8 * orders)
    rate, prefactor, residual = fit_order_scaling(orders, sigmas)
    assert abs(rate - 0.8) < 1e-12
    assert abs(prefactor - 0.2) < 1e-12
    assert residual < 1e-12
    with pytest.raises(ValueError):
        fit_order_scaling([1, 2], [1.0, 2.0])
