"""Command line interface: simulate, reconstruct, compare, witness, ingest.

Every run configuration is a JSON file; reports embed the resolved
configuration and seed so a run can be repeated bit for bit.  The default
output directory is taken from the DUALPATH_OUTDIR environment variable when
set.

Exit codes: 0 success, 2 validation failure, 3 witness verdict withheld,
4 I/O failure.
"""

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .benchmark import (
    DEFAULT_MOMENTS,
    ComparisonGrid,
    fit_amp_scaling,
    fit_order_scaling,
    fit_shot_scaling,
    run_comparison,
)
from .chain import ChainConfig, build_dual_path, build_single_path
from .entanglement import witness_report
from .moments import estimate_channel_moments_blockwise, estimate_moments_blockwise
from .reconstruction import (
    AncillaMoments,
    blockwise_reconstruction,
    dpm_reconstruct,
    envelope_to_raw,
    refstate_reconstruct,
    spm_reconstruct,
)
from .sampling import load_csv, sample, save_csv
from .states import coherent, squeezed_vacuum, thermal, vacuum
from .tables import JointMomentTable, dump_json

OUTDIR_ENV = "DUALPATH_OUTDIR"

_RUN_KEYS = {"path", "input", "chain", "shots", "seed", "blocks", "max_order"}
_INPUT_KINDS = ("vacuum", "coherent", "thermal", "squeezed")


class WithheldVerdict(Exception):
    """Raised when the witness cannot commit to a verdict."""


def _complex_from(value, what):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"{what} must be a number or a [re, im] pair")


def make_input_state(spec):
    """Input state and its coherent amplitude from a description dict."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError('input spec must be a dict with a "kind" key')
    kind = spec["kind"]
    extra = set(spec) - {"kind", "alpha", "occupation", "xi"}
    if extra:
        raise ValueError(f"unknown input keys: {sorted(extra)}")
    if kind == "vacuum":
        return vacuum(), 0.0 + 0.0j
    if kind == "coherent":
        alpha = _complex_from(spec.get("alpha", 0.0), "alpha")
        return coherent(alpha), alpha
    if kind == "thermal":
        return thermal(float(spec.get("occupation", 0.0))), 0.0 + 0.0j
    if kind == "squeezed":
        xi = _complex_from(spec.get("xi", 0.0), "xi")
        return squeezed_vacuum(xi), 0.0 + 0.0j
    raise ValueError(f"unknown input kind {kind!r}; expected one of {_INPUT_KINDS}")


def _resolve_run(payload):
    unknown = set(payload) - _RUN_KEYS
    if unknown:
        raise ValueError(f"unknown run config keys: {sorted(unknown)}")
    run = {
        "path": payload.get("path", "dual"),
        "input": payload.get("input", {"kind": "vacuum"}),
        "chain": payload.get("chain", {}),
        "shots": int(payload.get("shots", 100000)),
        "seed": int(payload.get("seed", 0)),
        "blocks": int(payload.get("blocks", 20)),
        "max_order": int(payload.get("max_order", 4)),
    }
    if run["path"] not in ("dual", "single"):
        raise ValueError(f'path must be "dual" or "single", got {run["path"]!r}')
    if run["shots"] <= 0:
        raise ValueError("shots must be positive")
    return run


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _outdir(args):
    out = args.out or os.environ.get(OUTDIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _complex_pair(value):
    return None if value is None else [value.real, value.imag]


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(args):
    run = _resolve_run(_load_json(args.config))
    if args.shots is not None:
        run["shots"] = int(args.shots)
    if args.seed is not None:
        run["seed"] = int(args.seed)
    state, _ = make_input_state(run["input"])
    config = ChainConfig.from_dict(run["chain"])
    run["chain"] = config.to_dict()
    builder = build_dual_path if run["path"] == "dual" else build_single_path
    model = builder(state, config)
    batch = sample(model, run["shots"], run["seed"])

    outdir = _outdir(args)
    shots_path = outdir / "shots.csv"
    model_path = outdir / "model.json"
    save_csv(batch, shots_path)
    payload = {
        "run": run,
        "n_channels": model.n_channels,
        "gains": list(model.effective_gains),
        "measured": {
            "mean": model.measured.mean.tolist(),
            "cov": model.measured.cov.tolist(),
        },
        "truth": {
            "signal": model.truth_signal.to_dict(),
            "ancilla": None
            if model.truth_ancilla is None
            else model.truth_ancilla.to_dict(),
            "noise": [t.to_dict() for t in model.truth_noise],
        },
    }
    dump_json(payload, model_path)
    print(f"wrote {shots_path} ({batch.n_shots} shots) and {model_path}")
    return 0


# ---------------------------------------------------------------------------
# reconstruct
# ---------------------------------------------------------------------------


def _table_or_none(table):
    return None if table is None else table.to_dict()


def _load_batch(shots_path, model_payload):
    gains = tuple(model_payload["gains"])
    return load_csv(shots_path, gains)


def _reference_amplitude(model_payload):
    spec = model_payload["run"]["input"]
    kind = spec.get("kind")
    if kind == "vacuum":
        return 0.0 + 0.0j
    if kind == "coherent":
        return _complex_from(spec.get("alpha", 0.0), "alpha")
    raise ValueError(
        "single-path reference run must use a vacuum or coherent input, "
        f"got {kind!r}"
    )


def _reconstruct_dpm(args, model_payload, report):
    batch = _load_batch(args.shots, model_payload)
    if batch.n_channels != 2:
        raise ValueError("dual-path reconstruction needs a four-column record")
    order = report["max_order"]
    blocks = report["n_blocks"]
    point, block_tables = estimate_moments_blockwise(batch, order, blocks)
    anc = AncillaMoments.thermal(model_payload["run"]["chain"]["n_anc"])
    result, _ = blockwise_reconstruction(
        dpm_reconstruct,
        (point,),
        [(b,) for b in block_tables],
        ancilla=anc,
        max_order=order,
    )
    report["n_shots"] = batch.n_shots
    report["signal"] = _table_or_none(result.signal)
    report["noise"] = [t.to_dict() for t in result.noise]
    report["ancilla"] = _table_or_none(result.ancilla)
    report["ancilla_mean"] = _complex_pair(result.ancilla_mean)
    report["ancilla_mean_error"] = result.ancilla_mean_error
    report["ancilla_mean_expected"] = _complex_pair(anc.mean)
    report["envelope_moments"] = point.to_dict()


def _reconstruct_spm(args, model_payload, report):
    if not args.reference_shots or not args.reference_model:
        raise ValueError(
            "single-path reconstruction needs --reference-shots and "
            "--reference-model"
        )
    ref_payload = _load_json(args.reference_model)
    batch = _load_batch(args.shots, model_payload)
    ref_batch = _load_batch(args.reference_shots, ref_payload)
    if batch.n_channels != 1 or ref_batch.n_channels != 1:
        raise ValueError("single-path reconstruction needs two-column records")
    gain = model_payload["gains"][0]
    if abs(gain - ref_payload["gains"][0]) > 1e-9 * gain:
        raise ValueError("signal and reference runs have different gains")
    order = report["max_order"]
    blocks = report["n_blocks"]
    sig_point, sig_blocks = estimate_channel_moments_blockwise(batch, 0, order, blocks)
    ref_point, ref_blocks = estimate_channel_moments_blockwise(
        ref_batch, 0, order, blocks
    )
    alpha = _reference_amplitude(ref_payload)
    raw = lambda t: envelope_to_raw(t, gain)
    result, _ = blockwise_reconstruction(
        spm_reconstruct,
        (raw(sig_point), raw(ref_point)),
        [(raw(s), raw(r)) for s, r in zip(sig_blocks, ref_blocks)],
        gain=gain,
        reference_amplitude=alpha,
        assume_zero_mean=not args.keep_noise_mean,
    )
    report["n_shots"] = batch.n_shots
    report["reference_amplitude"] = _complex_pair(alpha)
    report["signal"] = _table_or_none(result.signal)
    report["noise"] = [t.to_dict() for t in result.noise]


def _reconstruct_refstate(args, model_payload, report):
    if not args.reference_shots or not args.reference_model:
        raise ValueError(
            "reference-state reconstruction needs --reference-shots and "
            "--reference-model of a vacuum-input run"
        )
    ref_payload = _load_json(args.reference_model)
    if ref_payload["run"]["input"].get("kind") != "vacuum":
        raise ValueError("reference-state run must have a vacuum input")
    batch = _load_batch(args.shots, model_payload)
    ref_batch = _load_batch(args.reference_shots, ref_payload)
    if batch.n_channels != 2 or ref_batch.n_channels != 2:
        raise ValueError("reference-state reconstruction needs four-column records")
    order = report["max_order"]
    blocks = report["n_blocks"]
    sig_point, sig_blocks = estimate_moments_blockwise(batch, order, blocks)
    vac_point, vac_blocks = estimate_moments_blockwise(ref_batch, order, blocks)
    result, block_results = blockwise_reconstruction(
        refstate_reconstruct,
        (sig_point, vac_point),
        list(zip(sig_blocks, vac_blocks)),
        max_order=order,
    )
    report["n_shots"] = batch.n_shots
    report["output_moments"] = result.output_moments.to_dict()
    report["blocks"] = {
        "output_moments": [b.output_moments.to_dict() for b in block_results]
    }


def cmd_reconstruct(args):
    model_payload = _load_json(args.model)
    run = model_payload["run"]
    report = {
        "method": args.method,
        "max_order": args.order or run["max_order"],
        "n_blocks": args.blocks or run["blocks"],
        "gains": model_payload["gains"],
        "seed": run["seed"],
        "config": run,
    }
    handler = {
        "dpm": _reconstruct_dpm,
        "spm": _reconstruct_spm,
        "refstate": _reconstruct_refstate,
    }[args.method]
    handler(args, model_payload, report)
    out = Path(args.out) if args.out else _outdir(args) / "report.json"
    dump_json(report, out)
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------------------
# witness
# ---------------------------------------------------------------------------


def cmd_witness(args):
    payload = _load_json(args.moments)
    if "output_moments" not in payload:
        raise ValueError(
            "witness needs a reference-state report with output_moments"
        )
    point = JointMomentTable.from_dict(payload["output_moments"])
    blocks = None
    if "blocks" in payload and "output_moments" in payload["blocks"]:
        blocks = [
            JointMomentTable.from_dict(b)
            for b in payload["blocks"]["output_moments"]
        ]
    rep = witness_report(point, blocks, sigma_threshold=args.sigma)
    out = Path(args.out) if args.out else _outdir(args) / "witness.json"
    dump_json(rep.to_dict(), out)
    print(f"verdict: {rep.verdict} (kernel {rep.kernel}, error {rep.kernel_error})")
    if rep.verdict == "withheld":
        raise WithheldVerdict(rep.note)
    return 0


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def _grid_fits(table):
    """All scaling fits the grid supports, keyed by cell and moment."""
    grid = table.grid
    fits = {}
    by_amp = {}
    for occ in grid.amp_occupations:
        per_moment = {}
        for mi, (l, m) in enumerate(table.moments):
            entry = {}
            for name, sig in (("dpm", table.sigma_dpm), ("spm", table.sigma_spm)):
                values = [
                    sig[table.cell_index(n, occ), mi] for n in grid.shot_counts
                ]
                try:
                    slope, err = fit_shot_scaling(grid.shot_counts, values)
                    entry[name] = {"slope": slope, "err": err}
                except ValueError as exc:
                    entry[name] = {"error": str(exc)}
            per_moment[f"{l},{m}"] = entry
        by_amp[repr(occ)] = per_moment
    fits["shot_scaling"] = by_amp

    by_n = {}
    for n in grid.shot_counts:
        per_moment = {}
        for mi, (l, m) in enumerate(table.moments):
            entry = {}
            for name, sig in (("dpm", table.sigma_dpm), ("spm", table.sigma_spm)):
                values = [
                    sig[table.cell_index(n, occ), mi] for occ in grid.amp_occupations
                ]
                try:
                    a, b, residual = fit_amp_scaling(
                        grid.amp_occupations, values, l + m
                    )
                    entry[name] = {"a": a, "b": b, "residual": residual}
                except ValueError as exc:
                    entry[name] = {"error": str(exc)}
            per_moment[f"{l},{m}"] = entry
        by_n[str(n)] = per_moment
    fits["amp_scaling"] = by_n

    by_cell = {}
    orders = sorted({l + m for l, m in table.moments})
    order_moment = {k: (0, k) for k in orders if (0, k) in table.moments}
    for ci, (n, occ) in enumerate(table.cells):
        entry = {}
        for name, sig in (("dpm", table.sigma_dpm), ("spm", table.sigma_spm)):
            ks = sorted(order_moment)
            values = [sig[ci, table.moments.index(order_moment[k])] for k in ks]
            try:
                rate, prefactor, residual = fit_order_scaling(ks, values)
                entry[name] = {
                    "rate": rate,
                    "prefactor": prefactor,
                    "residual": residual,
                }
            except ValueError as exc:
                entry[name] = {"error": str(exc)}
        by_cell[f"n_shots={n},n_amp={occ!r}"] = entry
    fits["order_scaling"] = by_cell
    return fits


def cmd_compare(args):
    payload = _load_json(args.config)
    unknown = set(payload) - {"input", "chain", "grid", "moments"}
    if unknown:
        raise ValueError(f"unknown compare config keys: {sorted(unknown)}")
    state, _ = make_input_state(payload.get("input", {"kind": "vacuum"}))
    config = ChainConfig.from_dict(payload.get("chain", {}))
    grid_payload = dict(payload.get("grid", {}))
    unknown = set(grid_payload) - {
        "shot_counts",
        "amp_occupations",
        "repetitions",
        "n_blocks",
        "max_order",
        "seed",
    }
    if unknown:
        raise ValueError(f"unknown grid keys: {sorted(unknown)}")
    grid = ComparisonGrid(**grid_payload)
    moments = payload.get("moments")
    moments = DEFAULT_MOMENTS if moments is None else [tuple(m) for m in moments]

    table = run_comparison(state, config, grid, moments)

    outdir = _outdir(args)
    table.save_csv(outdir / "ratios.csv")
    dump_json(_grid_fits(table), outdir / "fits.json")
    resolved = {
        "input": payload.get("input", {"kind": "vacuum"}),
        "chain": config.to_dict(),
        "grid": {
            "shot_counts": list(grid.shot_counts),
            "amp_occupations": list(grid.amp_occupations),
            "repetitions": grid.repetitions,
            "n_blocks": grid.n_blocks,
            "max_order": grid.max_order,
            "seed": grid.seed,
        },
        "moments": [list(m) for m in table.moments],
    }
    dump_json(resolved, outdir / "config.json")
    print(f"wrote {outdir / 'ratios.csv'} and {outdir / 'fits.json'}")
    return 0


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------


def cmd_ingest(args):
    gains = tuple(float(g) for g in args.gains.split(","))
    batch = load_csv(args.shots, gains)
    out = Path(args.out) if args.out else _outdir(args) / "shots.csv"
    save_csv(batch, out)
    summary = {
        "n_shots": batch.n_shots,
        "n_channels": batch.n_channels,
        "gains": list(batch.gains),
        "columns": {},
    }
    names = ["x1", "p1", "x2", "p2"][: batch.data.shape[1]]
    for idx, name in enumerate(names):
        col = batch.data[:, idx]
        summary["columns"][name] = {
            "min": float(col.min()),
            "max": float(col.max()),
            "mean": float(col.mean()),
        }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dualpath",
        description="Simulate and reconstruct dual-path microwave detection runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample shots from a configured receiver")
    p.add_argument("--config", required=True, help="run configuration JSON")
    p.add_argument("--out", help="output directory")
    p.add_argument("--shots", type=int, help="override the configured shot count")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="reconstruct moments from a shot record")
    p.add_argument("--method", required=True, choices=("dpm", "spm", "refstate"))
    p.add_argument("--shots", required=True, help="signal-run shot CSV")
    p.add_argument("--model", required=True, help="signal-run model JSON")
    p.add_argument("--reference-shots", help="reference-run shot CSV")
    p.add_argument("--reference-model", help="reference-run model JSON")
    p.add_argument("--order", type=int, help="moment order cap")
    p.add_argument("--blocks", type=int, help="bootstrap block count")
    p.add_argument(
        "--keep-noise-mean",
        action="store_true",
        help="do not pin the first-order reference noise moments to zero",
    )
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("witness", help="entanglement verdict from a refstate report")
    p.add_argument("--moments", required=True, help="reference-state report JSON")
    p.add_argument("--sigma", type=float, default=5.0, help="significance threshold")
    p.add_argument("--out", help="witness JSON path")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("compare", help="equal-budget dual- vs single-path comparison")
    p.add_argument("--config", required=True, help="comparison configuration JSON")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("ingest", help="validate and normalize an external shot CSV")
    p.add_argument("--shots", required=True, help="raw shot CSV")
    p.add_argument("--gains", required=True, help="comma-separated effective gains")
    p.add_argument("--out", help="normalized CSV path")
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WithheldVerdict as exc:
        print(f"verdict withheld: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
