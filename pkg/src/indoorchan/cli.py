"""Command-line front end: track simulation, data export and self-validation.

Subcommands
-----------
generate-lsp   sample large-scale parameters along a track into a CSV
generate-cir   synthesize path sets and tapped-delay-line dumps along a track
fit            recover scaling-law coefficients from sample CSVs
validate       run the acceptance suite and report pass/fail per criterion

All outputs are reproducible: a fixed seed gives byte-identical files, and
every file header embeds the scenario name, the seed and the tool version.
Exit codes: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import (
    SampleRecord,
    estimate_cross_corr,
    estimate_decorrelation,
    fit_lsp_model,
)
from .fields import CorrelatedFieldSet, lsp_track
from .params import (
    ScenarioFormatError,
    ScenarioTable,
    builtin_scenario,
    load_scenario,
    path_loss,
    save_scenario,
)
from .smallscale import DEFAULT_N_PATHS, synthesize_pathset, to_cir
from .tables import SCENARIO_NAMES, VAR_NAMES, XCORR_ORDER

RX_HEIGHT_M = 2.0

CSV_COLUMNS = (
    "position_x", "position_y", "f_ghz", "d_2d", "h_tx", "condition",
    "pl_db", "sf_db", "kf_db", "ds_log10s", "asd_log10deg", "asa_log10deg",
    "esd_log10deg", "esa_log10deg", "xpr_db",
)

_COLUMN_BY_LSP = {
    "SF": "sf_db", "KF": "kf_db", "DS": "ds_log10s", "ASD": "asd_log10deg",
    "ASA": "asa_log10deg", "ESD": "esd_log10deg", "ESA": "esa_log10deg",
    "XPR": "xpr_db",
}


class UsageError(ValueError):
    """Invalid input that should exit with code 2."""


@dataclass(frozen=True)
class TrackSpec:
    """A receiver trajectory plus the link configuration for one run."""

    waypoints: tuple
    sample_spacing_m: float
    tx_position: tuple | None
    tx_track: tuple | None
    tx_height_m: float
    f_ghz: float
    condition: str
    seed: int

    def __post_init__(self):
        if len(self.waypoints) < 1:
            raise UsageError("track needs at least one waypoint")
        if not self.sample_spacing_m > 0:
            raise UsageError("sample spacing must be > 0")
        if not self.tx_height_m > 0:
            raise UsageError("TX height must be > 0")
        if not self.f_ghz > 0:
            raise UsageError("frequency must be > 0")
        if (self.tx_position is None) == (self.tx_track is None):
            raise UsageError("give exactly one of --tx-pos or --tx-track")
        if self.tx_track is not None and len(self.tx_track) < 2:
            raise UsageError("--tx-track needs at least two waypoints")


def _polyline_lengths(points: np.ndarray):
    steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(steps)])


def _interp_polyline(points: np.ndarray, s: np.ndarray) -> np.ndarray:
    arc = _polyline_lengths(points)
    if arc[-1] == 0.0:
        return np.repeat(points[:1], len(s), axis=0)
    x = np.interp(s, arc, points[:, 0])
    y = np.interp(s, arc, points[:, 1])
    return np.column_stack([x, y])


def sample_track(spec: TrackSpec):
    """Sample RX (and TX) positions along the waypoints at fixed spacing."""
    rx_way = np.asarray(spec.waypoints, dtype=float)
    total = _polyline_lengths(rx_way)[-1]
    n = int(math.floor(total / spec.sample_spacing_m + 1e-9)) + 1
    s = np.arange(n) * spec.sample_spacing_m
    rx = _interp_polyline(rx_way, s)
    if spec.tx_position is not None:
        tx = np.broadcast_to(np.asarray(spec.tx_position, dtype=float), rx.shape)
    else:
        tx_way = np.asarray(spec.tx_track, dtype=float)
        frac = s / total if total > 0 else np.zeros_like(s)
        tx = _interp_polyline(tx_way, frac * _polyline_lengths(tx_way)[-1])
    return rx, tx


def _fmt(v: float) -> str:
    return repr(float(v))


def _header_lines(table: ScenarioTable, spec: TrackSpec, extra=()):
    lines = [
        f"# indoorchan {__version__}",
        f"# scenario: {table.name}",
        f"# condition: {table.condition}",
        f"# scenario_hash: {hashlib.sha256(save_scenario(table).encode()).hexdigest()[:16]}",
        f"# seed: {spec.seed}",
        f"# f_ghz: {_fmt(spec.f_ghz)}",
        f"# tx_height_m: {_fmt(spec.tx_height_m)}",
        f"# rx_height_m: {_fmt(RX_HEIGHT_M)}",
    ]
    lines.extend(extra)
    return lines


def generate_lsp(table: ScenarioTable, spec: TrackSpec, out: io.TextIOBase) -> int:
    """Write one CSV row per track sample; returns the number of rows."""
    rx, tx = sample_track(spec)
    fieldset = CorrelatedFieldSet(table, seed=spec.seed)
    realizations = lsp_track(fieldset, table, rx, tx, spec.f_ghz, spec.tx_height_m)
    for line in _header_lines(table, spec):
        out.write(line + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in realizations:
        pl = path_loss(table, spec.f_ghz, r.d_2d)
        writer.writerow([
            _fmt(r.position[0]), _fmt(r.position[1]), _fmt(r.f_ghz), _fmt(r.d_2d),
            _fmt(r.h_tx), table.condition, _fmt(pl), _fmt(r.sf),
            "" if r.kf is None else _fmt(r.kf),
            _fmt(r.ds), _fmt(r.asd), _fmt(r.asa), _fmt(r.esd), _fmt(r.esa),
            _fmt(r.xpr),
        ])
    return len(realizations)


# pre-cursor taps before the first path and guard taps beyond the last one,
# so the acausal sinc tails stay inside the window (energy capture >= 99.9%)
_TAP_PRECURSOR = 128
_TAP_GUARD = 384


def generate_cir(
    table: ScenarioTable,
    spec: TrackSpec,
    bandwidth_hz: float,
    n_paths: int,
    out: io.TextIOBase,
    cir_window_s: float | None = None,
) -> int:
    """Write per-position path sets and tapped-delay-line blocks; returns the
    number of snapshot blocks."""
    if not bandwidth_hz > 0:
        raise UsageError("bandwidth must be > 0")
    if n_paths < 2:
        raise UsageError("need at least 2 paths")
    rx, tx = sample_track(spec)
    fieldset = CorrelatedFieldSet(table, seed=spec.seed)
    realizations = lsp_track(fieldset, table, rx, tx, spec.f_ghz, spec.tx_height_m)
    snapshots = []
    for i, r in enumerate(realizations):
        rng = np.random.default_rng([spec.seed, 2, i])
        ps, los_delay = synthesize_pathset(
            r, table, tx[i], rng, n_paths=n_paths, rx_height_m=RX_HEIGHT_M
        )
        snapshots.append((r, ps, los_delay))
    max_delay = max(float(ps.delays.max()) for _, ps, _ in snapshots)
    tap_offset_s = -_TAP_PRECURSOR / bandwidth_hz
    if cir_window_s is not None:
        window_taps = int(math.ceil(cir_window_s * bandwidth_hz))
        if window_taps < int(math.ceil(max_delay * bandwidth_hz)) + 1:
            raise UsageError(
                f"CIR window {cir_window_s} s does not cover the longest path "
                f"delay {max_delay:.3e} s"
            )
        n_taps = window_taps + _TAP_PRECURSOR
    else:
        n_taps = _TAP_PRECURSOR + int(math.ceil(max_delay * bandwidth_hz)) + _TAP_GUARD

    extra = [
        f"# bandwidth_hz: {_fmt(bandwidth_hz)}",
        f"# n_paths: {n_paths}",
        f"# n_taps: {n_taps}",
        f"# tap_spacing_s: {_fmt(1.0 / bandwidth_hz)}",
        f"# tap_offset_s: {_fmt(tap_offset_s)}",
        "# units: delay_s seconds; power linear (sum 1); angles degrees; xpr dB",
        "# tap lines: rx/tx polarization pair, then re/im per tap",
        "# path lines: delay_s power aod aoa eod eoa xpr_db",
    ]
    for line in _header_lines(table, spec, extra):
        out.write(line + "\n")
    for i, (r, ps, los_delay) in enumerate(snapshots):
        cir = to_cir(ps, bandwidth_hz, n_taps, tap_offset_s=tap_offset_s)
        out.write(f"snapshot {i}\n")
        out.write(f"rx_position {_fmt(r.position[0])} {_fmt(r.position[1])}\n")
        out.write(f"tx_position {_fmt(tx[i][0])} {_fmt(tx[i][1])}\n")
        out.write(f"d_2d {_fmt(r.d_2d)}\n")
        out.write(f"los_delay_s {_fmt(los_delay)}\n")
        cap = " ".join(_fmt(cir.captured_energy[a, b]) for a in (0, 1) for b in (0, 1))
        leak = " ".join(_fmt(cir.leaked_energy[a, b]) for a in (0, 1) for b in (0, 1))
        out.write(f"captured_energy {cap}\n")
        out.write(f"leaked_energy {leak}\n")
        out.write(f"paths {ps.n_paths}\n")
        for j in range(ps.n_paths):
            out.write(
                f"path {_fmt(ps.delays[j])} {_fmt(ps.powers[j])} "
                f"{_fmt(ps.aod[j])} {_fmt(ps.aoa[j])} {_fmt(ps.eod[j])} "
                f"{_fmt(ps.eoa[j])} {_fmt(ps.xpr_db[j])}\n"
            )
        for a, b, label in ((0, 0, "vv"), (0, 1, "vh"), (1, 0, "hv"), (1, 1, "hh")):
            parts = " ".join(
                f"{_fmt(t.real)} {_fmt(t.imag)}" for t in cir.taps[a, b]
            )
            out.write(f"taps {label} {parts}\n")
        out.write(f"end snapshot {i}\n")
    return len(snapshots)


def read_sample_csv(path: str) -> list[SampleRecord]:
    """Read a generate-lsp CSV back into SampleRecords."""
    with open(path, encoding="utf-8") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise UsageError(
            f"{path}: CSV schema mismatch, missing columns: {', '.join(sorted(missing))}"
        )
    records = []
    for lineno, row in enumerate(reader, start=2):
        try:
            values = {"PL": float(row["pl_db"])}
            for lsp, col in _COLUMN_BY_LSP.items():
                if row[col] != "":
                    values[lsp] = float(row[col])
            records.append(
                SampleRecord(
                    position=(float(row["position_x"]), float(row["position_y"])),
                    f_ghz=float(row["f_ghz"]),
                    d_2d=float(row["d_2d"]),
                    h_tx=float(row["h_tx"]),
                    condition=row["condition"],
                    values=values,
                )
            )
        except (ValueError, KeyError) as e:
            raise UsageError(f"{path}: bad CSV row {lineno}: {e}") from e
    if not records:
        raise UsageError(f"{path}: no data rows")
    return records


def fit_command(
    csv_paths: list[str],
    template: ScenarioTable,
    out: io.TextIOBase,
    report: io.TextIOBase,
) -> ScenarioTable:
    """Fit every LSP present in the template to the concatenated sample CSVs,
    estimate per-track decorrelation distances and the cross-correlation
    matrix, and emit a scenario-file fragment plus a text report."""
    tracks = [read_sample_csv(p) for p in csv_paths]
    records = [r for track in tracks for r in track]

    fitted = {}
    results = {}
    for lsp, desc in template.lsp.items():
        fixed = {var: desc.value(var) for var in desc.fixed if var != "lambda"}
        try:
            results[lsp] = fit_lsp_model(records, lsp, fixed=fixed)
        except ValueError as e:
            raise UsageError(f"fitting {lsp}: {e}") from e
        fitted[lsp] = results[lsp].descriptor

    report.write(f"# indoorchan {__version__} fit report\n")
    report.write(f"inputs: {', '.join(csv_paths)} ({len(records)} records)\n\n")
    decorr = {}
    for lsp in template.lsp:
        report.write(f"[{lsp}]\n")
        res = results[lsp]
        for var in VAR_NAMES:
            if var == "lambda":
                continue
            val = res.descriptor.value(var)
            if var in res.stderr:
                report.write(f"  {var:8s} = {val: .5f}  (stderr {res.stderr[var]:.5f})\n")
            else:
                report.write(f"  {var:8s} = {val: .5f}  (fixed)\n")
        lam_est = []
        for t, track in enumerate(tracks):
            try:
                est = estimate_decorrelation(track, lsp, mean_model=fitted[lsp])
            except ValueError as e:
                report.write(f"  lambda   track {t}: not estimable ({e})\n")
                continue
            report.write(
                f"  lambda   track {t}: {est.lambda_m:.2f} m [{est.flag}]\n"
            )
            if est.flag == "ok":
                lam_est.append(est.lambda_m)
        lam = float(np.mean(lam_est)) if lam_est else 0.0
        decorr[lsp] = lam
        report.write(f"  lambda   combined: {lam:.2f} m\n\n")

    stochastic = {k: v for k, v in fitted.items() if k != "PL"}
    xcorr = estimate_cross_corr(records, stochastic)
    report.write("cross-correlation (" + ", ".join(XCORR_ORDER) + "):\n")
    for i, a in enumerate(XCORR_ORDER):
        row = " ".join(
            "   n/a" if math.isnan(xcorr[i, j]) else f"{xcorr[i, j]: .3f}"
            for j in range(8)
        )
        report.write(f"  {a:4s} {row}\n")
    report.write("\nr_tau taken from the template scenario (not estimable from LSP records)\n")

    xcorr_clean = np.where(np.isnan(xcorr), 0.0, xcorr)
    np.fill_diagonal(xcorr_clean, 1.0)
    out_lsp = {}
    for lsp, res in results.items():
        lam = decorr.get(lsp, 0.0)
        d = res.descriptor
        out_lsp[lsp] = type(d)(
            mu=d.mu, sigma=d.sigma, lambda_m=lam, gamma=d.gamma, epsilon=d.epsilon,
            zeta=d.zeta, delta=d.delta, kappa=d.kappa, fixed=d.fixed,
        )
    table = ScenarioTable(
        name=f"{template.name}_fit",
        condition=template.condition,
        lsp=out_lsp,
        r_tau=template.r_tau,
        cross_corr=xcorr_clean,
    )
    out.write(save_scenario(table))
    return table


def resolve_scenario(name: str, condition: str) -> ScenarioTable:
    """A builtin scenario id, or a path to a scenario file."""
    if name in SCENARIO_NAMES:
        return builtin_scenario(name, condition)
    if os.path.exists(name):
        with open(name, encoding="utf-8") as fh:
            return load_scenario(fh.read(), condition=condition)
    raise UsageError(
        f"unknown scenario {name!r}: not a builtin ({', '.join(SCENARIO_NAMES)}) "
        "and no such file"
    )


def _parse_point(text: str):
    try:
        x, y = text.split(",")
        return (float(x), float(y))
    except ValueError:
        raise UsageError(f"expected a point 'x,y', got {text!r}") from None


def _build_trackspec(args) -> TrackSpec:
    return TrackSpec(
        waypoints=tuple(_parse_point(p) for p in args.track),
        sample_spacing_m=args.spacing,
        tx_position=_parse_point(args.tx_pos) if args.tx_pos else None,
        tx_track=tuple(_parse_point(p) for p in args.tx_track) if args.tx_track else None,
        tx_height_m=args.tx_height,
        f_ghz=args.freq_ghz,
        condition=args.condition,
        seed=args.seed,
    )


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--scenario", default="industrial_combined",
                   help="builtin scenario id or scenario file path")
    p.add_argument("--condition", choices=("LOS", "NLOS"), required=True,
                   help="propagation condition (never inferred)")
    p.add_argument("--freq-ghz", type=float, required=True)
    p.add_argument("--tx-height", type=float, required=True, help="TX height in m")
    p.add_argument("--tx-pos", help="fixed TX position 'x,y' in m")
    p.add_argument("--tx-track", nargs="+", help="TX waypoints 'x,y' for dual mobility")
    p.add_argument("--track", nargs="+", required=True, help="RX waypoints 'x,y' in m")
    p.add_argument("--spacing", type=float, default=1.0, help="sample spacing in m")
    p.add_argument("--seed", type=int, default=1, help="reproducibility seed")
    p.add_argument("--out", required=True, help="output file path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="indoorchan",
        description="industrial indoor channel model: simulation and fitting",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-lsp", help="sample large-scale parameters along a track")
    _add_common(p)

    p = sub.add_parser("generate-cir", help="synthesize channel impulse responses")
    _add_common(p)
    p.add_argument("--bandwidth-hz", type=float, required=True)
    p.add_argument("--paths", type=int, default=DEFAULT_N_PATHS)
    p.add_argument("--cir-window-s", type=float, default=None,
                   help="CIR window length; taps = ceil(window * bandwidth)")

    p = sub.add_parser("fit", help="fit scaling-law coefficients to sample CSVs")
    p.add_argument("--input", nargs="+", required=True,
                   help="generate-lsp CSV file(s); each file is one track")
    p.add_argument("--scenario", default="industrial_combined",
                   help="template providing the fixed-coefficient masks")
    p.add_argument("--condition", choices=("LOS", "NLOS"), required=True)
    p.add_argument("--out", required=True, help="fitted scenario file")
    p.add_argument("--report", default=None, help="fit report path (default: stdout)")

    p = sub.add_parser("validate", help="run the acceptance suite")
    p.add_argument("--seed", type=int, default=None,
                   help="override the fixed acceptance seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate-lsp":
            table = resolve_scenario(args.scenario, args.condition)
            spec = _build_trackspec(args)
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                n = generate_lsp(table, spec, fh)
            print(f"wrote {n} records to {args.out}")
            return 0
        if args.command == "generate-cir":
            table = resolve_scenario(args.scenario, args.condition)
            spec = _build_trackspec(args)
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                n = generate_cir(
                    table, spec, args.bandwidth_hz, args.paths, fh,
                    cir_window_s=args.cir_window_s,
                )
            print(f"wrote {n} snapshots to {args.out}")
            return 0
        if args.command == "fit":
            template = resolve_scenario(args.scenario, args.condition)
            report_fh = (
                open(args.report, "w", encoding="utf-8", newline="")
                if args.report else sys.stdout
            )
            try:
                with open(args.out, "w", encoding="utf-8", newline="") as fh:
                    fit_command(args.input, template, fh, report_fh)
            finally:
                if args.report:
                    report_fh.close()
            print(f"wrote fitted scenario to {args.out}")
            return 0
        if args.command == "validate":
            from .validation import DEFAULT_SEED, run_all

            seed = DEFAULT_SEED if args.seed is None else args.seed
            results = run_all(seed=seed)
            failures = 0
            for r in results:
                status = "PASS" if r.passed else "FAIL"
                print(f"{status}  {r.name}: measured {r.measured}, tolerance {r.tolerance}")
                if r.detail:
                    print(f"      {r.detail}")
                failures += 0 if r.passed else 1
            print(f"{len(results) - failures}/{len(results)} criteria passed")
            return 0 if failures == 0 else 1
    except (UsageError, ScenarioFormatError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
