"""``ecp`` command line: run protocols, sweep parameters, tabulate phases.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from .analysis import (
    REPORTED_COUPLING,
    REPORTED_DETUNED,
    SWEEP_COLUMNS,
    SweepResult,
    mismatch_fidelity_analytic,
    monte_carlo_protocol,
    sweep,
)
from .config import FIELDS, ConfigError, ExperimentConfig, Raw, build_config, canonical_key, read_config_file
from .faraday import CavityParams, LossyGateError, SingularParametersError, phase_pair, reflection_coupled, reflection_empty
from .protocols import ProtocolResult, run_protocol, success_probability_analytic

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _num(x: Any) -> Any:
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _dumps(obj: dict) -> str:
    # float repr is the shortest string that round-trips bit-exactly
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _phases_of(cfg: ExperimentConfig):
    return phase_pair(cfg.cavity) if cfg.cavity is not None else cfg.phases


def _phase_json(ph) -> dict:
    return {"phi": ph.phi, "phi0": ph.phi0, "abs_r_coupled": ph.modCoupled, "abs_r_empty": ph.modEmpty}


def _run_payload(cfg: ExperimentConfig, result: ProtocolResult) -> dict:
    payload: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "command": "run",
        "protocol": result.protocol,
        "N": result.N,
        "pairs": {k: result.metadata[k] for k in ("a1", "b1", "a2", "b2")},
        "phases": _phase_json(result.phases),
        "gate_order": list(result.gate_order),
        "measured": list(result.measured),
        "remote": list(result.remote),
        "success_probability": result.success_probability,
        "success_probability_analytic": (
            success_probability_analytic(cfg.pair1.a) if cfg.pair1.a == cfg.pair2.a else None
        ),
        "success_outcomes": sorted(result.success_outcomes),
        "branches": [
            {
                "outcome": r.label,
                "probability": r.probability,
                "success": r.success,
                "concurrence": _num(r.concurrence),
                "target": r.target,
                "correction": r.correction,
                "fidelity": r.fidelity,
                "amplitudes": {k: [v.real, v.imag] for k, v in comps.items()},
            }
            for r, (_, comps) in zip(result.reports, result.amplitude_table())
        ],
    }
    if cfg.trials is not None:
        mc = monte_carlo_protocol(cfg.protocol, cfg.pair1, cfg.pair2, cfg.trials, cfg.seed, result.phases, cfg.N)
        payload["monte_carlo"] = {
            "trials": mc.trials,
            "seed": mc.seed,
            "histogram": mc.histogram,
            "successes": mc.successes,
            "success_rate": mc.success_rate,
            "standard_error": mc.standard_error,
        }
    return payload


def _run_text(payload: dict) -> str:
    lines = [
        f"protocol {payload['protocol']} (N={payload['N']})",
        f"phi = {payload['phases']['phi']:.6f}, phi0 = {payload['phases']['phi0']:.6f}",
        f"success probability = {payload['success_probability']:.10f}",
    ]
    for b in payload["branches"]:
        tag = "success" if b["success"] else "failure"
        lines.append(f"  {b['outcome']:<36} p={b['probability']:.6f} {tag:<7} F={b['fidelity']:.6f} fix={b['correction']}")
    if "monte_carlo" in payload:
        mc = payload["monte_carlo"]
        lines.append(f"monte carlo: {mc['successes']}/{mc['trials']} = {mc['success_rate']:.5f} +/- {mc['standard_error']:.5f}")
    return "\n".join(lines) + "\n"


def cmd_run(cfg: ExperimentConfig) -> tuple[str, str]:
    result = run_protocol(
        cfg.protocol,
        cfg.pair1,
        cfg.pair2,
        _phases_of(cfg),
        N=cfg.N,
        loss_mode=cfg.loss_mode,
        acknowledge_loss=cfg.acknowledge_loss,
    )
    payload = _run_payload(cfg, result)
    summary = f"{result.protocol}: success probability {result.success_probability:.10f}\n"
    if cfg.format == "json":
        return _dumps(payload), summary
    if cfg.format == "csv":
        header = ("outcome", "probability", "success", "concurrence", "target", "correction", "fidelity")
        rows = [[b[h] for h in header] for b in payload["branches"]]
        return _csv(header, rows), summary
    return _run_text(payload), summary


def _sweep_payload(res: SweepResult) -> dict:
    cols = dict(zip(SWEEP_COLUMNS, zip(*res.rows()))) if len(res) else {c: () for c in SWEEP_COLUMNS}
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "axis": res.axis,
        "protocol": res.protocol,
        "metadata": res.metadata,
        "columns": list(SWEEP_COLUMNS),
        "data": {k: list(v) for k, v in cols.items()},
    }


def cmd_sweep(cfg: ExperimentConfig) -> tuple[str, str]:
    if cfg.axis is None:
        raise ConfigError([])
    start = cfg.sweep_from if cfg.sweep_from is not None else {"a1": 0.05, "k": -0.1}.get(cfg.axis, 0.0)
    stop = cfg.sweep_to if cfg.sweep_to is not None else {"a1": 0.95, "k": 0.1, "detuning": 0.1, "coupling": 0.6}[cfg.axis]
    values = np.linspace(start, stop, cfg.points)
    res = sweep(
        cfg.axis,
        values,
        cfg.protocol,
        a1=cfg.pair1.a,
        k=cfg.k,
        N=cfg.N,
        phases=_phases_of(cfg),
        signs=cfg.signs or (1, -1),
        anchor=cfg.anchors[0],
        g=cfg.g,
    )
    best = int(np.argmax(res.p_simulated))
    summary = (
        f"sweep {cfg.axis} over {len(res)} rows; max P_simulated = {res.p_simulated[best]:.6f} "
        f"at {cfg.axis} = {res.axis_values[best]:.6f}; max |F diff| = {res.f_abs_diff.max():.3g}\n"
    )
    if cfg.format == "json":
        return _dumps(_sweep_payload(res)), summary
    if cfg.format == "csv":
        return _csv(SWEEP_COLUMNS, res.rows()), summary
    lines = ["  ".join(f"{c:>12}" for c in SWEEP_COLUMNS)]
    for row in res.rows():
        lines.append("  ".join(f"{v:>12.6f}" if isinstance(v, float) else f"{v:>12}" for v in row))
    return "\n".join(lines) + "\n", summary


PHASE_COLUMNS = (
    "convention",
    "detuning",
    "g",
    "phi",
    "phi0",
    "abs_r_coupled",
    "abs_r_empty",
    "F_analytic",
    "reported_phi",
    "reported_phi0",
    "reported_F",
)


def phase_rows(cfg: ExperimentConfig) -> list[tuple]:
    rows = []
    reported = {}
    if math.isclose(cfg.detuning, REPORTED_DETUNED["detuning"]) and math.isclose(cfg.g, 0.5):
        reported = REPORTED_DETUNED
    elif cfg.detuning == 0 and math.isclose(cfg.g, REPORTED_COUPLING["g"]):
        reported = REPORTED_COUPLING
    for anchor in cfg.anchors:
        for sign in cfg.signs or (1,):
            params = CavityParams.detuned(cfg.detuning, sign, anchor, g=cfg.g, gamma=cfg.gamma)
            ph = phase_pair(params)
            rows.append(
                (
                    f"{'+' if sign > 0 else '-'}/{anchor}",
                    cfg.detuning,
                    cfg.g,
                    ph.phi,
                    ph.phi0,
                    abs(reflection_coupled(params)),
                    abs(reflection_empty(params)),
                    mismatch_fidelity_analytic(ph.phi, ph.phi0),
                    reported.get("phi"),
                    reported.get("phi0"),
                    reported.get("F"),
                )
            )
    return rows


def cmd_phases(cfg: ExperimentConfig) -> tuple[str, str]:
    rows = phase_rows(cfg)
    summary = f"{len(rows)} convention(s) at detuning {cfg.detuning:g}, g {cfg.g:g}\n"
    if cfg.format == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "phases",
            "rows": [dict(zip(PHASE_COLUMNS, r)) for r in rows],
        }
        return _dumps(payload), summary
    if cfg.format == "csv":
        return _csv(PHASE_COLUMNS, [["" if v is None else v for v in r] for r in rows]), summary
    fmt = lambda v: "-" if v is None else (f"{v:.6f}" if isinstance(v, float) else str(v))  # noqa: E731
    lines = ["  ".join(f"{c:>13}" for c in PHASE_COLUMNS)]
    lines += ["  ".join(f"{fmt(v):>13}" for v in r) for r in rows]
    return "\n".join(lines) + "\n", summary


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "phases": cmd_phases}


def _add_field_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value configuration file")
    for key, (parse, help_text) in FIELDS.items():
        flag = "--" + key.replace("_", "-")
        if parse.__name__ == "_bool":
            parser.add_argument(flag, dest=key, action="store_const", const="true", default=None, help=help_text)
        else:
            parser.add_argument(flag, dest=key, default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run one protocol and report every branch"),
        ("sweep", "sweep one parameter axis"),
        ("phases", "tabulate scattering phases per detuning convention"),
        ("validate", "check a configuration without simulating"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_field_flags(p)
        if name == "phases":
            p.add_argument(
                "--both-conventions", action="store_true", help="report both signs of omegaC - omega0"
            )
    return parser


def _collect(args: argparse.Namespace) -> Raw:
    raw: Raw = read_config_file(args.config) if args.config else {}
    for key in FIELDS:
        value = getattr(args, key, None)
        if value is not None:
            raw[canonical_key(key)] = (str(value), f"--{key.replace('_', '-')}")
    if getattr(args, "both_conventions", False):
        raw["detuning_sign"] = ("both", "--both-conventions")
    return raw


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = _collect(args)
        cfg = build_config(raw)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.command == "validate":
        print("configuration valid")
        return EXIT_OK
    if args.command == "sweep" and cfg.axis is None:
        print("error: axis: sweep needs --axis", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        artifact, summary = COMMANDS[args.command](cfg)
    except (SingularParametersError, FloatingPointError, ZeroDivisionError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, LossyGateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if cfg.output is None:
        sys.stdout.write(artifact)
        return EXIT_OK
    try:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(artifact)
    except OSError as exc:
        print(f"error: cannot write {cfg.output}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    sys.stdout.write(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
