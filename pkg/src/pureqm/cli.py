"""Command-line harness: ``pureqm <subcommand> [options]``.

Every subcommand takes the same option set (unused ones are ignored), reads
an optional JSON config with ``--config`` and lets flags override it. Output
is a JSON run report, or CSV for the tabular subcommands, written to
``--output``, to ``$PUREQM_OUTPUT_DIR/<subcommand>.<ext>``, or to stdout.

Exit codes: 0 success, 1 usage error, 2 invariant failure, 3 resource guard.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, checks, device, estimation, hilbert, measurement, typeclass
from .hilbert import ResourceLimitError

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_GUARD = 0, 1, 2, 3
OUTPUT_DIR_ENV = "PUREQM_OUTPUT_DIR"
SUBCOMMANDS = ("expand", "born", "estimate", "cascade", "test", "device", "cat", "dice", "selftest")
SELFTEST_SUITES = {
    "expand": ["typeclass"],
    "born": ["typeclass", "hilbert"],
    "estimate": ["estimation", "typeclass"],
    "cascade": ["measurement", "estimation"],
    "test": ["measurement", "estimation"],
    "device": ["device"],
    "cat": ["measurement", "hilbert"],
    "dice": ["measurement"],
    "selftest": list(checks.SUITES),
}

DEFAULTS = {
    "c0": [0.6, 0.0],
    "c1": None,
    "N": 100,
    "eps": [0.01, 0.05, 0.1],
    "L": 4,
    "throws": 3,
    "seed": None,
    "trials": 100,
    "level": 0.95,
    "c_prime": [[0.6, 0.0], [0.8, 0.0]],
    "c_dprime": [[0.8, 0.0], [0.6, 0.0]],
    "c0_hat": None,
    "c1_hat": None,
    "input": None,
    "output": None,
    "format": "json",
    "emit_trajectory": False,
    "verify": False,
    "selftest": False,
}


class UsageError(Exception):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _complex(value, field):
    """Accept 0.6, "0.6", "0.6,0.1" or [0.6, 0.1]."""
    try:
        if isinstance(value, str):
            parts = [float(x) for x in value.split(",")]
        elif isinstance(value, (int, float)):
            parts = [float(value)]
        else:
            parts = [float(x) for x in value]
    except (TypeError, ValueError):
        raise UsageError(field, f"cannot read {value!r} as a complex number") from None
    if len(parts) == 1:
        parts.append(0.0)
    if len(parts) != 2:
        raise UsageError(field, "expected re or re,im")
    return complex(parts[0], parts[1])


def _pair(c0, c1, field):
    c0 = _complex(c0, field)
    c1 = np.sqrt(max(0.0, 1.0 - abs(c0) ** 2)) + 0j if c1 is None else _complex(c1, field)
    if abs(abs(c0) ** 2 + abs(c1) ** 2 - 1.0) > hilbert.TOL:
        raise UsageError(field, f"|c0|^2 + |c1|^2 = {abs(c0) ** 2 + abs(c1) ** 2!r}, expected 1")
    return c0, c1


def _cplx_json(z):
    return [float(z.real), float(z.imag)]


def _int(cfg, field, lo=None, hi=None):
    try:
        v = int(cfg[field])
    except (TypeError, ValueError):
        raise UsageError(field, f"expected an integer, got {cfg[field]!r}") from None
    if lo is not None and v < lo:
        raise UsageError(field, f"must be >= {lo}")
    if hi is not None and v > hi:
        raise UsageError(field, f"must be <= {hi}")
    return v


def _seed(cfg):
    if cfg["seed"] is None:
        raise UsageError("seed", "a seed is required for subcommands that sample")
    return _int(cfg, "seed", lo=0)


def _eps_list(cfg):
    eps = cfg["eps"]
    eps = [eps] if isinstance(eps, (int, float, str)) else eps
    try:
        eps = [float(e) for e in eps]
    except (TypeError, ValueError):
        raise UsageError("eps", "expected a number or list of numbers") from None
    if any(e <= 0 for e in eps):
        raise UsageError("eps", "must be positive")
    return eps


# --- subcommands ---------------------------------------------------------------------


def cmd_expand(cfg):
    c0, c1 = _pair(cfg["c0"], cfg["c1"], "c0")
    N = _int(cfg, "N", lo=1)
    td = typeclass.symmetric_expand(c0, c1, N)
    rows = [{"m": m, "log_weight": lw, "weight_squared": w2} for m, lw, w2 in td.csv_rows()]
    tails = [
        {
            "eps": e,
            "log_tail_mass": typeclass.log_tail_mass(N, td.p, e),
            "log_chernoff_bound": typeclass.chernoff_log_bound(N, td.p, e),
        }
        for e in _eps_list(cfg)
    ]
    return {"N": N, "p": td.p, "rows": rows, "tail": tails}, rows


def cmd_born(cfg):
    c0, c1 = _pair(cfg["c0"], cfg["c1"], "c0")
    N = _int(cfg, "N", lo=1)
    p = abs(c0) ** 2
    dom = typeclass.dominant_type(N, p)
    born = hilbert.born_probability(hilbert.qubit("S", c0, c1), "S", 0)
    tails = [
        {
            "eps": e,
            "log_tail_mass": typeclass.log_tail_mass(N, p, e),
            "log_chernoff_bound": typeclass.chernoff_log_bound(N, p, e),
        }
        for e in _eps_list(cfg)
    ]
    res = {
        "N": N,
        "dominant_type": dom.m,
        "floor_Np": dom.floor_np,
        "tie": dom.tie,
        "dominant_fraction": dom.m / N,
        "born_probability": born,
        "difference": abs(dom.m / N - born),
        "tail": tails,
    }
    return res, None


def _read_bits_csv(path):
    bits = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            for cell in row:
                cell = cell.strip()
                if cell in ("0", "1"):
                    bits.append(int(cell))
                elif cell:
                    # tolerate a header row
                    continue
    return bits


def cmd_estimate(cfg):
    if cfg["input"]:
        path = Path(cfg["input"])
        if not path.exists():
            raise UsageError("input", f"{path} does not exist")
        if path.suffix == ".json":
            doc = json.loads(path.read_text())
            rec = estimation.CountRecord(int(doc["m0"]), int(doc.get("m1", doc.get("N", 0) - doc["m0"])))
        else:
            rec = estimation.CountRecord.from_bits(_read_bits_csv(path))
        est = estimation.estimate_coefficients(rec)
        return {"source": str(path), "m0": rec.m0, "N": rec.N, "estimate": _estimate_json(est)}, None
    c0, c1 = _pair(cfg["c0"], cfg["c1"], "c0")
    N = _int(cfg, "N", lo=1)
    trials = _int(cfg, "trials", lo=1)
    seed = _seed(cfg)
    p = abs(c0) ** 2
    per_trial = []
    for t in range(trials):
        world = typeclass.sample_world(N, p, seed + t)
        est = estimation.estimate_coefficients(estimation.CountRecord(world.m0, N - world.m0))
        per_trial.append({"trial": t, "seed": seed + t, "m0": world.m0, **_estimate_json(est)})
    p_hat = np.array([r["p_hat"] for r in per_trial])
    summary = {
        "p": p,
        "mean_c0_hat": float(np.mean([r["c0_hat"] for r in per_trial])),
        "rmse_p_hat": float(np.sqrt(np.mean((p_hat - p) ** 2))),
        "predicted_se": float(np.sqrt(p * (1 - p) / N)),
    }
    return {"N": N, "trials": trials, "summary": summary, "per_trial": per_trial}, per_trial


def _estimate_json(est):
    return {"c0_hat": est.c0_hat, "c1_hat": est.c1_hat, "p_hat": est.p_hat, "standard_error": est.standard_error}


def _cascade_spec(cfg):
    first = _pair(cfg["c0"], cfg["c1"], "c0")
    cp = cfg["c_prime"]
    cdp = cfg["c_dprime"]
    try:
        spec = measurement.CascadeSpec(first, _pair(cp[0], cp[1], "c_prime"), _pair(cdp[0], cdp[1], "c_dprime"))
    except (TypeError, IndexError):
        raise UsageError("c_prime", "expected two complex numbers per second-stage pair") from None
    return spec


def cmd_cascade(cfg):
    spec = _cascade_spec(cfg)
    N = _int(cfg, "N", lo=1)
    pipe = measurement.cascade_evolve(spec)
    probs = measurement.branch_probabilities(spec)
    expected = estimation.CascadeCounts(*[N * p for p in probs])
    est = estimation.cascade_estimates(expected)
    truth = [abs(c) ** 2 for c in spec.first + spec.after0 + spec.after1]
    got = list(est.as_dict().values())
    eq = measurement.intermediate_readout_equivalence(spec, N)
    res = {
        "N": N,
        "final_state": pipe.final.to_json(),
        "branch_probabilities": dict(zip(["m00", "m01", "m10", "m11"], probs)),
        "round_trip": {
            "estimates": est.as_dict(),
            "max_error": max(abs(a - b) for a, b in zip(got, truth) if a is not None),
        },
        "intermediate_readout": {
            "expected_m00": eq.expected_m00,
            "expected_m01": eq.expected_m01,
            "M0": eq.M0,
            "expected_m0_given_0": eq.expected_m0_given_0,
            "expected_m1_given_0": eq.expected_m1_given_0,
            "discrepancy": [eq.discrepancy_0, eq.discrepancy_1],
        },
        "reversal_error": pipe.reversal_error(),
    }
    return res, None


def cmd_test(cfg):
    c0, c1 = _pair(cfg["c0"], cfg["c1"], "c0")
    h0 = cfg["c0_hat"] if cfg["c0_hat"] is not None else cfg["c0"]
    h1 = cfg["c1_hat"] if cfg["c0_hat"] is not None else cfg["c1"]
    c0h, c1h = _pair(h0, h1, "c0_hat")
    N = _int(cfg, "N", lo=1)
    level = float(cfg["level"])
    if not 0 < level < 1:
        raise UsageError("level", "must lie in (0, 1)")
    seed = _seed(cfg)
    flag = measurement.test_protocol(hilbert.qubit("S", c0h, c1h), hilbert.qubit("S", c0, c1))
    # draw the number of 0-flags over N repetitions from the type weights
    zeros = int(typeclass.sample_types(N, min(1.0, max(0.0, 1.0 - flag)), 1, seed)[0])
    failures = N - zeros
    return {
        "flag_probability": flag,
        "N": N,
        "failures": failures,
        "level": level,
        "upper_bound": estimation.test_confidence(failures, N, level),
    }, None


def cmd_device(cfg):
    L = _int(cfg, "L", lo=2)
    if L % 2:
        raise UsageError("L", "must be even")
    res = {"L": L, "cycle_length": device.cycle_length(L)}
    rows = None
    if cfg["emit_trajectory"] or cfg["verify"] or L <= device.MAX_TRAJECTORY_L:
        traj = device.run_cycle(L)
        res["steps"] = traj.steps
        res["stable_steps"] = len(traj.absorbed) - 1
        if cfg["verify"]:
            res["verify"] = device.verify_cycle(traj)
        if cfg["emit_trajectory"]:
            rows = [
                {"step": i, "config": str(c), "total_spin": device.total_spin(c), "label": device.coarse_grain(c)}
                for i, c in enumerate(traj.configs)
            ]
            res["trajectory"] = rows
    return res, rows


def cmd_cat(cfg):
    cat = measurement.cat_scenario()
    return {
        "final_state": cat.final.to_json(),
        "relative_state_alive": cat.given_alive.to_json(),
        "relative_state_omega": cat.given_omega.to_json(),
        "born_probability_alive": hilbert.born_probability(cat.final, "C'", measurement.MEMO_ALIVE),
        "reversal_error": cat.pipeline.reversal_error(),
    }, None


def cmd_dice(cfg):
    throws = _int(cfg, "throws", lo=0)
    if throws > measurement.MAX_THROWS:
        raise ResourceLimitError(f"throws={throws} exceeds the guard of {measurement.MAX_THROWS}")
    rec = measurement.dice_scenario(throws)
    return {
        "throws": throws,
        "branch_count": rec.branch_count,
        "expected_branch_count": 6**throws,
        "amplitude": rec.expected_amplitude,
        "max_amplitude_error": rec.max_amplitude_error,
        "unused_level_weight": rec.unused_level_weight,
        "reversal_error": rec.pipeline.reversal_error(),
    }, None


def cmd_selftest(cfg):
    return {}, None


COMMANDS = {
    "expand": cmd_expand,
    "born": cmd_born,
    "estimate": cmd_estimate,
    "cascade": cmd_cascade,
    "test": cmd_test,
    "device": cmd_device,
    "cat": cmd_cat,
    "dice": cmd_dice,
    "selftest": cmd_selftest,
}


def run_selftest(command):
    results = {}
    for suite in SELFTEST_SUITES[command]:
        results[suite] = checks.SUITES[suite]()
    passed = all(all(r.values()) for r in results.values())
    return results, passed


def run(command: str, config: dict) -> dict:
    """Execute one subcommand and return the run report (without writing it)."""
    cfg = dict(DEFAULTS)
    unknown = set(config) - set(DEFAULTS)
    if unknown:
        raise UsageError(sorted(unknown)[0], "unknown parameter")
    cfg.update(config)
    t0 = time.perf_counter()
    if cfg["selftest"] or command == "selftest":
        results, passed = run_selftest(command)
        payload = {"selftest": results, "passed": passed}
        rows = None
    else:
        payload, rows = COMMANDS[command](cfg)
    return {
        "command": command,
        "config": {k: cfg[k] for k in sorted(config)},
        "results": payload,
        "wall_time": time.perf_counter() - t0,
        "version": __version__,
        "_rows": rows,
    }


def payload_bytes(report: dict) -> bytes:
    """Canonical encoding of the deterministic part of a report."""
    return json.dumps(report["results"], sort_keys=True, allow_nan=True).encode()


def _csv_text(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: format(v, ".17g") if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def render(report: dict, fmt: str) -> str:
    if fmt == "csv":
        rows = report.get("_rows")
        if not rows:
            raise UsageError("format", f"{report['command']} has no tabular output; use json")
        return _csv_text(rows)
    out = {k: v for k, v in report.items() if k != "_rows"}
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def build_parser():
    parser = _Parser(prog="pureqm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file of parameters; flags override it")
        p.add_argument("--c0", help="first coefficient, re or re,im")
        p.add_argument("--c1", help="second coefficient (default sqrt(1-|c0|^2))")
        p.add_argument("--c0-hat", dest="c0_hat", help="estimate under test (test subcommand)")
        p.add_argument("--c1-hat", dest="c1_hat")
        p.add_argument("--c-prime", dest="c_prime", nargs=2, metavar="C", help="second stage after A=0")
        p.add_argument("--c-dprime", dest="c_dprime", nargs=2, metavar="C", help="second stage after A=1")
        p.add_argument("--N", type=int)
        p.add_argument("--eps", type=float, nargs="+")
        p.add_argument("--L", type=int)
        p.add_argument("--throws", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--level", type=float)
        p.add_argument("--input", help="CSV of outcome bits or CountRecord JSON (estimate)")
        p.add_argument("--output", help="output file path")
        p.add_argument("--format", choices=["json", "csv"])
        p.add_argument("--emit-trajectory", dest="emit_trajectory", action="store_true", default=None)
        p.add_argument("--verify", action="store_true", default=None)
        p.add_argument("--selftest", action="store_true", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = {}
    try:
        if args.config:
            try:
                doc = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError("config", str(exc)) from None
            config.update(doc.get("parameters", doc))
        for key in DEFAULTS:
            value = getattr(args, key, None)
            if value is not None:
                config[key] = value
        report = run(args.command, config)
        text = render(report, config.get("format", "json"))
    except UsageError as exc:
        print(f"pureqm {args.command}: usage error in {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"pureqm {args.command}: resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        print(f"pureqm {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out = config.get("output")
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        ext = "csv" if config.get("format") == "csv" else "json"
        out = Path(os.environ[OUTPUT_DIR_ENV]) / f"{args.command}.{ext}"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)

    selftest = report["results"].get("passed")
    if selftest is False:
        return EXIT_INVARIANT
    verify = report["results"].get("verify")
    if verify is not None and not all(verify.values()):
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
