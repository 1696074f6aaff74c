"""Command-line front end.

Subcommands: ``are-curve``, ``power``, ``size``, ``lan-check``, ``simulate``
and ``validate-generator``. Every command that writes ``--out PATH`` also
writes ``PATH.manifest.json`` with the tool version, resolved config, seed,
timestamps and SHA-256 digests of the result files.

Exit codes: 0 all checks pass, 1 tolerance/validation failure,
2 configuration or usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, mc
from .asymptotics import are_delta
from .config import ExperimentConfig, load_config, load_mapping, parse_generator
from .errors import ConfigError, GPPTestError
from .generators import validate_generator
from .special import psi

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


def fmt(x):
    """17 significant digits; integers stay integers."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return "%.17g" % float(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _now():
    return datetime.now(timezone.utc).isoformat()


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


class RunManifest:
    """Collects provenance for one run and writes it next to the outputs."""

    def __init__(self, command, config=None, seed=None):
        self.command = command
        self.config = config
        self.seed = seed
        self.started = _now()
        self.outputs = []
        self.extra = {}

    def add_output(self, path):
        self.outputs.append(str(path))

    def to_dict(self):
        return _jsonable({
            "tool": "gpptest",
            "version": __version__,
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "started": self.started,
            "finished": _now(),
            "outputs": [{"path": p, "sha256": sha256(p)} for p in self.outputs],
            **self.extra,
        })

    def write(self, out_path):
        path = Path(str(out_path) + ".manifest.json")
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path


# --- config handling ---------------------------------------------------------


def resolve_config(args, **overrides):
    if not args.config:
        raise UsageError("--config PATH is required")
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, replications=args.replications, n=args.n, **overrides)


def _config_block(cfg):
    return cfg.to_dict()


# --- commands ----------------------------------------------------------------


def cmd_are_curve(args):
    lo, hi, steps = args.delta_min, args.delta_max, args.steps
    if not (0.0 <= lo < hi) or steps < 2:
        raise UsageError("need 0 <= delta-min < delta-max and steps >= 2")
    out = _require_out(args)
    deltas = np.linspace(lo, hi, steps)
    write_csv(out, ["delta", "psi", "are"],
              ([d, psi(float(d)), are_delta(float(d))] for d in deltas))
    manifest = RunManifest("are-curve", {"delta_min": lo, "delta_max": hi, "steps": steps})
    manifest.add_output(out)
    manifest.write(out)
    return EXIT_OK


def _require_out(args):
    if not args.out:
        raise UsageError("--out PATH is required")
    return Path(args.out)


def _run_power(args, cfg, command):
    out = _require_out(args)
    rows = mc.power_curve(cfg, threads=args.threads)
    write_csv(out, ["xi", "test", "estimate", "ci_low", "ci_high", "prediction", "R_effective"],
              ([r.xi, r.test, r.estimate, r.ci_low, r.ci_high, r.asymptotic_prediction,
                r.R_effective] for r in rows))
    manifest = RunManifest(command, _config_block(cfg), cfg.seed)
    manifest.add_output(out)
    manifest.extra["summaries"] = [r.to_dict() for r in rows]
    manifest.extra["all_within_tolerance"] = all(r.within_tolerance for r in rows)
    manifest.write(out)
    for r in rows:
        status = "ok" if r.within_tolerance else ("ERROR " + r.error if r.error else "FAIL")
        print(f"xi={r.xi:g} {r.test}: {r.estimate:.4f} [{r.ci_low:.4f}, {r.ci_high:.4f}] "
              f"prediction {r.asymptotic_prediction:.4f} R_eff={r.R_effective} {status}")
    return EXIT_OK if manifest.extra["all_within_tolerance"] else EXIT_TOLERANCE


def cmd_power(args):
    return _run_power(args, resolve_config(args), "power")


def cmd_size(args):
    return _run_power(args, resolve_config(args, xi=0.0, xis=(0.0,)), "size")


def cmd_lan_check(args):
    cfg = resolve_config(args)
    res = mc.lan_empirical_check(cfg, threads=args.threads)
    report = res.to_dict()
    report["tolerances"] = {"relative": cfg.tolerances.lan_rel,
                            "absolute_mean": cfg.tolerances.lan_abs_mean}
    text = json.dumps(_jsonable(report), indent=2) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        manifest = RunManifest("lan-check", _config_block(cfg), cfg.seed)
        manifest.add_output(out)
        manifest.write(out)
    return EXIT_OK if res.within_tolerance else EXIT_TOLERANCE


def cmd_simulate(args):
    cfg = resolve_config(args)
    out = _require_out(args)
    setup = mc.Setup(cfg, cfg.xi)
    total = 0
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["replication", "tau", "y_index", "y_value"])
        for r in range(cfg.replications):
            sample = setup.draw(mc.replication_stream(cfg.seed, r))
            total += sample.tau
            for k, y in enumerate(sample.ys):
                writer.writerow([r, sample.tau, k, fmt(y)])
    manifest = RunManifest("simulate", _config_block(cfg), cfg.seed)
    manifest.add_output(out)
    manifest.extra.update({"threshold": setup.c, "theta": setup.theta, "total_exceedances": total})
    manifest.write(out)
    return EXIT_OK


def cmd_validate_generator(args):
    if not args.config:
        raise UsageError("--config PATH is required")
    data = load_mapping(args.config)
    block = data.get("generator")
    if not isinstance(block, dict):
        raise ConfigError("required section missing", "generator")
    gen = parse_generator(block)
    seed = args.seed if args.seed is not None else int(data.get("seed", 0))
    report = validate_generator(gen, seed=seed)
    payload = _jsonable({"generator": block, **report.to_dict()})
    status = "PASS" if report.ok else "FAIL"
    print(f"generator {block.get('variant')}: {status}")
    print(f"  mean check: {'ok' if report.mean_ok else 'violated'}"
          + (f" (max deviation {report.max_mean_deviation:.3g})"
             if report.max_mean_deviation is not None else ""))
    print(f"  bound violations: {report.bound_violations}")
    print(f"  A = E inf Z = {report.A:.6g}" + ("" if report.A_positive else "  (A = 0: no exceedances possible)"))
    for note in report.notes:
        print(f"  note: {note}")
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        manifest = RunManifest("validate-generator", {"generator": block}, seed)
        manifest.add_output(out)
        manifest.write(out)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.ok else EXIT_TOLERANCE


# --- parser ------------------------------------------------------------------


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _nonnegative_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gpptest", description="Tests for generalized Pareto processes: simulation and power studies.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="experiment config (YAML or JSON)")
    common.add_argument("--out", metavar="PATH", help="output file; a manifest is written to PATH.manifest.json")
    common.add_argument("--seed", type=_u64, help="override the master seed")
    common.add_argument("--threads", type=_positive_int, default=1, help="parallel workers (results do not depend on it)")
    common.add_argument("--replications", type=_positive_int, help="override the number of replications R")
    common.add_argument("--n", type=_nonnegative_int, help="override the sample size n")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("are-curve", parents=[common], help="ARE of the omnibus test versus the optimal test")
    p.add_argument("--delta-min", type=float, default=0.0)
    p.add_argument("--delta-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)
    p.set_defaults(func=cmd_are_curve)

    sub.add_parser("power", parents=[common], help="Monte Carlo power curve").set_defaults(func=cmd_power)
    sub.add_parser("size", parents=[common], help="power run at xi = 0").set_defaults(func=cmd_size)
    sub.add_parser("lan-check", parents=[common],
                   help="empirical log-likelihood ratio against its LAN limit").set_defaults(func=cmd_lan_check)
    sub.add_parser("simulate", parents=[common], help="export simulated exceedances").set_defaults(func=cmd_simulate)
    sub.add_parser("validate-generator", parents=[common],
                   help="check generator constraints").set_defaults(func=cmd_validate_generator)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gpptest {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GPPTestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
