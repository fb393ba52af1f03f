"""Command-line entry point: run a probability sweep and write metrics CSV."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import yaml

from .errors import ConfigError
from .route import ENTRY_POLICIES
from .sim import DEFAULT_PROBABILITIES, SimConfig, run_experiment, write_csv, write_trace

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("clusterkeys")

# config-file key -> SimConfig field
_CONFIG_KEYS = {
    "nodes": "m",
    "clusters": "k",
    "area": "area_side",
    "probs": "probabilities",
    "range": "controller_range",
    "queries": "queries_per_trial",
    "trials": "trials",
    "seed": "seed",
    "entry_policy": "entry_policy",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _probabilities(text: str) -> tuple[float, ...]:
    try:
        probs = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not probs:
        raise argparse.ArgumentTypeError("empty probability list")
    bad = [p for p in probs if not 0.0 < p < 1.0]
    if bad:
        raise argparse.ArgumentTypeError(f"probabilities must lie strictly inside (0, 1): {bad}")
    return probs


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="clusterkeys",
        description="Simulate cluster-based pairwise key management and routing "
                    "in a wireless sensor network, sweeping the sharing probability.")
    parser.add_argument("--nodes", type=int, help="number of sensor nodes (default 4000)")
    parser.add_argument("--clusters", type=int, help="number of clusters k (default 4)")
    parser.add_argument("--area", type=float, help="side of the square deployment area (default 1000)")
    parser.add_argument("--probs", type=_probabilities,
                        help="comma-separated sharing probabilities in (0,1)")
    parser.add_argument("--range", type=float,
                        help="sub-controller communication range (default: area diagonal)")
    parser.add_argument("--queries", type=int, help="routed queries per trial (default 10000)")
    parser.add_argument("--trials", type=int, help="independent trials (default 10)")
    parser.add_argument("--seed", type=int, help="master seed (default 42)")
    parser.add_argument("--entry-policy", choices=ENTRY_POLICIES,
                        help="how inter-cluster messages enter the destination cluster")
    parser.add_argument("--out", type=Path, help="metrics CSV path (default metrics.csv)")
    parser.add_argument("--trace", type=Path, help="optional per-query trace CSV")
    parser.add_argument("--config", type=Path,
                        help="YAML or JSON file whose keys mirror the flags; flags win")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load_config_file(path: Path) -> dict:
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    data = {str(key).replace("-", "_"): value for key, value in data.items()}
    unknown = set(data) - set(_CONFIG_KEYS) - {"out", "trace"}
    if unknown:
        raise ConfigError(f"unknown keys in {path}: {', '.join(sorted(unknown))}")
    if isinstance(data.get("probs"), str):
        try:
            data["probs"] = _probabilities(data["probs"])
        except argparse.ArgumentTypeError as exc:
            raise ConfigError(str(exc))
    return data


def resolve_config(args: argparse.Namespace) -> tuple[SimConfig, Path, Path | None]:
    settings = _load_config_file(args.config) if args.config else {}
    for key in _CONFIG_KEYS:
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    for key in ("out", "trace"):
        if getattr(args, key) is not None:
            settings[key] = getattr(args, key)
    out = Path(settings.pop("out", "metrics.csv"))
    trace = settings.pop("trace", None)
    kwargs = {_CONFIG_KEYS[key]: value for key, value in settings.items()}
    kwargs.setdefault("probabilities", DEFAULT_PROBABILITIES)
    try:
        config = SimConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc))
    return config, out, Path(trace) if trace is not None else None


def format_summary(records, config: SimConfig) -> str:
    lines = [
        f"nodes={config.m} clusters={config.k} trials={config.trials} "
        f"queries/trial={config.queries_per_trial} seed={config.seed} "
        f"entry_policy={config.entry_policy}",
        "hop counts include node<->sub-controller and controller<->controller transmissions",
        f"{'prob':>12} {'s':>5} {'degree':>8} {'avg_hops':>9} {'intra':>8} "
        f"{'inter':>8} {'delivered':>9}",
    ]
    for r in records:
        lines.append(f"{r.probability:>12.10g} {r.s_nominal:>5d} {r.mean_realized_degree:>8.2f} "
                     f"{r.avg_hops:>9.3f} {r.intra_avg_hops:>8.3f} {r.inter_avg_hops:>8.3f} "
                     f"{r.delivery_rate:>9.4f}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config, out, trace = resolve_config(args)
    except (UsageError, ConfigError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    started = time.perf_counter()
    try:
        records, trials = run_experiment(config)
        write_csv(records, out)
        if trace is not None:
            write_trace(trials, trace)
    except OSError as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ConfigError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log.info("finished in %.1fs", time.perf_counter() - started)
    print(format_summary(records, config))
    print(f"wrote {out}" + (f" and {trace}" if trace else ""))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
