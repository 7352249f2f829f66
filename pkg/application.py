import argparse
import logging
import sys
from pathlib import Path

from dotenv import load_dotenv

from risopt import harness
from risopt.errors import ConfigError
from risopt.optimizer import ALGORITHMS
from risopt.services.results import ResultWriter

# Load environment variables from .env file at startup
env_path = Path(__file__).parent / ".env"
if env_path.exists():
    load_dotenv(dotenv_path=env_path, override=True)

logger = logging.getLogger()


def configure_logging(level: str) -> None:
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    logger.handlers[:] = [console_handler]


def _sweep_value(text: str) -> float | str:
    text = text.strip()
    return "inf" if text.lower() == "inf" else float(text)


def _algorithms(text: str) -> list[str]:
    names = [name.strip() for name in text.split(",") if name.strip()]
    unknown = [name for name in names if name not in ALGORITHMS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s) {unknown}; choose from {list(ALGORITHMS)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", default="INFO", help="root log level (default: INFO)")

    scenario = argparse.ArgumentParser(add_help=False)
    scenario.add_argument("--config", required=True, help="TOML scenario file or bundled preset name")
    scenario.add_argument("--trials", type=int, help="override the number of trials")
    scenario.add_argument("--seed", type=int, help="override the master seed")
    scenario.add_argument("--algorithms", type=_algorithms, help="comma-separated algorithm list")
    scenario.add_argument("--out", help="result CSV path (default: <scenario>_results.csv)")
    scenario.add_argument("--gnuplot", help="also write a gnuplot data file of the summary")
    scenario.add_argument("--workers", type=int, help="concurrent trials (default: RIS_OPT_WORKERS or 4)")
    scenario.add_argument("--timing", action="store_true", help="record wall_ms (makes the CSV non-deterministic)")
    scenario.add_argument("--dump-config", action="store_true", help="print the fully defaulted config and exit")

    parser = argparse.ArgumentParser(prog="risopt", description="Joint precoder and multi-RIS phase optimization")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common, scenario], help="Monte Carlo run of one scenario")

    sweep = sub.add_parser("sweep", parents=[common, scenario], help="Monte Carlo run per sweep value")
    sweep.add_argument("--param", choices=["p_tx_dbm", "n_ris", "user_distance", "quant_bits", "n_panels"])
    sweep.add_argument("--values", help="comma-separated values, 'inf' allowed for quant_bits")

    check = sub.add_parser("check-gradients", parents=[common], help="finite-difference gradient check")
    check.add_argument("--instances", type=int, default=50)
    check.add_argument("--seed", type=int, default=0)

    audit = sub.add_parser("audit", parents=[common], help="property audit (bounds, descent, decay)")
    audit.add_argument("--config", help="scenario for the descent runs (default: i.i.d. Rayleigh instances)")
    audit.add_argument("--instances", type=int, default=20)
    audit.add_argument("--runs", type=int, default=100)
    audit.add_argument("--iterations", type=int, default=500)
    audit.add_argument("--seed", type=int, default=0)
    audit.add_argument("--dump-config", action="store_true", help="print the fully defaulted config and exit")

    summarize = sub.add_parser("summarize", parents=[common], help="mean / std / stderr per sweep value and algorithm")
    summarize.add_argument("--in", dest="inp", required=True, help="result CSV")
    summarize.add_argument("--out", help="summary CSV (default: stdout)")
    summarize.add_argument("--gnuplot", help="also write a gnuplot data file")
    return parser


def _scenario(args: argparse.Namespace):
    cfg = harness.load_config(args.config)
    updates = {}
    if getattr(args, "trials", None) is not None:
        updates["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        updates["master_seed"] = args.seed
    if getattr(args, "algorithms", None):
        updates["algorithms"] = args.algorithms
    if updates:
        cfg = harness.validate_config({**cfg.model_dump(), **updates})
    return cfg


def _write(args, cfg, rows, jobs) -> None:
    writer = ResultWriter()
    out = writer.resolve(args.out, cfg.name)
    success, result = writer.write_run(
        rows, out, cfg.model_dump(mode="json"), harness.job_seeds(jobs), {"timing": args.timing}
    )
    if not success:
        raise OSError(result)
    if args.gnuplot:
        writer.write_gnuplot(harness.summarize(harness.rows_frame(rows)), args.gnuplot)
    print(result)


def run_simulate(args) -> int:
    cfg = _scenario(args)
    if args.dump_config:
        print(harness.dump_config(cfg), end="")
        return 0
    jobs = harness.trial_jobs(cfg)
    rows = harness.run_jobs(jobs, args.workers, args.timing)
    _write(args, cfg, rows, jobs)
    return 0


def run_sweep(args) -> int:
    cfg = _scenario(args)
    if args.dump_config:
        print(harness.dump_config(cfg), end="")
        return 0
    parameter = args.param or (cfg.sweep.parameter if cfg.sweep else None)
    if args.values:
        values = [_sweep_value(v) for v in args.values.split(",")]
    else:
        values = list(cfg.sweep.values) if cfg.sweep else []
    if parameter is None or not values:
        raise ConfigError("sweep needs --param/--values or a [sweep] table in the config")
    jobs = harness.trial_jobs(cfg, parameter, values)
    rows = harness.run_jobs(jobs, args.workers, args.timing)
    _write(args, cfg, rows, jobs)
    return 0


def run_check_gradients(args) -> int:
    report = harness.check_gradients(args.instances, args.seed)
    for topology, error in report.max_relative_error.items():
        print(f"{topology}: max relative error {error:.3e}")
    print("PASS" if report.passed else f"FAIL (tolerance {report.tolerance:g})")
    return 0 if report.passed else 1


def run_audit(args) -> int:
    cfg = harness.load_config(args.config) if args.config else None
    if args.dump_config:
        print(harness.dump_config(cfg), end="")
        return 0
    report = harness.audit_properties(
        cfg, n_instances=args.instances, n_runs=args.runs, max_iterations=args.iterations, seed=args.seed
    )
    print("\n".join(report.lines()))
    return 0 if report.passed else 1


def run_summarize(args) -> int:
    summary = harness.summarize(args.inp)
    if args.out:
        summary.to_csv(args.out, index=False, lineterminator="\n")
    else:
        print(summary.to_csv(index=False, lineterminator="\n"), end="")
    if args.gnuplot:
        ResultWriter(Path(args.gnuplot).parent).write_gnuplot(summary, args.gnuplot)
    return 0


COMMANDS = {
    "simulate": run_simulate,
    "sweep": run_sweep,
    "check-gradients": run_check_gradients,
    "audit": run_audit,
    "summarize": run_summarize,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "audit" and args.dump_config and not args.config:
        parser.error("audit --dump-config needs --config")
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(f"Configuration error: {str(e)}")
        for path in getattr(e, "field_paths", []):
            logger.error(f"  at {path}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
