"""Command-line entry point for the RCCM toolkit."""

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from .. import __version__
from ..benchmark.metrics import evaluate_fit
from ..benchmark.runner import run_benchmark
from ..benchmark.simulate import simulate
from ..clustering import edge_presence_variability
from ..config import (
    BenchmarkConfig,
    FitOptions,
    FitterType,
    GapConfig,
    InitMethod,
    Method,
    SelectionMode,
    SimulationConfig,
    StarsConfig,
    TuningGrid,
    TuningParams,
    load_config,
)
from ..core.restarts import fit_with_restarts
from ..core.state import hard_assignments
from ..exceptions import ConfigurationError, IngestionError, InvalidTuningError, RCCMError
from ..selection.gap import gap_select
from ..selection.stars import stars_select
from ..storage import (
    FitArtifact,
    TruthDocument,
    build_manifest,
    read_json,
    read_panel,
    write_edge_list,
    write_json,
    write_matrix,
    write_subject_csvs,
)
from ..utils.logging import bind_run_context, clear_run_context, get_logger, setup_logging
from ..utils.metrics import MetricsCollector, get_metrics_collector, set_metrics_collector
from ..utils.parallel import set_default_threads

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_INGESTION = 4
EXIT_TUNING = 5
EXIT_NOT_CONVERGED = 6
EXIT_INFEASIBLE = 7

DEFAULT_LAMBDA1 = 0.05
DEFAULT_LAMBDA3 = 0.05

SCHEMA_MODELS = {
    "simulation_config": SimulationConfig,
    "tuning_grid": TuningGrid,
    "benchmark_config": BenchmarkConfig,
    "stars_config": StarsConfig,
    "gap_config": GapConfig,
    "fit_options": FitOptions,
}


def _tuning_from_args(args: argparse.Namespace, p: int, G: int) -> TuningParams:
    lambda2 = args.lambda2 if args.lambda2 is not None else 3.0 * p
    return TuningParams(lambda1=args.lambda1, lambda2=lambda2, lambda3=args.lambda3, G=G)


def _fit_options_from_args(args: argparse.Namespace) -> FitOptions:
    return FitOptions(
        epsilon=args.epsilon,
        max_em_iterations=args.max_iterations,
        init_method=InitMethod(args.init),
        seed=args.seed,
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    """Write simulated subject CSVs, truth.json and manifest.json."""
    config = load_config(args.config, SimulationConfig)
    if args.seed is not None:
        config = SimulationConfig.model_validate({**config.model_dump(), "seed": args.seed})
    out = Path(args.out)
    truth, panel = simulate(config)
    paths = write_subject_csvs(out, [s.data for s in panel.subjects], panel.roi_names)
    paths.append(write_json(out / "truth.json", TruthDocument.from_truth(truth, config)))
    write_json(out / "manifest.json", build_manifest(out, paths, "simulate", config.seed))
    logger.info(f"Wrote {panel.K} subjects and truth to {out}")
    print(out / "manifest.json")
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    """Fit the RCCM and write the artifact, edge lists and edge variability."""
    panel, files = read_panel(args.data_dir, standardize=not args.no_standardize)
    tp = _tuning_from_args(args, panel.p, args.groups)
    tp.check_panel(panel.p, panel.sample_sizes)
    opts = _fit_options_from_args(args)
    state = fit_with_restarts(panel, tp, opts)

    out = Path(args.out)
    artifact = FitArtifact.from_state(state, tp, opts, panel.roi_names, [f.name for f in files])
    write_json(out / "fit.json", artifact)
    for g, precision in enumerate(state.group_precisions):
        write_edge_list(out / "edges" / f"group_{g}.csv", precision)
    for k, precision in enumerate(state.subject_precisions):
        write_edge_list(out / "edges" / f"subject_{k}.csv", precision)
    variability = edge_presence_variability(state.subject_precisions, hard_assignments(state), tp.G)
    for g, matrix in enumerate(variability):
        write_matrix(out / f"edge_variability_group_{g}.csv", matrix, panel.roi_names)
    print(out / "fit.json")

    if not state.converged:
        logger.warning("Fit did not converge; artifact written with converged=false")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_stars(args: argparse.Namespace) -> int:
    """Run stability selection over a grid file and write the report."""
    panel, _ = read_panel(args.data_dir, standardize=not args.no_standardize)
    grid = load_config(args.grid, TuningGrid)
    cfg = StarsConfig(num_subsamples=args.subsamples, beta=args.beta, seed=args.seed)
    report = stars_select(panel, grid, cfg, FitterType(args.fitter), FitOptions(seed=args.seed))
    write_json(Path(args.out), report)
    print(args.out)
    if not report.any_feasible:
        logger.warning(f"No candidate reached instability <= {cfg.beta}; report written")
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_gap(args: argparse.Namespace) -> int:
    """Run the gap statistic and write the report."""
    panel, _ = read_panel(args.data_dir, standardize=not args.no_standardize)
    tp = _tuning_from_args(args, panel.p, 1)
    cfg = GapConfig(G_max=args.gmax, B=args.B, seed=args.seed)
    report = gap_select(panel, tp, cfg, FitOptions(seed=args.seed))
    write_json(Path(args.out), report)
    print(args.out)
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace) -> int:
    """Run the benchmark and write CSV and JSON tables."""
    config = load_config(args.config, BenchmarkConfig)
    overrides = {}
    if args.replicates is not None:
        overrides["replicates"] = args.replicates
    if args.methods:
        overrides["methods"] = [Method(m.strip()) for m in args.methods.split(",") if m.strip()]
    if args.selection is not None:
        overrides["selection"] = SelectionMode(args.selection)
    if overrides:
        config = BenchmarkConfig.model_validate({**config.model_dump(), **overrides})

    table = run_benchmark(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table.to_frame().to_csv(out / "benchmark.csv", index=False, float_format="%.17g", lineterminator="\n")
    write_json(out / "benchmark.json", table)
    print(out / "benchmark.csv")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Score a fit artifact against a simulation truth document."""
    artifact = read_json(args.fit, FitArtifact)
    truth = read_json(args.truth, TruthDocument).to_truth()
    state = artifact.to_state()
    result = evaluate_fit(
        truth.labels,
        truth.subject_networks,
        artifact.assignments,
        state.subject_precisions,
        truth.group_networks,
        state.group_precisions,
    )
    write_json(Path(args.out), result)
    print(args.out)
    return EXIT_OK


def cmd_schema(args: argparse.Namespace) -> int:
    """Write JSON Schema documents for the configuration files."""
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, model in SCHEMA_MODELS.items():
        path = out / f"{name}.schema.json"
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(model.model_json_schema(), handle, indent=2)
            handle.write("\n")
    print(out)
    return EXIT_OK


def _add_data_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("data_dir", help="Directory with subject_<k>.csv files")
    parser.add_argument("--no-standardize", action="store_true", help="Center columns without scaling")


def _add_lambda_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda1", type=float, default=DEFAULT_LAMBDA1, help="Subject-level penalty")
    parser.add_argument("--lambda2", type=float, default=None, help="Wishart degrees of freedom (default 3p)")
    parser.add_argument("--lambda3", type=float, default=DEFAULT_LAMBDA3, help="Cluster-level penalty")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per operation."""
    parser = argparse.ArgumentParser(prog="rccm", description="Random covariance clustering toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--threads", type=int, default=1, help="Worker threads for independent tasks")
    parser.add_argument(
        "--log-level", default=os.getenv("RCCM_LOG_LEVEL", "INFO"), help="Log level (DEBUG, INFO, WARNING, ERROR)"
    )
    parser.add_argument(
        "--log-format",
        default=os.getenv("RCCM_LOG_FORMAT", "console"),
        choices=["console", "json"],
        help="Log format",
    )
    parser.add_argument("--metrics-out", default=None, help="Write Prometheus metrics to this file")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate_parser = commands.add_parser("simulate", help="Simulate a panel with known clusters")
    simulate_parser.add_argument("config", help="SimulationConfig file (JSON or YAML)")
    simulate_parser.add_argument("--seed", type=int, default=None, help="Override the configured seed")
    simulate_parser.add_argument("--out", required=True, help="Output directory")
    simulate_parser.set_defaults(handler=cmd_simulate)

    fit_parser = commands.add_parser("fit", help="Fit the RCCM")
    _add_data_args(fit_parser)
    fit_parser.add_argument("--groups", "-G", type=int, required=True, help="Number of clusters")
    _add_lambda_args(fit_parser)
    fit_parser.add_argument("--epsilon", type=float, default=1e-3, help="Convergence threshold")
    fit_parser.add_argument("--max-iterations", type=int, default=200, help="Maximum EM iterations")
    fit_parser.add_argument("--init", choices=[m.value for m in InitMethod], default=InitMethod.WARD.value)
    fit_parser.add_argument("--seed", type=int, default=0, help="Seed")
    fit_parser.add_argument("--out", required=True, help="Output directory")
    fit_parser.set_defaults(handler=cmd_fit)

    stars_parser = commands.add_parser("stars", help="Select tuning parameters by stability")
    _add_data_args(stars_parser)
    stars_parser.add_argument("grid", help="TuningGrid file (JSON or YAML)")
    stars_parser.add_argument("--subsamples", type=int, default=20, help="Subsamples per subject")
    stars_parser.add_argument("--beta", type=float, default=0.05, help="Instability bound")
    stars_parser.add_argument("--fitter", choices=[f.value for f in FitterType], default=FitterType.RCCM.value)
    stars_parser.add_argument("--seed", type=int, default=0, help="Seed")
    stars_parser.add_argument("--out", required=True, help="Report file")
    stars_parser.set_defaults(handler=cmd_stars)

    gap_parser = commands.add_parser("gap", help="Select the number of clusters by the gap statistic")
    _add_data_args(gap_parser)
    gap_parser.add_argument("--gmax", type=int, default=4, help="Largest number of clusters")
    gap_parser.add_argument("--B", type=int, default=10, help="Reference datasets")
    _add_lambda_args(gap_parser)
    gap_parser.add_argument("--seed", type=int, default=0, help="Seed")
    gap_parser.add_argument("--out", required=True, help="Report file")
    gap_parser.set_defaults(handler=cmd_gap)

    benchmark_parser = commands.add_parser("benchmark", help="Run the simulation benchmark")
    benchmark_parser.add_argument("config", help="BenchmarkConfig file (JSON or YAML)")
    benchmark_parser.add_argument("--replicates", type=int, default=None, help="Override replicates")
    benchmark_parser.add_argument("--methods", default=None, help="Comma-separated methods to run")
    benchmark_parser.add_argument("--selection", choices=[s.value for s in SelectionMode], default=None)
    benchmark_parser.add_argument("--out", required=True, help="Output directory")
    benchmark_parser.set_defaults(handler=cmd_benchmark)

    evaluate_parser = commands.add_parser("evaluate", help="Score a fit against simulation truth")
    evaluate_parser.add_argument("fit", help="fit.json")
    evaluate_parser.add_argument("truth", help="truth.json")
    evaluate_parser.add_argument("--out", required=True, help="Result file")
    evaluate_parser.set_defaults(handler=cmd_evaluate)

    schema_parser = commands.add_parser("schema", help="Write JSON Schema documents")
    schema_parser.add_argument("--out", default="schemas", help="Output directory")
    schema_parser.set_defaults(handler=cmd_schema)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run the RCCM command-line interface."""
    load_dotenv()
    args = build_parser().parse_args(argv)
    setup_logging(level=args.log_level, format=args.log_format)
    set_default_threads(args.threads)
    bind_run_context(command=args.command, seed=getattr(args, "seed", None), threads=args.threads)
    collector = set_metrics_collector(MetricsCollector()) if args.metrics_out else None

    try:
        code = args.handler(args)
    except (ConfigurationError, ValidationError) as e:
        logger.error(f"Invalid configuration: {e}")
        code = EXIT_CONFIG
    except IngestionError as e:
        logger.error(f"Could not read input data: {e}")
        code = EXIT_INGESTION
    except InvalidTuningError as e:
        logger.error(
            f"Invalid tuning parameters: {e}. The model needs lambda2 > p - 1 and "
            "n_k + lambda2 - p - 1 > 0 for every subject"
        )
        code = EXIT_TUNING
    except RCCMError as e:
        logger.error(f"{type(e).__name__}: {e}")
        code = EXIT_UNEXPECTED
    except OSError as e:
        logger.error(f"I/O error: {e}")
        code = EXIT_UNEXPECTED
    finally:
        if args.metrics_out:
            get_metrics_collector().write(args.metrics_out)
            set_metrics_collector(collector)
        clear_run_context()
    return code


if __name__ == "__main__":
    sys.exit(main())
