"""This module provides the command line interface of fauio.

    fauio validate CONFIG
    fauio synth CONFIG [--theorem {1,2}] [--epsilon E] [--delta D] [--beta B] [--grid]
    fauio simulate CONFIG [--gains FILE] [--preset NAME | --scenario FILE]
    fauio report [DIRECTORY]

Exit status is 0 on success, 1 when an assumption fails or the design is
infeasible, and 2 for input errors.
"""
import argparse
import csv
import datetime
import glob
import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional

import numpy as np
import yaml
from markdown import Markdown

import fauio
from fauio import utils
from fauio.core import sim
from fauio.core.base import ConditionReport
from fauio.core.config import Config, load_config
from fauio.core.errors import (
    ConfigError,
    DimensionError,
    DivergenceError,
    FauioError,
    NoFeasiblePairError,
    SynthesisError,
    VertexCapError,
)
from fauio.core.lmi import SynthesisProblem
from fauio.core.model import (
    augment_descriptor,
    check_existence_conditions,
    validate_assumptions,
)
from fauio.core.plot import plot_trajectory
from fauio.core.polytope import enumerate_vertices, verify_decomposition
from fauio.core.renderer import renderer
from fauio.core.scenario import (
    REFERENCE_TABLES,
    ScenarioConfig,
    get_scenario,
    parse_scenario,
)
from fauio.core.sdp import (
    SdpSolution,
    scalar_search,
    solve_problem,
    verify_certificate,
)
from fauio.core.synth import (
    ObserverGains,
    certify_design,
    compute_L1_F,
    recover_gains,
    young_gap,
)

logger = logging.getLogger("fauio")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2

OUTPUT_DIR = "fauio-output"
MANIFEST = "manifest.json"
VALIDATION = "validation.json"
SYNTHESIS = "synthesis.json"
GAINS = "gains.txt"
SOLUTION = "solution.txt"
CERTIFICATE = "certificate.csv"
GRID = "grid.csv"
REPORT = "report.md"

CSV_HELP = """\
trajectory CSV columns, one row per step:
  t, x1..xn, zeta_hat1..zeta_hat(n+a2), fa1..fa(a1), fa_hat1..fa_hat(a1),
  fs1..fs(a2), fs_hat1..fs_hat(a2), y_tilde1..y_tilde(p), e1..e(n+a2+a1)
Leading '#' lines carry the run manifest hash.

The FAUIO_OUTPUT_DIR environment variable sets the default output directory.
"""

converter = Markdown(extensions=["tables"])


def get_html(markdown: str) -> str:
    """Returns HTML converted from Markdown text."""
    return converter.reset().convert(markdown)


class UsageError(FauioError):
    """Raised for inconsistent command line flags."""


def _now() -> str:
    now = datetime.datetime.now(datetime.timezone.utc)
    return now.isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """RunManifest class ties every output of a command to its inputs.

    The digest covers everything but the paths and timestamps, so identical
    inputs give identical output files.

    Args:
        config_path: Configuration file.
        command: Subcommand name.
        parameters: Resolved parameters of the command.
        version: Version of fauio.
        config_digest: SHA-256 of the configuration text.
        started: Start time (UTC).
        finished: End time (UTC).

    Examples:
        >>> a = RunManifest('a.yml', 'synth', {'epsilon': 0.1}, config_digest='x')
        >>> b = RunManifest('b.yml', 'synth', {'epsilon': 0.1}, config_digest='x')
        >>> a.digest == b.digest
        True
        >>> a.header()[1] == f'manifest {a.digest}'
        True
    """

    config_path: str
    command: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    version: str = fauio.__version__
    config_digest: str = ""
    started: str = field(default_factory=_now)
    finished: str = ""

    @property
    def digest(self) -> str:
        data = {
            "command": self.command,
            "parameters": self.parameters,
            "version": self.version,
            "config": self.config_digest,
        }
        return utils.sha256_of_object(data)

    def header(self) -> List[str]:
        return [
            f"fauio {self.version} {self.command}",
            f"manifest {self.digest}",
            f"config {self.config_digest}",
        ]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["digest"] = self.digest
        return data

    def write(self, directory: str) -> str:
        """Appends the manifest to the run list of `directory`."""
        self.finished = _now()
        path = os.path.join(directory, MANIFEST)
        runs = read_manifest(directory) if os.path.exists(path) else []
        runs.append(self.to_dict())
        _write_json(path, {"runs": runs})
        return path


def read_manifest(directory: str) -> List[Dict[str, Any]]:
    with open(os.path.join(directory, MANIFEST), encoding="utf-8") as file:
        return json.load(file).get("runs", [])


def _write_json(path: str, data: Any):
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        json.dump(data, file, indent=2, sort_keys=True)
        file.write("\n")


def _read_json(path: str) -> Any:
    with open(path, encoding="utf-8") as file:
        return json.load(file)


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        file.write(text)
    logger.info(f"[fauio] Written: {path}")


def output_directory(value: Optional[str] = None) -> str:
    """Returns the output directory, creating it if needed.

    An explicit value wins over `FAUIO_OUTPUT_DIR`, which wins over the
    default `fauio-output`.
    """
    directory = value or os.environ.get("FAUIO_OUTPUT_DIR") or OUTPUT_DIR
    os.makedirs(directory, exist_ok=True)
    return directory


def run_validation(config: Config) -> ConditionReport:
    """Returns the merged assumption, existence and decomposition report."""
    plant = config.plant
    report = validate_assumptions(plant)
    desc = augment_descriptor(plant)
    try:
        L1, _ = compute_L1_F(desc)
    except SynthesisError as e:
        report.add("L1 T + F C_bar = I", False, description=str(e))
    else:
        report = report.merge(check_existence_conditions(desc, L1))
    if plant.m and plant.nonlinearity is not None:
        sampling = config.sampling
        decomposition = verify_decomposition(
            plant.nonlinearity,
            plant.H,
            plant.lipschitz_bounds,
            sampling.samples,
            sampling,
        )
        report = report.merge(decomposition)
    elif plant.m:
        report.add("secant bounds", False, description="plant has no nonlinearity")
    report.name = "validation"
    return report


def cmd_validate(config: Config, directory: str) -> int:
    """Checks the standing assumptions and the existence conditions."""
    manifest = RunManifest(config.path, "validate", config_digest=config.digest)
    report = run_validation(config)
    data = report.to_dict()
    data["digest"] = manifest.digest
    _write_json(os.path.join(directory, VALIDATION), data)
    manifest.write(directory)
    print(renderer.render_checks(report))
    if not report:
        logger.error(f"[fauio] Validation failed: {', '.join(report.failures)}")
        return EXIT_FAILURE
    return EXIT_OK


def _write_checks(path: str, report: ConditionReport, header: List[str]):
    with open(path, "w", encoding="utf-8", newline="") as file:
        for line in header:
            file.write(f"# {line}\n")
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(["name", "passed", "value", "description"])
        for check in report:
            value = utils.format_number(float(check.value))
            writer.writerow([check.name, int(bool(check)), value, check.description])


def _write_grid(path: str, table: List[Dict[str, Any]], header: List[str]):
    with open(path, "w", encoding="utf-8", newline="") as file:
        for line in header:
            file.write(f"# {line}\n")
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(["epsilon", "delta", "status", "mu", "sqrt_mu"])
        for row in table:
            delta = "" if row["delta"] is None else utils.format_number(row["delta"])
            writer.writerow(
                [
                    utils.format_number(row["epsilon"]),
                    delta,
                    row["status"],
                    utils.format_number(float(row["mu"])),
                    utils.format_number(float(row["sqrt_mu"])),
                ]
            )


def cmd_synth(
    config: Config,
    directory: str,
    theorem: Optional[int] = None,
    epsilon: Optional[float] = None,
    delta: Optional[float] = None,
    beta: Optional[float] = None,
    grid: bool = False,
) -> int:
    """Solves the vertex LMI family and writes gains and certificate."""
    overrides = {"theorem": theorem, "epsilon": epsilon, "delta": delta, "beta": beta}
    overrides = {key: value for key, value in overrides.items() if value is not None}
    settings = replace(config.synthesis, **overrides)
    if settings.theorem == 2 and settings.delta is None:
        raise UsageError("theorem 2 needs --delta or synthesis.delta")
    if grid and not settings.has_grid:
        raise UsageError("--grid needs synthesis.grid in the config")
    report = run_validation(config)
    if not report:
        logger.error(f"[fauio] Validation failed: {', '.join(report.failures)}")
        return EXIT_FAILURE
    parameters = settings.to_dict()
    parameters["solver"] = asdict(config.solver)
    manifest = RunManifest(
        config.path, "synth", parameters, config_digest=config.digest
    )
    header = manifest.header()
    plant = config.plant
    desc = augment_descriptor(plant)
    L1, F = compute_L1_F(desc)
    vertices = enumerate_vertices(plant.lipschitz_bounds)
    problem = SynthesisProblem(
        desc,
        L1,
        F,
        vertices,
        settings.theorem,
        settings.epsilon,
        settings.delta if settings.delta is not None else 1.0,
        settings.beta,
        config.solver.strict_margin,
    )
    logger.info(f"[fauio] Solving {problem}")
    if grid:
        try:
            result = scalar_search(
                problem, settings.epsilons, settings.deltas, config.solver
            )
        except NoFeasiblePairError as e:
            _write_grid(os.path.join(directory, GRID), e.table, header)
            raise
        _write_grid(os.path.join(directory, GRID), result.table, header)
        problem = problem.with_scalars(result.epsilon, result.delta)
        solution = result.solution
    else:
        solution = solve_problem(problem, config.solver)
    blocks = problem.blocks()
    certificate = verify_certificate(blocks, solution, config.solver.tol, scaled=True)
    summary: Dict[str, Any] = {
        "theorem": problem.theorem,
        "status": solution.status,
        "epsilon": problem.epsilon,
        "delta": problem.delta if problem.theorem == 2 else None,
        "beta": problem.beta,
        "mu": solution.mu,
        "sqrt_mu": solution.sqrt_mu,
        "shapes": {},
        "digest": manifest.digest,
    }
    if not solution:
        summary["certificate"] = certificate.to_dict()
        _write_json(os.path.join(directory, SYNTHESIS), summary)
        manifest.write(directory)
        print(renderer.render_synthesis(summary, certificate))
        logger.error(f"[fauio] Synthesis {solution.status}: {solution.diagnostics}")
        return EXIT_FAILURE
    gains = recover_gains(solution, desc, L1, F, problem.beta)
    design = certify_design(gains, desc, vertices, solution)
    certificate = certificate.merge(design.report)
    summary["shapes"] = {
        name: list(matrix.shape) for name, matrix in gains.matrices().items()
    }
    summary["certificate"] = certificate.to_dict()
    summary["max_abscissa"] = design.max_abscissa
    summary["young_gap"] = _young_gap(blocks, solution, gains)
    _write_text(os.path.join(directory, GAINS), gains.to_text(header))
    matrices = {
        "P1": solution["P1"],
        "P2": solution["P2"],
        "mu": np.array([[solution.mu]]),
    }
    solution_text = utils.format_matrices(matrices, header)
    _write_text(os.path.join(directory, SOLUTION), solution_text)
    _write_checks(os.path.join(directory, CERTIFICATE), certificate, header)
    _write_json(os.path.join(directory, SYNTHESIS), summary)
    manifest.write(directory)
    print(renderer.render_synthesis(summary, certificate))
    print(f"sqrt(mu) = {solution.sqrt_mu:.6g}")
    if not certificate:
        logger.error(f"[fauio] Certificate failed: {', '.join(certificate.failures)}")
        return EXIT_FAILURE
    return EXIT_OK


def _young_gap(blocks, solution: SdpSolution, gains: ObserverGains) -> float:
    """Returns the smallest Young gap over the vertices, or NaN."""
    try:
        return min(young_gap(item, solution, gains) for item in blocks)
    except np.linalg.LinAlgError as e:
        logger.warning(f"[fauio] Young gap not available: {e}")
        return float("nan")


def read_gains(path: str) -> ObserverGains:
    if not os.path.exists(path):
        raise ConfigError(path, "gains file not found; run 'fauio synth' first")
    with open(path, encoding="utf-8") as file:
        text = file.read()
    try:
        return ObserverGains.from_text(text)
    except ValueError as e:
        raise ConfigError(path, str(e))


def read_solution(path: str) -> Optional[SdpSolution]:
    """Returns the Lyapunov blocks and mu written by `synth`, or None."""
    if not os.path.exists(path):
        return None
    with open(path, encoding="utf-8") as file:
        matrices = utils.parse_matrices(file.read())
    mu = float(matrices.pop("mu")[0, 0])
    return SdpSolution("optimal", mu=mu, assignment=matrices)


def read_scenario(path: str) -> ScenarioConfig:
    """Reads a scenario file: a scenario mapping, a preset reference, or a
    configuration with a `simulation` section."""
    try:
        with open(path, encoding="utf-8") as file:
            data = yaml.safe_load(file)
    except OSError as e:
        raise ConfigError(path, f"cannot read: {e.strerror}")
    except yaml.YAMLError as e:
        raise ConfigError(path, f"YAML syntax error: {e}")
    if isinstance(data, dict) and "simulation" in data:
        data = data["simulation"]
    try:
        return parse_scenario(data, "scenario")
    except ConfigError as e:
        raise ConfigError(f"{path} {e.location}", e.message) from e


def compute_metrics(
    traj: sim.Trajectory,
    scenario: ScenarioConfig,
    gains: ObserverGains,
    solution: Optional[SdpSolution] = None,
) -> Dict[str, Any]:
    """Returns the metrics row of a run."""
    plant = traj.desc.plant
    row: Dict[str, Any] = {"scenario": scenario.name}
    row["rmse_fa"] = sim.rmse(traj, "fa") if plant.a1 else None
    row["rmse_fs"] = sim.rmse(traj, "fs") if plant.a2 else None
    channels = [("fa", "fault_a", plant.a1), ("fs", "fault_s", plant.a2)]
    for selector, kind, size in channels:
        events = scenario.events(kind) if size else []
        row[f"settling_{selector}"] = sim.settling_times(traj, selector, events)
        row[f"events_{selector}"] = events
    row["hinf"] = None
    if solution is not None:
        certificate = sim.hinf_check(traj, solution, gains)
        hinf = asdict(certificate)
        hinf["holds"] = bool(certificate)
        row["hinf"] = hinf
    return row


def cmd_simulate(
    config: Config,
    directory: str,
    gains_path: Optional[str] = None,
    preset: Optional[str] = None,
    scenario_path: Optional[str] = None,
    dt: Optional[float] = None,
    horizon: Optional[float] = None,
    stride: int = 1,
) -> int:
    """Runs one scenario and writes the trajectory CSV, plots and metrics."""
    if preset and scenario_path:
        raise UsageError("--preset and --scenario are exclusive")
    if stride < 1:
        raise UsageError(f"--stride must be positive, got {stride}")
    gains = read_gains(gains_path or os.path.join(directory, GAINS))
    desc = augment_descriptor(config.plant)
    gains.check_dimensions(desc)
    if scenario_path:
        scenario = read_scenario(scenario_path)
    elif preset:
        try:
            scenario = get_scenario(preset)
        except KeyError as e:
            raise ConfigError("--preset", str(e.args[0]))
    elif config.simulation is not None:
        scenario = config.simulation
    else:
        raise UsageError("no scenario: give --preset, --scenario or simulation")
    overrides = {"dt": dt, "horizon": horizon}
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if overrides:
        scenario = replace(scenario, **overrides)
    parameters = {"scenario": scenario.to_dict(), "stride": stride, "beta": gains.beta}
    parameters["gains"] = utils.sha256_of_text(gains.to_text())
    manifest = RunManifest(
        config.path, "simulate", parameters, config_digest=config.digest
    )
    traj = sim.integrate(config.plant, gains, scenario)
    solution_dir = os.path.dirname(gains_path) if gains_path else directory
    solution = read_solution(os.path.join(solution_dir, SOLUTION))
    row = compute_metrics(traj, scenario, gains, solution)
    csv_path = os.path.join(directory, f"{scenario.name}.csv")
    traj.to_csv(csv_path, manifest.header(), stride)
    logger.info(f"[fauio] Written: {csv_path}")
    plots = plot_trajectory(traj, directory)
    row["csv"] = os.path.basename(csv_path)
    row["plots"] = [os.path.basename(path) for path in plots]
    row["digest"] = manifest.digest
    _write_json(os.path.join(directory, f"metrics-{scenario.name}.json"), row)
    manifest.write(directory)
    print(renderer.render_metrics([row]))
    return EXIT_OK


def _case_index(scenario: str) -> int:
    order = REFERENCE_TABLES["cases"]
    return order.index(scenario) if scenario in order else len(order)


def cmd_report(directory: str) -> int:
    """Aggregates the artifacts of a run directory into one document."""
    required = [MANIFEST, VALIDATION, SYNTHESIS, GAINS]
    missing = [
        name for name in required if not os.path.exists(os.path.join(directory, name))
    ]
    metrics_paths = sorted(glob.glob(os.path.join(directory, "metrics-*.json")))
    if not metrics_paths:
        missing.append("metrics-<scenario>.json")
    if missing:
        raise ConfigError(directory, f"missing artifacts: {', '.join(missing)}")
    runs = read_manifest(directory)
    manifest = runs[-1] if runs else {}
    validation = _read_json(os.path.join(directory, VALIDATION))
    validation = ConditionReport.from_dict(validation)
    summary = _read_json(os.path.join(directory, SYNTHESIS))
    certificate = ConditionReport.from_dict(summary.get("certificate", {}))
    rows = [_read_json(path) for path in metrics_paths]
    order = REFERENCE_TABLES["cases"]
    rows.sort(key=lambda row: (_case_index(row["scenario"]), row["scenario"]))
    known = any(row["scenario"] in order for row in rows)
    references = REFERENCE_TABLES if known else None
    plots = [plot for row in rows for plot in row.get("plots", [])]
    name = os.path.basename(manifest.get("config_path", directory))
    title = f"fauio report: {os.path.splitext(name)[0]}"
    markdown = renderer.render_report(
        title,
        manifest,
        renderer.render_checks(validation),
        renderer.render_synthesis(summary, certificate),
        renderer.render_metrics(rows, references),
        plots,
    )
    _write_text(os.path.join(directory, REPORT), markdown)
    html = get_html(markdown)
    _write_text(os.path.join(directory, "report.html"), html)
    return EXIT_OK


def _add_output(parser: argparse.ArgumentParser):
    parser.add_argument(
        "-o",
        "--output",
        help="output directory (default: $FAUIO_OUTPUT_DIR or fauio-output)",
    )


def get_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fauio",
        description="Fast adaptive unknown input observer synthesis and simulation.",
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    version = f"fauio {fauio.__version__}"
    parser.add_argument("--version", action="version", version=version)
    subparsers = parser.add_subparsers(dest="command", required=True)

    validate = subparsers.add_parser("validate", help="check the model assumptions")
    validate.add_argument("config", help="YAML configuration file")
    _add_output(validate)

    synth = subparsers.add_parser("synth", help="solve the LMI and write gains")
    synth.add_argument("config", help="YAML configuration file")
    synth.add_argument("--theorem", type=int, choices=[1, 2])
    synth.add_argument("--epsilon", type=float)
    synth.add_argument("--delta", type=float)
    synth.add_argument("--beta", type=float)
    synth.add_argument("--grid", action="store_true", help="search the scalar grid")
    _add_output(synth)

    simulate = subparsers.add_parser(
        "simulate",
        help="run a scenario with the synthesized gains",
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    simulate.add_argument("config", help="YAML configuration file")
    simulate.add_argument("--gains", help="gains file (default: OUTPUT/gains.txt)")
    group = simulate.add_mutually_exclusive_group()
    group.add_argument("--preset", help="preset scenario name")
    group.add_argument("--scenario", help="scenario YAML file")
    simulate.add_argument("--dt", type=float)
    simulate.add_argument("--horizon", type=float)
    simulate.add_argument("--stride", type=int, default=1, help="CSV row stride")
    _add_output(simulate)

    report = subparsers.add_parser("report", help="write the consolidated report")
    report.add_argument("directory", nargs="?", help="run directory")
    return parser


def _run(args: argparse.Namespace) -> int:
    if args.command == "report":
        directory = args.directory or os.environ.get("FAUIO_OUTPUT_DIR") or OUTPUT_DIR
        return cmd_report(directory)
    config = load_config(args.config)
    directory = output_directory(args.output)
    if args.command == "validate":
        return cmd_validate(config, directory)
    if args.command == "synth":
        return cmd_synth(
            config,
            directory,
            args.theorem,
            args.epsilon,
            args.delta,
            args.beta,
            args.grid,
        )
    return cmd_simulate(
        config,
        directory,
        args.gains,
        args.preset,
        args.scenario,
        args.dt,
        args.horizon,
        args.stride,
    )


def cli(argv: Optional[List[str]] = None) -> int:
    """Runs one command and returns its exit status."""
    parser = get_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    level = logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(message)s")
    logger.setLevel(level)
    try:
        return _run(args)
    except (ConfigError, DimensionError, VertexCapError, UsageError) as e:
        logger.error(f"[fauio] {e}")
        return EXIT_INPUT
    except (SynthesisError, NoFeasiblePairError, DivergenceError) as e:
        logger.error(f"[fauio] {e}")
        return EXIT_FAILURE

