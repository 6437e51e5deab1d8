# src/cli/app.py
"""Command-line entry point: ``python -m src.cli SUBCOMMAND [options]``.

Exit codes: 0 success, 2 invalid input, 3 solver failure.
"""

import argparse
import sys
import time
from datetime import datetime, timezone
from typing import List, Optional

from config.settings import get_settings
from src import __version__
from src.cli.commands import COMMANDS, RunContext, parse_floats, parse_nmax, parse_sweep
from src.models.enums import Direction, ModulationDepthConvention, SolverTier
from src.models.schemas.manifest import RunManifest
from src.repositories.measurement_repository import MeasurementRepository
from src.repositories.result_repository import ResultRepository
from src.repositories.scene_repository import SceneRepository
from src.services.scene_service import SceneService
from src.utils.errors import SolverError, ValidationError
from src.utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--config", help="scene file (JSON or YAML, MHz units)")
    source.add_argument("--preset", help="named scene from the presets file")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes for sweeps (default: MODMIRROR_WORKERS)")
    common.add_argument("--output-dir", default=None, help="directory for CSV/JSON outputs")
    common.add_argument("--tag", default=None, help="prefix of output file names (default: subcommand)")
    common.add_argument("--log-level", default=None,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"))
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modmirror",
        description="Photon scattering from frequency-modulated emitters in a waveguide. "
        "All frequencies are ordinary frequencies in MHz.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    common = _common_options()

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text,
                              formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    p = add("single-qubit", "elastic transmission t0 of one modulated qubit")
    p.add_argument("--qubit", type=int, default=0)
    p.add_argument("--am-mhz", type=float, default=None, help="override the qubit's A_m")
    p.add_argument("--sweep", type=parse_sweep, default=None, help="probe START:STOP:COUNT")

    p = add("sidebands", "weak-drive sideband coefficients r_n, t_n")
    p.add_argument("--nmax", type=parse_nmax, default=None, help="'auto' or a truncation order")

    p = add("mollow", "strong-drive emission spectrum of one qubit")
    p.add_argument("--qubit", type=int, default=0)
    p.add_argument("--sweep", type=parse_sweep, default=None, help="detuning from the drive START:STOP:COUNT")
    p.add_argument("--omega-mhz", type=parse_floats, default=None,
                   help="comma-separated modulation frequencies for an avoided-crossing scan")
    p.add_argument("--depth-convention", default=None, choices=[c.value for c in ModulationDepthConvention])

    p = add("psd", "directional emission spectrum from the master equation")
    p.add_argument("--sweep", type=parse_sweep, default=None, help="detuning from the drive START:STOP:COUNT")
    p.add_argument("--direction", default="both", choices=[d.value for d in Direction] + ["both"])

    p = add("map", "sideband power versus alpha and probe detuning, plus the D(alpha) cut")
    p.add_argument("--alpha-steps", type=int, default=None)
    p.add_argument("--detuning-steps", type=int, default=None)
    p.add_argument("--detuning-span-mhz", type=float, default=None)
    p.add_argument("--sideband", type=int, default=None)
    p.add_argument("--tier", default=None, choices=[t.value for t in SolverTier])

    p = add("power-map", "coherent scattering versus drive power (master equation)")
    p.add_argument("--powers", type=parse_floats, default=None, help="(rabi/gamma1)^2 values")
    p.add_argument("--detuning-steps", type=int, default=None)
    p.add_argument("--detuning-span-mhz", type=float, default=None)
    p.add_argument("--alpha-over-pi", type=float, default=None)

    p = add("fit", "calibration fits from measured CSV data")
    p.add_argument("--spectrum", default=None, help="freq_mhz,power CSV of the unmodulated qubit")
    p.add_argument("--background", default=None, help="freq_mhz,power CSV of the background")
    p.add_argument("--modulated", default=None, help="freq_mhz,power CSV of the modulated qubit")
    p.add_argument("--omega-mhz", type=float, default=None, help="modulation frequency")
    p.add_argument("--pairs", default=None, help="av_vpp,am_mhz[,omega_mhz] CSV")
    p.add_argument("--target-am-mhz", type=float, default=None)
    p.add_argument("--qubit", type=int, default=0)

    p = add("gyrator", "phase difference of t_n between the two ports")
    p.add_argument("--sideband", type=int, default=None)
    p.add_argument("--detuning-steps", type=int, default=None)
    p.add_argument("--detuning-span-mhz", type=float, default=None)

    p = add("isolator", "isolation and insertion loss along alpha")
    p.add_argument("--alpha-steps", type=int, default=None)
    p.add_argument("--sideband", type=int, default=None)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--output-dir", default=None)
    p.add_argument("--log-level", default=None,
                   choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"))
    return parser


def _execute(args: argparse.Namespace, argv: List[str]) -> int:
    settings = get_settings()
    started = time.perf_counter()
    scenes = SceneRepository(".", settings)
    ctx = RunContext(args=args, settings=settings, measurements=MeasurementRepository("."))

    if args.config:
        ctx.config = scenes.load(args.config)
    elif args.preset:
        ctx.config = scenes.preset(args.preset)
        ctx.options = scenes.preset_options(args.preset)
    if ctx.config is not None:
        ctx.scene = SceneService.scene_from_config(ctx.config)

    logger.info(f"▶ {args.command} ({' '.join(argv)})")
    outcome = COMMANDS[args.command](ctx)

    results = ResultRepository(args.output_dir or settings.OUTPUT_DIR)
    prefix = args.tag or args.command
    outputs = [str(results.write_table(f"{prefix}_{name}", frame)) for name, frame in outcome.tables.items()]
    if outcome.records:
        outputs.append(str(results.write_json(prefix, outcome.records)))

    manifest = RunManifest(
        subcommand=args.command,
        argv=argv,
        config=ctx.config.model_dump(mode="json") if ctx.config is not None else None,
        tier=outcome.tier,
        grid_shapes=outcome.grid_shapes,
        outputs=outputs,
        wall_clock_s=time.perf_counter() - started,
        version=__version__,
        created_at=datetime.now(timezone.utc).isoformat(),
    )
    outputs.append(str(results.write_manifest(manifest, prefix)))
    for path in outputs:
        print(path)
    logger.info(f"✓ {args.command} finished in {manifest.wall_clock_s:.2f} s")
    return EXIT_OK


def _replay(args: argparse.Namespace) -> int:
    manifest = ResultRepository(".").read_manifest(args.manifest)
    if not manifest.argv or manifest.argv[0] == "replay":
        print("error: manifest does not record a runnable command", file=sys.stderr)
        return EXIT_INVALID
    argv = list(manifest.argv)
    if args.output_dir:
        argv += ["--output-dir", args.output_dir]
    logger.info(f"Replaying {manifest.subcommand} from {args.manifest}")
    return run(argv)


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run the subcommand and return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID

    setup_logging(log_level=args.log_level)
    try:
        if args.command == "replay":
            return _replay(args)
        return _execute(args, argv)
    except ValidationError as e:
        logger.error(f"✗ Invalid input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as e:
        logger.error(f"✗ Solver failed: {e}")
        print(f"solver error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_SOLVER


def main() -> None:
    sys.exit(run())
