"""Run every preset scene and compare the figures of merit with the measured values."""

import argparse
import json
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli import run
from src.utils.logger import get_logger, setup_logging

setup_logging()
logger = get_logger(__name__)

# (subcommand, preset, extra arguments, record keys compared with a measured value)
JOBS = [
    ("single-qubit", "single_qubit_unmodulated", [], {}),
    ("single-qubit", "single_qubit", [], {}),
    ("sidebands", "two_qubit_in_phase", [], {}),
    ("sidebands", "two_qubit_out_of_phase", [], {}),
    ("mollow", "nested_mollow", ["--depth-convention", "peak_to_peak"], {"inner_triplet_splitting_mhz": 20.0}),
    ("mollow", "nested_mollow_scan", [], {}),
    ("psd", "two_qubit_in_phase", [], {}),
    ("psd", "two_qubit_out_of_phase", [], {}),
    ("map", "directional_map", [], {"directivity_max": 0.84, "directivity_min": -0.99}),
    ("isolator", "isolator", [], {"isolation_db": 3.3}),
    ("gyrator", "gyrator", [], {}),
    ("power-map", "power_map", [], {}),
]


def run_job(command, preset, extra, expected, output_dir: Path, workers: int) -> bool:
    tag = f"{preset}_{command}"
    logger.info("\n" + "=" * 60)
    logger.info(f"{command} on preset '{preset}'")
    logger.info("=" * 60)
    argv = [command, "--preset", preset, "--output-dir", str(output_dir), "--tag", tag, *extra]
    if command in ("map", "power-map", "gyrator", "isolator"):
        argv += ["--workers", str(workers)]
    code = run(argv)
    if code != 0:
        logger.error(f"  ✗ exit code {code}")
        return False

    records_path = output_dir / f"{tag}.json"
    records = json.loads(records_path.read_text()) if records_path.is_file() else {}
    for key, measured in expected.items():
        value = records.get(key)
        if value is None:
            logger.warning(f"  ⚠️ {key}: not computed (measured {measured})")
        else:
            logger.info(f"  {key}: {value:.3f} (measured {measured})")
    logger.info(f"  ✓ outputs in {output_dir}")
    return True


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output-dir", default="outputs/figures")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--only", nargs="*", default=None, help="preset names to run")
    args = parser.parse_args()

    output_dir = Path(args.output_dir)
    results = {}
    for command, preset, extra, expected in JOBS:
        if args.only and preset not in args.only:
            continue
        results[f"{preset} ({command})"] = run_job(command, preset, extra, expected, output_dir, args.workers)

    logger.info("\n" + "=" * 60)
    logger.info("SUMMARY")
    logger.info("=" * 60)
    for name, ok in results.items():
        logger.info(f"{'✓' if ok else '✗'} {name}")
    return 0 if all(results.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
