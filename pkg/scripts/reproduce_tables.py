#!/usr/bin/env python3
"""
Reproduce the four convergence tables of the smooth benchmark as CSV files.
"""
import argparse
import logging
import sys
from pathlib import Path

from src.config.schema import RunConfig
from src.experiments.examples import ExperimentSpec
from src.main import StabilizedSolverSystem
from src.mesh.generator import MeshFamily, MeshKind
from src.stabilization import StabScheme
from src.utils.config import load_config
from src.utils.helpers import setup_logging, validate_directory

TABLES = {
    'afc_shift05': (StabScheme.AFC_KUZMIN, 0.5),
    'muas_shift05': (StabScheme.MUAS, 0.5),
    'muas_dq_shift05': (StabScheme.MUAS_DQ, 0.5),
    'muas_shift08': (StabScheme.MUAS, 0.8)
}


def main():
    parser = argparse.ArgumentParser(description='Reproduce the convergence tables')
    parser.add_argument('--output', type=str, default=None,
                        help='Directory for the CSV files (default: <output_dir>/tables)')
    parser.add_argument('--config', type=str, default=None, help='Path to configuration file')
    parser.add_argument('--extended', action='store_true', help='Include the extended mesh sizes')
    parser.add_argument('--jobs', type=int, default=None, help='Number of worker processes')
    parser.add_argument('--verbose', action='store_true', help='Enable verbose logging')
    args = parser.parse_args()
    setup_logging(args.verbose)

    config = RunConfig.from_dict(load_config(args.config))
    output = validate_directory(args.output or Path(config.output_dir) / 'tables')
    jobs = args.jobs or config.sweep.jobs
    status = 0
    for name, (scheme, shift) in TABLES.items():
        logging.info(f"Table {name}")
        spec = ExperimentSpec(example='smooth', family=MeshFamily(MeshKind.SHIFTED, shift), scheme=scheme,
                              ne_list=config.sweep.sizes(args.extended), csv=Path(output) / f"{name}.csv")
        code, _ = StabilizedSolverSystem(spec, config).run_convergence(jobs=jobs)
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
