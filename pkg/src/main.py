#!/usr/bin/env python3
"""
Stabilized P1 finite element solver for steady convection-diffusion-reaction problems.
"""

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from src.analysis.dmp import check_global_dmp, check_local_dmp, shifted_system, stencil
from src.analysis.metrics import ErrorTableRow, convergence_orders, error_norms
from src.analysis.properties import assumption_min_violations, check_b_axioms
from src.config.schema import RunConfig
from src.discretization.assembly import AlgebraicSystem, assemble
from src.experiments.examples import EXAMPLES, ExperimentSpec, get_benchmark
from src.experiments.output import emit_vtk, write_error_table, write_report
from src.mesh.generator import Mesh, MeshFamily, MeshKind, generate_mesh
from src.solver.fixed_point import SolveResult, SolverOptions, solve
from src.stabilization import StabScheme
from src.utils.config import load_config
from src.utils.helpers import parse_ne_list, setup_logging

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2

SCHEME_NAMES = [scheme.cli_name for scheme in StabScheme]


class UsageArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that exits with EXIT_USAGE on bad arguments"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def compute_error_row(example: str, family: MeshFamily, ne: int, scheme: StabScheme,
                      lump_reaction: bool, opts: SolverOptions) -> ErrorTableRow:
    """Solve one mesh of a convergence sweep and measure the errors"""
    benchmark = get_benchmark(example)
    mesh = generate_mesh(family, ne)
    system = assemble(mesh, benchmark.problem, lump_reaction=lump_reaction)
    result = solve(system, scheme, opts)
    problem = benchmark.problem
    l2, h1, h = error_norms(mesh, benchmark.u_exact, benchmark.grad_exact, result.U, result.B,
                            problem.epsilon, problem.sigma0)
    logging.getLogger(__name__).info(
        f"ne={ne}: L2 {l2:.3e}, H1 {h1:.3e}, h {h:.3e} after {result.iterations} iterations")
    return ErrorTableRow(ne=ne, err_l2=l2, err_h1=h1, err_h=h, iterations=result.iterations,
                         converged=result.converged)


class StabilizedSolverSystem:
    """Solve and convergence pipelines behind the command line"""

    def __init__(self, spec: ExperimentSpec, config: RunConfig):
        self.spec = spec
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.benchmark = spec.benchmark

    def _build_mesh(self, ne: int) -> Mesh:
        self.logger.info(f"Building {self.spec.family.label} mesh with ne={ne}")
        try:
            return generate_mesh(self.spec.family, ne)
        except Exception as e:
            self.logger.error(f"Mesh generation failed: {str(e)}")
            raise

    def _assemble(self, mesh: Mesh) -> AlgebraicSystem:
        self.logger.info(f"Assembling {self.spec.example} problem (lumped reaction: {self.spec.lump_reaction})")
        try:
            system = assemble(mesh, self.benchmark.problem, lump_reaction=self.spec.lump_reaction)
            self.logger.debug(f"System: N={system.n_total}, M={system.n_interior}, nnz={system.A.nnz}")
            return system
        except Exception as e:
            self.logger.error(f"Assembly failed: {str(e)}")
            raise

    def _solve(self, system: AlgebraicSystem) -> SolveResult:
        self.logger.info(f"Solving with {self.spec.scheme.name}")
        try:
            return solve(system, self.spec.scheme, self.config.solver)
        except Exception as e:
            self.logger.error(f"Solve failed: {str(e)}")
            raise

    def _dmp_reports(self, system: AlgebraicSystem, result: SolveResult) -> Dict[str, Any]:
        """Local and global DMP verdicts, also for the shifted form when the benchmark has one"""
        dmp = self.config.dmp
        kwargs = dict(tol=dmp.tolerance, g_tol=dmp.g_tolerance, rowsum_tol=dmp.rowsum_tolerance)
        S = stencil(system.A)
        forms = [('original', system, result.U)]
        if self.benchmark.shift is not None:
            s = self.benchmark.shift
            forms.append(('shifted', shifted_system(system, s), result.U - s))

        reports = {}
        for label, sys_, U in forms:
            reports[label] = {
                'local_weak': check_local_dmp(sys_, result.B, U, S, strong=False, **kwargs).to_dict(),
                'local_strong': check_local_dmp(sys_, result.B, U, S, strong=True, **kwargs).to_dict(),
                'global_weak': check_global_dmp(sys_, result.B, U, strong=False, **kwargs).to_dict(),
                'global_strong': check_global_dmp(sys_, result.B, U, strong=True, **kwargs).to_dict()
            }
        return reports

    def run_solve(self) -> int:
        ne = self.spec.ne or self.benchmark.ne
        mesh = self._build_mesh(ne)
        system = self._assemble(mesh)
        result = self._solve(system)

        U = result.U
        lo, hi = self.benchmark.bounds
        tol = self.config.dmp.tolerance
        report: Dict[str, Any] = {
            'example': self.spec.example,
            'mesh': self.spec.family.label,
            'ne': ne,
            'n_total': system.n_total,
            'n_interior': system.n_interior,
            'scheme': self.spec.scheme.cli_name,
            'lump_reaction': self.spec.lump_reaction,
            'solver': result.summary(),
            'min': float(U.min()),
            'max': float(U.max()),
            'within_bounds': bool(U.min() >= lo - tol and U.max() <= hi + tol),
            'dmp': self._dmp_reports(system, result),
            'b_axioms': check_b_axioms(result.B, system.A),
            'assumption_min_violations': int(len(assumption_min_violations(system.A, system.n_interior)))
        }
        if self.benchmark.u_exact is not None:
            problem = self.benchmark.problem
            l2, h1, h = error_norms(mesh, self.benchmark.u_exact, self.benchmark.grad_exact, U,
                                    result.B, problem.epsilon, problem.sigma0)
            report['errors'] = {'l2': l2, 'h1': h1, 'h': h}

        self.logger.info(f"Solution range [{report['min']:.6g}, {report['max']:.6g}]")
        if self.spec.vtk:
            emit_vtk(mesh, U, self.spec.vtk, title=f"{self.spec.example} {self.spec.scheme.cli_name}")
        if self.spec.json:
            write_report(report, self.spec.json)

        if not result.converged:
            self.logger.warning("Nonlinear solve did not converge")
            return EXIT_NOT_CONVERGED
        return EXIT_OK

    def run_convergence(self, jobs: int = 1) -> Tuple[int, List[ErrorTableRow]]:
        sizes = list(self.spec.ne_list)
        args = [(self.spec.example, self.spec.family, ne, self.spec.scheme, self.spec.lump_reaction,
                 self.config.solver) for ne in sizes]
        if jobs > 1:
            self.logger.info(f"Running {len(sizes)} meshes on {jobs} processes")
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                # map keeps the input order, so rows stay sorted by ne
                computed = list(pool.map(compute_error_row, *zip(*args)))
        else:
            computed = []
            for a in args:
                computed.append(compute_error_row(*a))
                if not computed[-1].converged:
                    break

        rows: List[ErrorTableRow] = []
        for row in computed:
            rows.append(row)
            if not row.converged:
                self.logger.warning(f"Solve for ne={row.ne} did not converge, aborting sweep")
                break
        rows = convergence_orders(rows)

        for row in rows:
            self.logger.info(f"ne={row.ne:5d}  L2 {row.err_l2:.3e} ({row.ord_l2})  "
                             f"H1 {row.err_h1:.3e} ({row.ord_h1})  h {row.err_h:.3e} ({row.ord_h})")
        if self.spec.csv:
            write_error_table(rows, self.spec.csv)
        code = EXIT_OK if all(row.converged for row in rows) else EXIT_NOT_CONVERGED
        return code, rows


def _add_common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--example', choices=EXAMPLES, required=True,
                        help='Benchmark problem')
    parser.add_argument('--mesh', choices=['left', 'right', 'shifted'],
                        help='Mesh family (default depends on the example)')
    parser.add_argument('--shift', type=float,
                        help='Shift of interior nodes as a fraction of the mesh width (shifted meshes, default 0.5)')
    parser.add_argument('--shift-odd-lines', action='store_true',
                        help='Shift odd instead of even horizontal mesh lines')
    parser.add_argument('--scheme', choices=SCHEME_NAMES, default='muas',
                        help='Stabilization scheme')
    parser.add_argument('--lump-reaction', action='store_true',
                        help='Lump the reaction term')
    parser.add_argument('--tol', type=float, help='Nonlinear residual tolerance')
    parser.add_argument('--max-iter', type=int, help='Maximum number of fixed-point iterations')
    parser.add_argument('--config', type=str, default=None,
                        help='Path to configuration file')
    parser.add_argument('--verbose', action='store_true',
                        help='Enable verbose logging')


def build_parser() -> argparse.ArgumentParser:
    parser = UsageArgumentParser(description='Stabilized finite element solver for convection-diffusion-reaction problems')
    sub = parser.add_subparsers(dest='command', required=True)

    solve_parser = sub.add_parser('solve', help='Solve one configuration')
    _add_common_arguments(solve_parser)
    solve_parser.add_argument('--ne', type=int, help='Edges per horizontal mesh line')
    solve_parser.add_argument('--vtk', type=Path, help='Write the solution as legacy VTK')
    solve_parser.add_argument('--json', type=Path, help='Write the solve report as JSON')

    conv_parser = sub.add_parser('converge', help='Run a convergence sweep')
    _add_common_arguments(conv_parser)
    conv_parser.add_argument('--ne-list', type=str, help='Comma-separated doubling mesh sizes')
    conv_parser.add_argument('--extended', action='store_true',
                             help='Append the extended sizes from the config to the sweep')
    conv_parser.add_argument('--csv', type=Path, help='Write the error table as CSV')
    conv_parser.add_argument('--jobs', type=int, help='Number of worker processes')
    return parser


def _run_config(args, parser) -> RunConfig:
    try:
        config = RunConfig.from_dict(load_config(args.config))
        overrides = {}
        if args.tol is not None:
            overrides['tol'] = args.tol
        if args.max_iter is not None:
            overrides['max_iter'] = args.max_iter
        if overrides:
            config = replace(config, solver=replace(config.solver, **overrides))
        return config
    except (ValueError, TypeError, FileNotFoundError) as e:
        parser.error(str(e))


def _mesh_family(args, default: MeshFamily) -> MeshFamily:
    """Family from --mesh, or the benchmark's own family with --shift applied"""
    shift_given = args.shift is not None or args.shift_odd_lines
    if args.mesh:
        shift = 0.5 if args.shift is None else args.shift
        family = MeshFamily.from_name(args.mesh, shift, args.shift_odd_lines)
    else:
        family = default
        if shift_given and family.kind is MeshKind.SHIFTED:
            shift = family.shift_fraction if args.shift is None else args.shift
            family = replace(family, shift_fraction=shift, shift_odd_lines=args.shift_odd_lines)
    if shift_given and family.kind is not MeshKind.SHIFTED:
        raise ValueError(f"--shift and --shift-odd-lines need a shifted mesh, got {family.label}")
    return family


def _experiment(args, parser, config: RunConfig) -> ExperimentSpec:
    benchmark = get_benchmark(args.example)
    try:
        family = _mesh_family(args, benchmark.family)
        ne_list: Tuple[int, ...] = ()
        if args.command == 'converge':
            if args.example != 'smooth':
                raise ValueError("convergence sweeps need the manufactured solution of --example smooth")
            ne_list = tuple(parse_ne_list(args.ne_list)) if args.ne_list else config.sweep.ne_list
            if args.extended:
                ne_list += config.sweep.extended
            for prev, curr in zip(ne_list, ne_list[1:]):
                if curr != 2 * prev:
                    raise ValueError(f"ne must double between sweep entries, got {prev} -> {curr}")
        return ExperimentSpec(example=args.example, family=family,
                              scheme=StabScheme.from_name(args.scheme),
                              ne=getattr(args, 'ne', None), ne_list=ne_list,
                              lump_reaction=args.lump_reaction, csv=getattr(args, 'csv', None),
                              vtk=getattr(args, 'vtk', None), json=getattr(args, 'json', None))
    except ValueError as e:
        parser.error(str(e))


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    config = _run_config(args, parser)
    spec = _experiment(args, parser, config)

    try:
        system = StabilizedSolverSystem(spec, config)
        if args.command == 'solve':
            return system.run_solve()
        jobs = args.jobs if args.jobs is not None else config.sweep.jobs
        if jobs < 1:
            parser.error(f"--jobs must be positive, got {jobs}")
        code, _ = system.run_convergence(jobs=jobs)
        return code
    except Exception as e:
        logging.error(f"System failed: {str(e)}", exc_info=True)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
