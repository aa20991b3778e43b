from src.solver.fixed_point import (SolveResult, SolverOptions, fixed_point_step, linear_solve,
                                    nonlinear_residual, solve)

__all__ = ['SolveResult', 'SolverOptions', 'fixed_point_step', 'linear_solve', 'nonlinear_residual',
           'solve']
