# src/experiments/examples.py
"""
Benchmark problems on the unit square and the experiment description used by the CLI.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Tuple

import numpy as np

from src.discretization.assembly import ProblemSpec
from src.mesh.generator import MeshFamily, MeshKind
from src.stabilization import StabScheme

EXAMPLES = ('reaction', 'convection', 'smooth')


@dataclass(frozen=True)
class Benchmark:
    """
    A problem together with what is known about its solution.

    Attributes:
        u_exact, grad_exact: manufactured solution, when there is one
        bounds: interval the exact solution is known to lie in
        shift: constant s for which the problem in u - s has vanishing source
    """
    problem: ProblemSpec
    family: MeshFamily
    ne: int
    u_exact: Optional[Callable] = None
    grad_exact: Optional[Callable] = None
    bounds: Tuple[float, float] = (0.0, 1.0)
    shift: Optional[float] = None


def _constant(value: float) -> Callable:
    return lambda x, y: np.full(np.shape(x), value, dtype=float)


def reaction_problem() -> ProblemSpec:
    return ProblemSpec(epsilon=1e-8, b=lambda x, y: (0.004, 0.012), c=_constant(1.0), g=_constant(1.0),
                       u_b=_constant(0.0), sigma0=1.0, name='reaction')


def _outflow_boundary(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.where(np.isclose(x, 1.0, rtol=0.0, atol=1e-14) | np.isclose(y, 0.0, rtol=0.0, atol=1e-14),
                    0.0, 1.0)


def convection_problem() -> ProblemSpec:
    angle = -np.pi / 3
    return ProblemSpec(epsilon=1e-2, b=lambda x, y: (np.cos(angle), np.sin(angle)), c=_constant(0.0),
                       g=_constant(0.0), u_b=_outflow_boundary, sigma0=0.0, name='convection')


# u = 100 p(x) q(y), p = x^2 (1-x)^2, q = y (1-y) (1-2y)
def _p(x):
    return x ** 2 - 2 * x ** 3 + x ** 4


def _dp(x):
    return 2 * x - 6 * x ** 2 + 4 * x ** 3


def _ddp(x):
    return 2 - 12 * x + 12 * x ** 2


def _q(y):
    return y - 3 * y ** 2 + 2 * y ** 3


def _dq(y):
    return 1 - 6 * y + 6 * y ** 2


def _ddq(y):
    return -6 + 12 * y


def smooth_solution(x, y):
    return 100.0 * _p(x) * _q(y)


def smooth_gradient(x, y):
    return 100.0 * _dp(x) * _q(y), 100.0 * _p(x) * _dq(y)


def smooth_problem(epsilon: float = 10.0, b: Tuple[float, float] = (3.0, 2.0),
                   c: float = 1.0) -> ProblemSpec:
    b1, b2 = b

    def source(x, y):
        laplacian = 100.0 * (_ddp(x) * _q(y) + _p(x) * _ddq(y))
        ux, uy = smooth_gradient(x, y)
        return -epsilon * laplacian + b1 * ux + b2 * uy + c * smooth_solution(x, y)

    return ProblemSpec(epsilon=epsilon, b=lambda x, y: (b1, b2), c=_constant(c), g=source,
                       u_b=_constant(0.0), sigma0=c, name='smooth')


def get_benchmark(name: str) -> Benchmark:
    if name == 'reaction':
        return Benchmark(problem=reaction_problem(), family=MeshFamily(MeshKind.LEFT_DIAG), ne=20,
                         shift=1.0)
    if name == 'convection':
        return Benchmark(problem=convection_problem(), family=MeshFamily(MeshKind.SHIFTED, 0.5), ne=20)
    if name == 'smooth':
        return Benchmark(problem=smooth_problem(), family=MeshFamily(MeshKind.SHIFTED, 0.5), ne=16,
                         u_exact=smooth_solution, grad_exact=smooth_gradient,
                         bounds=(-np.inf, np.inf))
    raise ValueError(f"Unknown example: {name} (choose from {', '.join(EXAMPLES)})")


@dataclass
class ExperimentSpec:
    """One solve or one convergence sweep as requested on the command line"""
    example: str
    family: MeshFamily
    scheme: StabScheme
    ne: Optional[int] = None
    ne_list: Tuple[int, ...] = ()
    lump_reaction: bool = False
    csv: Optional[Path] = None
    vtk: Optional[Path] = None
    json: Optional[Path] = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.example not in EXAMPLES:
            raise ValueError(f"Unknown example: {self.example}")
        if self.ne is not None and self.ne < 2:
            raise ValueError(f"ne must be at least 2, got {self.ne}")
        if any(ne < 2 for ne in self.ne_list):
            raise ValueError(f"every ne must be at least 2, got {list(self.ne_list)}")

    @property
    def benchmark(self) -> Benchmark:
        return get_benchmark(self.example)
