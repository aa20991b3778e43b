from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

from src.solver.fixed_point import SolverOptions


@dataclass(frozen=True)
class DmpConfig:
    tolerance: float = 1e-10
    g_tolerance: float = 1e-12
    rowsum_tolerance: float = 1e-12

    def __post_init__(self):
        for name in ('tolerance', 'g_tolerance', 'rowsum_tolerance'):
            if getattr(self, name) < 0:
                raise ValueError(f"dmp.{name} must be nonnegative")


@dataclass(frozen=True)
class SweepConfig:
    ne_list: Tuple[int, ...] = (16, 32, 64, 128, 256)
    extended: Tuple[int, ...] = (512, 1024)
    jobs: int = 1

    def __post_init__(self):
        if not self.ne_list:
            raise ValueError("sweep.ne_list must not be empty")
        if any(ne < 2 for ne in self.ne_list + self.extended):
            raise ValueError("every ne in the sweep must be at least 2")
        if self.jobs < 1:
            raise ValueError(f"sweep.jobs must be positive, got {self.jobs}")

    def sizes(self, extended: bool = False) -> Tuple[int, ...]:
        return self.ne_list + self.extended if extended else self.ne_list


@dataclass(frozen=True)
class RunConfig:
    solver: SolverOptions = field(default_factory=SolverOptions)
    dmp: DmpConfig = field(default_factory=DmpConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output_dir: str = 'results'

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> 'RunConfig':
        """Build from a dict as returned by load_config"""
        sweep = dict(config.get('sweep', {}))
        for key in ('ne_list', 'extended'):
            if key in sweep:
                sweep[key] = tuple(int(ne) for ne in sweep[key])
        return cls(solver=SolverOptions(**config.get('solver', {})),
                   dmp=DmpConfig(**config.get('dmp', {})),
                   sweep=SweepConfig(**sweep),
                   output_dir=config.get('output', {}).get('directory', 'results'))
