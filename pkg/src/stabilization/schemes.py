from enum import Enum, auto


class StabScheme(Enum):
    """Algebraic stabilizations selectable for the nonlinear problem"""
    GALERKIN = auto()
    UPWIND_D = auto()
    AFC_KUZMIN = auto()
    MUAS = auto()
    MUAS_DQ = auto()

    @property
    def is_linear(self) -> bool:
        """B does not depend on the solution"""
        return self in (StabScheme.GALERKIN, StabScheme.UPWIND_D)

    @property
    def cli_name(self) -> str:
        return {
            StabScheme.GALERKIN: 'galerkin',
            StabScheme.UPWIND_D: 'upwind',
            StabScheme.AFC_KUZMIN: 'afc-kuzmin',
            StabScheme.MUAS: 'muas',
            StabScheme.MUAS_DQ: 'muas-dq'
        }[self]

    @classmethod
    def from_name(cls, name: str) -> 'StabScheme':
        for scheme in cls:
            if scheme.cli_name == name:
                return scheme
        raise ValueError(f"Unknown stabilization scheme: {name}")
