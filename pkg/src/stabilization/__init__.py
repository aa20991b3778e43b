from src.stabilization.limiters import (Stabilizer, afc_B, compute_D, kuzmin_alpha, muas_B,
                                        muas_beta)
from src.stabilization.pattern import PairPattern
from src.stabilization.schemes import StabScheme

__all__ = ['Stabilizer', 'afc_B', 'compute_D', 'kuzmin_alpha', 'muas_B', 'muas_beta', 'PairPattern',
           'StabScheme']
