"""Higher-order SUSY partners of the free particle by Backlund superposition."""

from .chain import (
    BacklundChain,
    GridSample,
    LevelValue,
    Pole,
    PotentialLevel,
    backlund_step,
    count_poles,
    eval_grid,
    eval_level,
    eval_potential,
    find_poles,
)
from .errors import (
    AsymptoteNotReached,
    ChainError,
    DenominatorZero,
    SingularityError,
    SingularPoint,
    SingularPotential,
)
from .seeds import Family, SeedSpec, SeedValue, eval_seed, factorization_energy, first_order_partner

__version__ = "0.1.0"
