"""Spectral simulator and verification harness for Levy-driven stochastic heat equations."""

from .convolution import (
    EULER_GRID,
    EXACT_JUMP,
    FrameNorm,
    MCEstimate,
    SpaceTimeField,
    TimeGrid,
    evolve,
    mc_norm,
    mc_solution_norm,
    prop1_lhs,
    stochastic_convolution,
)
from .errors import ConfigError, ContractError, InfiniteMomentError, SingularityError
from .grid import (
    HEAT,
    Field,
    GridSpec,
    Multiplier,
    Rep,
    Semigroup,
    apply_multiplier,
    bessel_potential,
    forward_transform,
    fractional_semigroup,
    heat_semigroup,
    inverse_transform,
    lp_norm,
    riesz_potential,
)
from .inequalities import (
    RatioReport,
    check_corollary,
    check_isometry,
    check_kunita,
    check_lemma1,
    check_lemma2,
    check_lemma3,
    check_partition,
    check_prop1,
    check_theorem,
)
from .levy import (
    Atoms,
    Density,
    JumpPath,
    beta_moment,
    increment,
    sample_path,
    truncate_small_jumps,
)
from .littlewood_paley import (
    DyadicPartition,
    besov_norm,
    build_partition,
    project_block,
    project_low,
    sobolev_norm,
)

__version__ = "0.1.0"
