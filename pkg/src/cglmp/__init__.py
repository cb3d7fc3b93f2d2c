"""Numerical checks of CGLMP violation by pure entangled two-qudit states."""

from .analytic import (
    RestrictedSetting,
    empirical_i3_rough,
    i2_closed_form,
    i3_closed_form,
    id_closed_form,
    optimal_eta,
    restricted_bound,
    restricted_max,
    restricted_value,
)
from .bell import (
    DeterministicStrategy,
    Functional,
    ProbabilityTable,
    SettingsQuad,
    cglmp_value,
    gill_value,
    joint_table,
    lhv_bound_brute_force,
    no_signaling_check,
    prob_equal_shift,
)
from .measure import (
    FullUnitaryParams,
    MeasurementUnitary,
    Su2BlockParams,
    full_unitary,
    su2_block_unitary,
    verify_unitary,
)
from .optimize import (
    OptimizerConfig,
    ViolationResult,
    fig1_sweep,
    gisin_scan,
    maximize_full,
    maximize_restricted,
    maximize_restricted_kappa,
)
from .qstate import (
    PureTwoQuditState,
    QutritBetaXi,
    SchmidtAngles,
    kappa_from_beta_xi,
    schmidt_rank,
    state_from_kappa,
    state_from_schmidt,
)

__version__ = "0.1.0"
