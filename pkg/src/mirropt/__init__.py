"""mirropt: coupled first-order methods, their mirror duals, and certificates.

Core pieces:
    spaces        norms, pairings, Bregman divergences, finite differences
    dgf           squared-lp distance-generating functions and mirror maps
    objectives    smooth test objectives with declared constants
    cfom          coefficient schedules, executors, the mirror-dual transform
    methods       MD, AMD, their duals, and the rate-optimal concatenation
    certificates  energy sequences and the duality identity checker
    ot            entropy-regularized optimal transport pipeline
    cli           command-line front end (`mirropt`)
"""

from .cfom import (
    CoefficientSchedule,
    anti_transpose,
    load_schedule,
    mirror_dual_schedule,
    run_cfom,
    run_dual_cfom,
    run_mirror_dual,
    save_schedule,
    to_h_matrix,
    validate_schedule,
)
from .certificates import (
    GradientScenario,
    check_mirror_duality,
    duality_transform,
    dual_energy_trace,
    evaluate_U,
    evaluate_V,
    primal_energy_trace,
)
from .dgf import DGF, dgf_from_descriptor, euclidean, squared_lp
from .methods import (
    amd_schedule,
    run_amd,
    run_concat,
    run_dual_amd,
    run_dual_md,
    run_md,
    theta_sequence,
)
from .objectives import (
    DenseQuadratic,
    DiagQuadratic,
    LogSumExp,
    SmoothObjective,
    objective_from_descriptor,
)
from .ot import (
    OTInstance,
    OTDualObjective,
    lp_oracle,
    ot_dual_grad,
    ot_dual_value,
    plan_from_dual,
    round_plan,
    solve_ot,
)
from .spaces import NormIndex, bregman, finite_difference_gradient, lp_norm, pairing

__version__ = "0.1.0"
