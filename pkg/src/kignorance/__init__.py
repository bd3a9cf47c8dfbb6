"""Explicit solutions of the k-ignorance BSDE, with PDE and Monte Carlo oracles and robust corridor prices."""
from .closed_form import (
    digital_high_YZ,
    digital_low_YZ,
    general_H,
    general_Z,
    indicator_Y,
    indicator_Z,
    initial_value_joint_law,
    quadratic_Y,
    quadratic_Y_literal,
    quadratic_Z,
    quadratic_Z_literal,
    sign_drift_quadratic,
    sign_drift_quadratic_literal,
    solution_Y,
    solution_Z,
)
from .core_math import (
    JointLaw,
    joint_density_atom,
    joint_density_continuous,
    local_time_laplace,
    std_normal_cdf,
    std_normal_pdf,
)
from .errors import ConfigurationError, DomainError, MonteCarloError, QuadratureError
from .mc import (
    Estimate,
    PathConfig,
    estimate_w,
    estimate_w_refinement,
    estimate_Y,
    local_time_tanaka,
    simulate_path,
    simulate_paths,
)
from .payoffs import Direction, KIgnoranceModel, Kind, SolutionSample, TerminalPayoff
from .pde import (
    Grid1D,
    PdeSolution,
    extract_w,
    solve_generic_symmetric_driver,
    solve_k_ignorance,
    solve_payoff,
    solve_sign_drift,
)
from .pricing import (
    CorridorClaim,
    MarketModel,
    PriceQuote,
    bs_reference_digital,
    lower_price,
    lower_price_t0,
    map_claim_to_bm,
    upper_price,
    upper_price_t0,
)

__version__ = "0.1.0"
