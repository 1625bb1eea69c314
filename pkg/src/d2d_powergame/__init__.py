"""Game-theoretic uplink power control for D2D and cellular devices."""
from .analysis import (
    JacobianReport,
    StandardFunctionReport,
    check_standard_function,
    closed_form_jacobian,
    jacobian_at,
)
from .baselines import (
    UpdateRule,
    get_rule,
    list_rules,
    register_rule,
    rule_cdpc,
    rule_koskie_gajic,
)
from .config import Config, parse_config, serialize_config
from .estimator import PowerControlGame
from .exceptions import ConfigError, ContractViolation, DivergenceError, RegistrationError
from .experiments import (
    Axis,
    GainModel,
    MetricsRow,
    ScenarioSpec,
    SweepSpec,
    admitted_count,
    compare_rules,
    generate_scenario,
    run_sweep,
)
from .game import (
    GameParams,
    RunResult,
    TraceRecord,
    UtilityKind,
    is_nash_equilibrium,
    run_to_convergence,
    update_priced,
    update_unpriced,
    utility_base,
    utility_priced,
)
from .model import (
    EPS_POWER,
    Device,
    DeviceKind,
    NetworkScenario,
    fixed_point_powers,
    interference,
    interference_all,
    is_feasible,
    sinr,
    sinr_all,
)

__version__ = "0.1.0"
