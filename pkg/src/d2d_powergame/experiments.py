"""Scenario generation, run metrics and parameter sweeps."""
from dataclasses import dataclass, replace
import enum

import numpy as np
from joblib import Parallel, delayed

from .baselines import get_rule
from .exceptions import ConfigError
from .game import GameParams, run_to_convergence
from .model import (
    DEFAULT_NOISE_POWER,
    DEFAULT_P_MAX,
    Device,
    DeviceKind,
    NetworkScenario,
    is_feasible,
)

REFERENCE_DISTANCE_M = 1.0


class GainModel(enum.Enum):
    DISTANCE_POWER = "distance_power"
    EXPLICIT = "explicit"


class Axis(enum.Enum):
    ALPHA = "alpha"
    PRICE = "price"
    DEVICE_COUNT = "device_count"


@dataclass(frozen=True)
class ScenarioSpec:
    """Recipe for a random single-cell drop.

    The base station sits at the origin. The first ``n_cellular`` devices
    transmit to it; the rest are D2D pairs whose receiver lies
    ``d2d_min_m..d2d_max_m`` from the transmitter. With ``feasible_for``
    set, drops are redrawn (same RNG stream) until that SINR target is
    reachable by every device under the power cap.
    """

    n_devices: int = 20
    n_cellular: int = 1
    cell_radius_m: float = 500.0
    path_loss_exponent: float = 3.5
    gain_model: GainModel = GainModel.DISTANCE_POWER
    gains: tuple = None
    noise_power: float = DEFAULT_NOISE_POWER
    p_max: float = DEFAULT_P_MAX
    seed: int = 0
    d2d_min_m: float = 2.0
    d2d_max_m: float = 25.0
    feasible_for: float = None
    max_redraws: int = 10_000

    def __post_init__(self):
        if int(self.n_devices) != self.n_devices or self.n_devices < 1:
            raise ConfigError(f"must be an integer >= 1, got {self.n_devices}", key="scenario.n_devices")
        if not 0 <= self.n_cellular <= self.n_devices:
            raise ConfigError(
                f"must lie in [0, n_devices], got {self.n_cellular}", key="scenario.n_cellular"
            )
        if not self.cell_radius_m > 0:
            raise ConfigError(f"must be > 0, got {self.cell_radius_m}", key="scenario.cell_radius_m")
        if not 2 <= self.path_loss_exponent <= 6:
            raise ConfigError(
                f"must lie in [2, 6], got {self.path_loss_exponent}", key="scenario.path_loss_exponent"
            )
        if not self.noise_power > 0:
            raise ConfigError(f"must be > 0, got {self.noise_power}", key="scenario.noise_power")
        if not self.p_max > 0:
            raise ConfigError(f"must be > 0, got {self.p_max}", key="scenario.p_max")
        if not 0 < self.d2d_min_m <= self.d2d_max_m:
            raise ConfigError("need 0 < d2d_min_m <= d2d_max_m", key="scenario.d2d_min_m")
        if self.gain_model is GainModel.EXPLICIT:
            if self.gains is None:
                raise ConfigError("explicit gain model needs gains", key="scenario.gains")
            if np.shape(self.gains)[0] != self.n_devices:
                raise ConfigError(
                    f"expected {self.n_devices} gains, got {np.shape(self.gains)[0]}", key="scenario.gains"
                )
        if self.feasible_for is not None and not self.feasible_for > 0:
            raise ConfigError(f"must be > 0, got {self.feasible_for}", key="scenario.feasible_for")


def _kinds(spec):
    return [DeviceKind.CELLULAR] * spec.n_cellular + [DeviceKind.D2D_PAIR] * (spec.n_devices - spec.n_cellular)


def _draw(spec, rng):
    n = spec.n_devices
    radius = spec.cell_radius_m * np.sqrt(rng.random(n))
    angle = 2 * np.pi * rng.random(n)
    tx = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
    link = rng.uniform(spec.d2d_min_m, spec.d2d_max_m, n)
    heading = 2 * np.pi * rng.random(n)
    rx = tx + np.column_stack([link * np.cos(heading), link * np.sin(heading)])
    kinds = _kinds(spec)
    rx[: spec.n_cellular] = 0.0
    dist = np.linalg.norm(rx[:, None, :] - tx[None, :, :], axis=2)
    gains = (np.maximum(dist, REFERENCE_DISTANCE_M) / REFERENCE_DISTANCE_M) ** (-spec.path_loss_exponent)
    devices = tuple(
        Device(i, kinds[i], tuple(map(float, tx[i])), tuple(map(float, rx[i]))) for i in range(n)
    )
    return NetworkScenario(devices, gains, spec.noise_power, spec.p_max)


def generate_scenario(spec):
    """Draw the scenario described by ``spec``; deterministic per seed.

    Distance-power gains are ``(max(d, 1 m) / 1 m) ** -exponent`` for every
    transmitter/receiver pair, so all gains lie in ``(0, 1]``.
    """
    if spec.gain_model is GainModel.EXPLICIT:
        kinds = _kinds(spec)
        devices = tuple(Device(i, kinds[i]) for i in range(spec.n_devices))
        return NetworkScenario(devices, spec.gains, spec.noise_power, spec.p_max)
    rng = np.random.default_rng(spec.seed)
    for _ in range(spec.max_redraws):
        scenario = _draw(spec, rng)
        if spec.feasible_for is None or is_feasible(scenario, spec.feasible_for):
            return scenario
    raise ConfigError(
        f"no drop feasible for target {spec.feasible_for} after {spec.max_redraws} draws",
        key="scenario.feasible_for",
    )


def admitted_count(result, params, sinr_slack=0.05):
    """Devices whose final SINR is within ``sinr_slack`` of the shifted target."""
    if result is None or len(result.final_sinrs) == 0:
        return 0
    threshold = (1.0 - sinr_slack) * params.effective_target
    return int(np.count_nonzero(result.final_sinrs >= threshold))


def admissions_over_iterations(result, params, sinr_slack=0.05):
    """Admitted-device count after each recorded iteration."""
    threshold = (1.0 - sinr_slack) * params.effective_target
    return [int(np.count_nonzero(rec.sinrs >= threshold)) for rec in result.trace]


def energy_efficiency_proxy(result):
    """``sum log2(1 + sinr) / sum power`` in bit/s/Hz per watt (not from the source model)."""
    return float(np.sum(np.log2(1.0 + result.final_sinrs)) / np.sum(result.final_powers))


@dataclass(frozen=True)
class MetricsRow:
    axis: str
    axis_value: float
    repetition: int
    seed: int
    rule: str
    mean_power_w: float
    mean_sinr: float
    iterations: int
    converged: bool
    admitted: int
    energy_efficiency_proxy: float


def metrics_row(result, params, axis, value, repetition, seed, sinr_slack=0.05):
    return MetricsRow(
        axis=axis,
        axis_value=value,
        repetition=repetition,
        seed=seed,
        rule=result.rule_name,
        mean_power_w=result.mean_power,
        mean_sinr=result.mean_sinr,
        iterations=result.iterations_used,
        converged=result.converged,
        admitted=admitted_count(result, params, sinr_slack),
        energy_efficiency_proxy=energy_efficiency_proxy(result),
    )


@dataclass(frozen=True)
class SweepSpec:
    axis: Axis = Axis.PRICE
    values: tuple = (0.0, 5100.0)
    rule: str = "priced"
    repetitions: int = 20
    params: GameParams = GameParams()

    def __post_init__(self):
        values = tuple(self.values)
        if not values:
            raise ConfigError("sweep values must be non-empty", key="sweep.values")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError("sweep values must be strictly increasing", key="sweep.values")
        if self.axis is Axis.DEVICE_COUNT and any(int(v) != v or v < 1 for v in values):
            raise ConfigError("device counts must be integers >= 1", key="sweep.values")
        if int(self.repetitions) != self.repetitions or self.repetitions < 1:
            raise ConfigError(f"must be an integer >= 1, got {self.repetitions}", key="sweep.repetitions")
        object.__setattr__(self, "values", values)


def _cell(spec, scenario_spec, value, rep):
    seed = scenario_spec.seed + rep
    params = spec.params
    sspec = replace(scenario_spec, seed=seed)
    if spec.axis is Axis.ALPHA:
        params = replace(params, alpha=float(value))
    elif spec.axis is Axis.PRICE:
        params = replace(params, price=float(value))
    else:
        value = int(value)
        sspec = replace(sspec, n_devices=value, n_cellular=min(sspec.n_cellular, value))
    scenario = generate_scenario(sspec)
    result = run_to_convergence(scenario, params, get_rule(spec.rule))
    return metrics_row(result, params, spec.axis.value, value, rep, seed)


def run_sweep(spec, scenario_spec, n_jobs=1):
    """One :class:`MetricsRow` per (axis value, repetition).

    Repetition ``r`` uses seed ``scenario_spec.seed + r`` at every axis
    value, so all values see the same drops. Rows come back ordered by
    (axis value, repetition) whatever ``n_jobs`` is.
    """
    get_rule(spec.rule)
    cells = [(v, r) for v in spec.values for r in range(spec.repetitions)]
    rows = Parallel(n_jobs=n_jobs)(delayed(_cell)(spec, scenario_spec, v, r) for v, r in cells)
    return sorted(rows, key=lambda row: (row.axis_value, row.repetition))


@dataclass(frozen=True)
class CompareRow:
    rule: str
    mean_power_w: float
    iterations: float
    mean_sinr: float
    converged_fraction: float


def compare_rules(rule_names, scenario_spec, params, repetitions=1):
    """Run every rule on the same seeded drops and average the outcomes.

    ``mean_power_w`` is the per-device mean power averaged over drops and
    ``iterations`` the mean iteration count.
    """
    rules = [get_rule(name) for name in rule_names]
    scenarios = [generate_scenario(replace(scenario_spec, seed=scenario_spec.seed + r)) for r in range(repetitions)]
    rows = []
    for name, rule in zip(rule_names, rules):
        results = [run_to_convergence(s, params, rule) for s in scenarios]
        rows.append(
            CompareRow(
                rule=name,
                mean_power_w=float(np.mean([r.mean_power for r in results])),
                iterations=float(np.mean([r.iterations_used for r in results])),
                mean_sinr=float(np.mean([r.mean_sinr for r in results])),
                converged_fraction=float(np.mean([r.converged for r in results])),
            )
        )
    return rows
