"""Utilities, fixed-point power updates, the iteration engine and NE checks.

Each device minimises the cost ``(T - gamma_i)^2`` (plus ``c * p_i`` when
priced), where ``T = target / (alpha * target + 1)`` is the shifted SINR
target. Setting the derivative with respect to ``p_i`` to zero gives the
fixed-point maps implemented by :func:`update_unpriced` and
:func:`update_priced`.
"""
from dataclasses import dataclass, field
import enum
import logging

import numpy as np

from ._validation import check_power_vector
from .exceptions import ContractViolation, DivergenceError
from .model import EPS_POWER, interference_all, sinr_all

logger = logging.getLogger(__name__)

#: Utility improvement below which a deviation does not count.
NE_TOLERANCE = 1e-9


class UtilityKind(enum.Enum):
    BASE = "base"
    PRICED = "priced"


@dataclass(frozen=True)
class GameParams:
    """Parameters shared by all players.

    ``pricing_sign`` selects the sign of the quadratic pricing term in the
    priced update: ``-1`` is the cost-minimising best response (default),
    ``+1`` the variant that raises power with price.
    """

    target: float = 5.0
    alpha: float = 0.0
    price: float = 5100.0
    tol: float = 1e-9
    max_iters: int = 5000
    initial_power: float = 8e-3
    pricing_sign: int = -1

    def __post_init__(self):
        if not self.target > 0:
            raise ContractViolation(f"target must be > 0, got {self.target}")
        if not 0 <= self.alpha < 1:
            raise ContractViolation(f"alpha must satisfy 0 <= alpha < 1, got {self.alpha}")
        if not self.price >= 0:
            raise ContractViolation(f"price must be >= 0, got {self.price}")
        if not self.tol > 0:
            raise ContractViolation(f"tol must be > 0, got {self.tol}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ContractViolation(f"max_iters must be an integer >= 1, got {self.max_iters}")
        if not self.initial_power > 0:
            raise ContractViolation(f"initial_power must be > 0, got {self.initial_power}")
        if self.pricing_sign not in (-1, 1):
            raise ContractViolation(f"pricing_sign must be -1 or 1, got {self.pricing_sign}")

    @property
    def effective_target(self):
        """SINR at which the unpriced cost vanishes, ``target / (alpha*target + 1)``."""
        return self.target / (self.alpha * self.target + 1.0)


@dataclass(frozen=True, eq=False)
class TraceRecord:
    k: int
    powers: np.ndarray
    sinrs: np.ndarray
    utilities: np.ndarray
    priced_out: np.ndarray


@dataclass(frozen=True, eq=False)
class RunResult:
    final_powers: np.ndarray
    final_sinrs: np.ndarray
    iterations_used: int
    converged: bool
    trace: list = field(default_factory=list)
    last_change: float = float("nan")
    rule_name: str = ""

    @property
    def mean_power(self):
        return float(np.mean(self.final_powers))

    @property
    def mean_sinr(self):
        return float(np.mean(self.final_sinrs))


def utility_base(params, gamma_i):
    """Squared distance of the SINR from the shifted target."""
    return (params.effective_target - np.asarray(gamma_i, dtype=np.float64)) ** 2


def utility_priced(params, gamma_i, p_i):
    """Base cost plus the linear power charge ``price * p_i``.

    Written as a cost to be minimised; with ``price == 0`` this is exactly
    :func:`utility_base`.
    """
    return utility_base(params, gamma_i) + params.price * np.asarray(p_i, dtype=np.float64)


def utilities(params, kind, gamma, p):
    if kind is UtilityKind.PRICED:
        return utility_priced(params, gamma, p)
    return utility_base(params, gamma)


def unpriced_step(p, gamma, effective_target):
    """Raw (unclamped) map ``T * p / gamma``.

    Evaluated as ``(T / gamma) * p`` so that ``alpha == 0`` reproduces the
    classical ``(target / gamma) * p`` update bit for bit.
    """
    return (effective_target / gamma) * p


def priced_step(p, gamma, effective_target, price, sign=-1):
    """Raw (unclamped) map ``T * r + sign * (price / 2) * r**2`` with ``r = p / gamma``."""
    r = p / gamma
    return unpriced_step(p, gamma, effective_target) + sign * (0.5 * price) * r * r


def _positive_state(scenario, p):
    p = check_power_vector(p, scenario.n, positive=True)
    gamma = sinr_all(scenario, p)
    return p, gamma


def update_unpriced(scenario, params, p):
    """One synchronous unpriced step, clamped to ``[EPS_POWER, p_max]``."""
    p, gamma = _positive_state(scenario, p)
    raw = unpriced_step(p, gamma, params.effective_target)
    return np.clip(raw, EPS_POWER, scenario.p_max)


def update_priced(scenario, params, p):
    """One synchronous priced step, clamped to ``[EPS_POWER, p_max]``.

    Devices whose raw update falls below ``EPS_POWER`` are priced out and
    sit at the lower clamp.
    """
    p, gamma = _positive_state(scenario, p)
    raw = priced_step(p, gamma, params.effective_target, params.price, params.pricing_sign)
    return np.clip(raw, EPS_POWER, scenario.p_max)


def _readonly(arr):
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def run_to_convergence(scenario, params, rule, p0=None):
    """Iterate ``rule`` synchronously from ``p0`` until powers settle.

    Stops when the largest per-device relative change drops below
    ``params.tol`` or after ``params.max_iters`` steps. ``rule`` is an
    :class:`~d2d_powergame.baselines.UpdateRule` or any callable
    ``(scenario, params, p) -> p``.

    Raises
    ------
    DivergenceError
        If the rule returns a non-finite power.
    """
    if p0 is None:
        p0 = np.full(scenario.n, params.initial_power)
    p = check_power_vector(p0, scenario.n, positive=True).copy()
    kind = getattr(rule, "utility_kind", UtilityKind.BASE)
    name = getattr(rule, "name", getattr(rule, "__name__", "custom"))

    trace = []
    converged = False
    change = float("nan")
    k = 0
    for k in range(1, int(params.max_iters) + 1):
        p_next = np.asarray(rule(scenario, params, p), dtype=np.float64)
        if p_next.shape != p.shape:
            raise ContractViolation(f"rule {name!r} returned shape {p_next.shape}")
        if not np.all(np.isfinite(p_next)):
            raise DivergenceError(f"rule {name!r} produced non-finite power at iteration {k}", iteration=k)
        if np.any(p_next <= 0):
            raise ContractViolation(f"rule {name!r} produced non-positive power at iteration {k}")
        change = float(np.max(np.abs(p_next - p) / p))
        gamma = sinr_all(scenario, p_next)
        trace.append(
            TraceRecord(
                k=k,
                powers=_readonly(p_next),
                sinrs=_readonly(gamma),
                utilities=_readonly(utilities(params, kind, gamma, p_next)),
                priced_out=np.asarray(p_next <= EPS_POWER),
            )
        )
        p = p_next
        if change < params.tol:
            converged = True
            break
    if not converged:
        logger.debug("rule %s hit max_iters=%d (last change %.3g)", name, params.max_iters, change)
    return RunResult(
        final_powers=_readonly(p),
        final_sinrs=_readonly(sinr_all(scenario, p)),
        iterations_used=k,
        converged=converged,
        trace=trace,
        last_change=change,
        rule_name=name,
    )


@dataclass(frozen=True)
class NashReport:
    is_equilibrium: bool
    worst_improvement: float
    device: int = None
    deviation_power: float = None
    current_power: float = None

    def __bool__(self):
        return self.is_equilibrium


def default_probe_grid(p_max, count=64):
    """``count`` log-spaced probe powers in ``(EPS_POWER, p_max]``."""
    return np.geomspace(EPS_POWER, p_max, count + 1)[1:]


def is_nash_equilibrium(scenario, params, kind, p, grid=None, tolerance=NE_TOLERANCE):
    """Search for a unilateral deviation that lowers some device's cost.

    Every device is probed at each power in ``grid`` (default: 64
    log-spaced points up to ``p_max``) with the others held fixed. Returns
    a :class:`NashReport`; ``is_equilibrium`` is false when some probe
    improves the cost by more than ``tolerance``, in which case the report
    names the device and the best probe found.
    """
    p = check_power_vector(p, scenario.n, positive=True)
    if grid is None:
        grid = default_probe_grid(scenario.p_max)
    elif np.ndim(grid) == 0:
        grid = default_probe_grid(scenario.p_max, int(grid))
    grid = np.asarray(grid, dtype=np.float64)

    interf = interference_all(scenario, p)
    h = scenario.direct_gains
    current = utilities(params, kind, p * h / interf, p)
    # rows: devices, columns: probe powers
    probe_gamma = grid[None, :] * (h / interf)[:, None]
    probe_cost = utilities(params, kind, probe_gamma, np.broadcast_to(grid, probe_gamma.shape))
    best = np.argmin(probe_cost, axis=1)
    gains = current - probe_cost[np.arange(scenario.n), best]
    worst = int(np.argmax(gains))
    improvement = float(gains[worst])
    if improvement > tolerance:
        return NashReport(False, improvement, worst, float(grid[best[worst]]), float(p[worst]))
    return NashReport(True, improvement)
