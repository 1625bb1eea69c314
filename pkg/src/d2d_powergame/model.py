"""Physical layer: devices, link gains, interference and SINR.

Gains are held as an ``n x n`` matrix ``G`` where ``G[i, j]`` is the gain
from transmitter ``j`` to the receiver of device ``i``; the diagonal holds
each device's own link gain. A 1-D gain vector ``h`` describes the
single-receiver uplink (every device heard by the base station), which is
the matrix ``G[i, j] = h[j]``.
"""
from dataclasses import dataclass, field
import enum

import numpy as np

from ._validation import check_index, check_positive, check_power_vector
from .exceptions import ContractViolation

#: Lower clamp applied by every update rule so powers stay strictly positive.
EPS_POWER = 1e-18
#: Default receiver noise power in watts.
DEFAULT_NOISE_POWER = 5e-15
#: Default per-device power cap in watts.
DEFAULT_P_MAX = 100e-3


class DeviceKind(enum.Enum):
    CELLULAR = "cellular"
    D2D_PAIR = "d2d"


@dataclass(frozen=True)
class Device:
    id: int
    kind: DeviceKind = DeviceKind.D2D_PAIR
    position: tuple = (0.0, 0.0)
    receiver: tuple = None


@dataclass(frozen=True, eq=False)
class NetworkScenario:
    """Immutable description of one cell.

    Parameters
    ----------
    devices : sequence of Device
        Device ids must be ``0..n-1`` in order.
    gains : array-like
        Either a length-``n`` vector of link gains to a shared receiver, or
        an ``n x n`` cross-gain matrix (row = receiver, column = transmitter).
    noise_power : float
        Receiver noise power in watts.
    p_max : float
        Per-device transmit power cap in watts.
    """

    devices: tuple
    gains: np.ndarray
    noise_power: float = DEFAULT_NOISE_POWER
    p_max: float = DEFAULT_P_MAX
    gain_matrix: np.ndarray = field(init=False, repr=False)
    _cross: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        devices = tuple(self.devices)
        n = len(devices)
        if n < 1:
            raise ContractViolation("a scenario needs at least one device")
        if [d.id for d in devices] != list(range(n)):
            raise ContractViolation("device ids must be unique and contiguous from 0")
        g = np.array(self.gains, dtype=np.float64)
        if g.ndim == 1:
            if g.shape[0] != n:
                raise ContractViolation(f"expected {n} gains, got {g.shape[0]}")
            matrix = np.tile(g, (n, 1))
        elif g.ndim == 2 and g.shape == (n, n):
            matrix = g
        else:
            raise ContractViolation(f"gains must have shape ({n},) or ({n}, {n}), got {g.shape}")
        if not np.all(np.isfinite(matrix)) or np.any(np.diag(matrix) <= 0) or np.any(matrix < 0):
            raise ContractViolation("gains must be finite, with positive direct gains")
        noise = check_positive(self.noise_power, "noise_power")
        p_max = check_positive(self.p_max, "p_max")
        cross = matrix.copy()
        np.fill_diagonal(cross, 0.0)
        for arr in (g, matrix, cross):
            arr.setflags(write=False)
        object.__setattr__(self, "devices", devices)
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "noise_power", noise)
        object.__setattr__(self, "p_max", p_max)
        object.__setattr__(self, "gain_matrix", matrix)
        object.__setattr__(self, "_cross", cross)

    @classmethod
    def from_gains(cls, gains, noise_power=DEFAULT_NOISE_POWER, p_max=DEFAULT_P_MAX, kinds=None):
        """Build a scenario from gains alone, with placeholder device records."""
        n = np.shape(gains)[0]
        kinds = kinds or [DeviceKind.D2D_PAIR] * n
        devices = tuple(Device(i, kinds[i]) for i in range(n))
        return cls(devices, gains, noise_power, p_max)

    @property
    def n(self):
        return len(self.devices)

    @property
    def direct_gains(self):
        """Own-link gain ``h_i`` of every device."""
        return np.diag(self.gain_matrix)


def interference_all(scenario, p):
    """Interference-plus-noise at every receiver, ``sigma^2 + sum_{j != i} G[i, j] p_j``."""
    p = check_power_vector(p, scenario.n, positive=False)
    # Zeroed diagonal keeps I_i bit-identical under changes of p_i.
    return scenario.noise_power + scenario._cross @ p


def interference(scenario, p, i):
    i = check_index(i, scenario.n)
    return float(interference_all(scenario, p)[i])


def sinr_all(scenario, p):
    """SINR of every device, ``p_i h_i / I_i``."""
    p = check_power_vector(p, scenario.n, positive=False)
    return p * scenario.direct_gains / interference_all(scenario, p)


def sinr(scenario, p, i):
    i = check_index(i, scenario.n)
    return float(sinr_all(scenario, p)[i])


def normalized_cross_gains(scenario):
    """Matrix ``G[i, j] / G[i, i]`` with a zero diagonal."""
    return scenario._cross / scenario.direct_gains[:, None]


def spectral_radius(scenario, target):
    """Perron root of ``target * normalized_cross_gains``; below 1 iff the
    SINR target is reachable without a power cap."""
    if scenario.n == 1:
        return 0.0
    m = target * normalized_cross_gains(scenario)
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def fixed_point_powers(scenario, target):
    """Minimal power vector giving every device SINR exactly ``target``.

    Solves ``(I - target * F) p = target * sigma^2 / h`` directly. Returns
    ``None`` when the target is unreachable at any power level.
    """
    target = check_positive(target, "target")
    if spectral_radius(scenario, target) >= 1.0:
        return None
    n = scenario.n
    lhs = np.eye(n) - target * normalized_cross_gains(scenario)
    rhs = target * scenario.noise_power / scenario.direct_gains
    return np.linalg.solve(lhs, rhs)


def is_feasible(scenario, target):
    """True when every device can reach ``target`` with power below the cap."""
    p = fixed_point_powers(scenario, target)
    return p is not None and bool(np.all(p > 0)) and bool(np.all(p <= scenario.p_max))
