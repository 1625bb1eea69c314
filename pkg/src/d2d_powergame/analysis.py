"""Numerical checks of the convergence machinery.

:func:`check_standard_function` samples power vectors and tests positivity,
monotonicity and scalability of an update map; :func:`jacobian_at`
evaluates the Jacobian of ``F(p) = f(p) - p`` by central differences and
tests it for non-singularity.
"""
from dataclasses import dataclass

import numpy as np

from ._validation import check_power_vector
from .baselines import get_rule
from .exceptions import ContractViolation, DivergenceError
from .model import EPS_POWER, interference_all, normalized_cross_gains

SCALING_FACTORS = (1.5, 2.0, 10.0)
#: Threshold on the row-scaled determinant.
SINGULAR_THRESHOLD = 1e-12
SAMPLE_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class Counterexample:
    condition: str
    powers: np.ndarray
    device: int
    scale: float = None
    other_powers: np.ndarray = None


@dataclass(frozen=True, eq=False)
class StandardFunctionReport:
    positivity_ok: bool
    monotonicity_ok: bool
    scalability_ok: bool
    counterexample: Counterexample = None
    samples: int = 0
    low_clamp_activations: int = 0
    high_clamp_activations: int = 0

    @property
    def ok(self):
        return self.positivity_ok and self.monotonicity_ok and self.scalability_ok


def sample_powers(rng, n, p_max, size):
    """Log-uniform powers on ``[1e-9, p_max]``, shape ``(size, n)``."""
    lo, hi = np.log(SAMPLE_FLOOR), np.log(p_max)
    return np.exp(rng.uniform(lo, hi, size=(size, n)))


def check_standard_function(scenario, params, rule, samples=1000, seed=0, scales=SCALING_FACTORS):
    """Probe ``rule`` for the three standard-interference-function properties.

    For each of ``samples`` random power vectors ``p`` (seeded, log-uniform
    over ``[1e-9, p_max]``) this checks

    * positivity: ``f(p) > 0``;
    * monotonicity: ``f(p) >= f(q)`` for a ``q <= p`` lowered on a random
      non-empty subset of devices;
    * scalability: ``f(s * p) < s * f(p)`` for every ``s`` in ``scales``.

    The first failure found is returned as the counterexample. Failures
    are data: nothing is raised.
    """
    if samples < 1:
        raise ContractViolation(f"samples must be >= 1, got {samples}")
    rule = get_rule(rule)
    rng = np.random.default_rng(seed)
    n = scenario.n
    draws = sample_powers(rng, n, scenario.p_max, samples)
    positivity = monotonicity = scalability = True
    witness = None
    low = high = 0

    for p in draws:
        fp = np.asarray(rule(scenario, params, p))
        low += int(np.count_nonzero(fp <= EPS_POWER))
        high += int(np.count_nonzero(fp >= scenario.p_max))

        bad = np.flatnonzero(~(fp > 0))
        if bad.size and positivity:
            positivity = False
            witness = witness or Counterexample("positivity", p, int(bad[0]))

        mask = rng.random(n) < 0.5
        mask[rng.integers(n)] = True
        q = np.where(mask, p * rng.uniform(0.01, 1.0, n), p)
        q = np.where(mask & (q >= p), np.nextafter(p, 0), q)
        fq = np.asarray(rule(scenario, params, q))
        bad = np.flatnonzero(fp < fq)
        if bad.size and monotonicity:
            monotonicity = False
            witness = witness or Counterexample("monotonicity", p, int(bad[0]), other_powers=q)

        for s in scales:
            fs = np.asarray(rule(scenario, params, s * p))
            bad = np.flatnonzero(~(fs < s * fp))
            if bad.size and scalability:
                scalability = False
                witness = witness or Counterexample("scalability", p, int(bad[0]), scale=float(s))

    return StandardFunctionReport(
        positivity_ok=positivity,
        monotonicity_ok=monotonicity,
        scalability_ok=scalability,
        counterexample=witness,
        samples=samples,
        low_clamp_activations=low,
        high_clamp_activations=high,
    )


@dataclass(frozen=True, eq=False)
class JacobianReport:
    matrix: np.ndarray
    determinant: float
    scaled_determinant: float
    nonsingular: bool

    @property
    def n(self):
        return self.matrix.shape[0]


def numeric_jacobian(func, p, h_step):
    """Central-difference Jacobian of ``func`` at ``p`` with relative step ``h_step``."""
    n = p.shape[0]
    jac = np.empty((n, n))
    for j in range(n):
        delta = h_step * p[j]
        up, down = p.copy(), p.copy()
        up[j] += delta
        down[j] -= delta
        jac[:, j] = (func(up) - func(down)) / (up[j] - down[j])
    return jac


def jacobian_at(scenario, params, p, h_step=1e-5, rule="unpriced"):
    """Jacobian of ``F(p) = f(p) - p`` where ``f`` is ``rule``.

    The determinant is taken after dividing each row by its largest
    absolute entry; the point is called non-singular when that scaled
    determinant exceeds ``1e-12`` in magnitude.
    """
    if not 0 < h_step <= 1e-2:
        raise ContractViolation(f"h_step must lie in (0, 1e-2], got {h_step}")
    p = check_power_vector(p, scenario.n, positive=True)
    rule = get_rule(rule)

    def residual(x):
        return np.asarray(rule(scenario, params, x)) - x

    jac = numeric_jacobian(residual, p, h_step)
    if not np.all(np.isfinite(jac)):
        raise DivergenceError("non-finite Jacobian entry")
    det = float(np.linalg.det(jac))
    row_scale = np.max(np.abs(jac), axis=1)
    row_scale[row_scale == 0] = 1.0
    scaled = float(np.linalg.det(jac / row_scale[:, None]))
    return JacobianReport(jac, det, scaled, abs(scaled) > SINGULAR_THRESHOLD)


def closed_form_jacobian(scenario, params, p, priced=False):
    """Analytic Jacobian of ``F(p) = f(p) - p`` for the unpriced or priced map.

    Each ``f_i`` depends on the other devices only through ``I_i``, so the
    diagonal is exactly ``-1`` and ``dF_i/dp_j = slope_i * G[i, j] / G[i, i]``,
    with ``slope_i = T`` unpriced and ``T + sign * price * I_i / h_i``
    priced. Rows where ``f_i`` sits on a clamp have no off-diagonal terms.
    """
    p = check_power_vector(p, scenario.n, positive=True)
    target = params.effective_target
    r = interference_all(scenario, p) / scenario.direct_gains
    if priced:
        slope = target + params.pricing_sign * params.price * r
        raw = target * r + params.pricing_sign * 0.5 * params.price * r * r
    else:
        slope = np.full(scenario.n, target)
        raw = target * r
    active = (raw > EPS_POWER) & (raw < scenario.p_max)
    jac = (slope * active)[:, None] * normalized_cross_gains(scenario)
    jac -= np.eye(scenario.n)
    return jac
