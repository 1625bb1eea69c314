"""Reference power-control rules and the name-keyed rule registry."""
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_power_vector
from .exceptions import ConfigError, ContractViolation, RegistrationError
from .game import UtilityKind, update_priced, update_unpriced
from .model import EPS_POWER, interference_all, sinr_all

# Names kept free for rules whose update formulas are not available here.
RESERVED_NAMES = frozenset({"norm2", "hyperbolic", "ref11"})


@dataclass(frozen=True)
class UpdateRule:
    """A named map ``(scenario, params, p) -> p``.

    ``options`` are passed to ``func`` as keyword arguments on every call.
    """

    name: str
    func: object
    utility_kind: UtilityKind = UtilityKind.BASE
    options: dict = field(default_factory=dict)

    def __call__(self, scenario, params, p):
        return self.func(scenario, params, p, **self.options)


def rule_cdpc(scenario, target, p):
    """Constrained distributed power control, ``min(p_max, (target / gamma) * p)``."""
    p = check_power_vector(p, scenario.n, positive=True)
    gamma = sinr_all(scenario, p)
    return np.clip((target / gamma) * p, EPS_POWER, scenario.p_max)


def rule_koskie_gajic(scenario, target, b, c_kg, p):
    """Best response to the cost ``b * (target - gamma_i)^2 + c_kg * p_i``.

    ``p_i' = target * I_i / h_i - c_kg * I_i^2 / (2 b h_i^2)``, clamped.
    """
    if not b > 0:
        raise ContractViolation(f"utility weight b must be > 0, got {b}")
    if not c_kg >= 0:
        raise ContractViolation(f"price c_kg must be >= 0, got {c_kg}")
    p = check_power_vector(p, scenario.n, positive=True)
    r = interference_all(scenario, p) / scenario.direct_gains
    raw = target * r - c_kg * r * r / (2.0 * b)
    return np.clip(raw, EPS_POWER, scenario.p_max)


def _cdpc(scenario, params, p):
    return rule_cdpc(scenario, params.target, p)


def _koskie_gajic(scenario, params, p, b=1.0, c_kg=None):
    return rule_koskie_gajic(scenario, params.target, b, params.price if c_kg is None else c_kg, p)


_REGISTRY = {}


def register_rule(name, rule, utility_kind=UtilityKind.BASE, **options):
    """Make ``rule`` retrievable by ``name``.

    ``rule`` may be an :class:`UpdateRule` or a plain callable
    ``(scenario, params, p, **options) -> p``.
    """
    if name in _REGISTRY:
        raise RegistrationError(f"rule {name!r} is already registered")
    if not isinstance(rule, UpdateRule):
        rule = UpdateRule(name, rule, utility_kind, dict(options))
    elif rule.name != name:
        rule = UpdateRule(name, rule.func, rule.utility_kind, dict(rule.options))
    _REGISTRY[name] = rule
    return rule


def unregister_rule(name):
    _REGISTRY.pop(name, None)


def list_rules():
    return sorted(_REGISTRY)


def get_rule(name):
    if isinstance(name, UpdateRule):
        return name
    try:
        return _REGISTRY[name]
    except KeyError:
        if name in RESERVED_NAMES:
            msg = f"rule {name!r} is reserved but not implemented; register it first"
        else:
            msg = f"unknown rule {name!r}; registered rules: {', '.join(list_rules())}"
        raise ConfigError(msg, key="rule") from None


register_rule("unpriced", update_unpriced, UtilityKind.BASE)
register_rule("priced", update_priced, UtilityKind.PRICED)
register_rule("cdpc", _cdpc, UtilityKind.BASE)
register_rule("koskie-gajic", _koskie_gajic, UtilityKind.PRICED)
