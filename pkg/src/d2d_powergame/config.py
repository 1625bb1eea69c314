"""Flat, sectioned ``key = value`` configuration files.

Grammar, one statement per line::

    # comment                     (also allowed after a value)
    [game]                        (section header: prefixes later keys)
    alpha = 0.02                  -> game.alpha
    scenario.n_devices = 20       (dotted keys work anywhere)
    sweep.values = 0, 5100        (lists are comma separated)

Keys outside the schema, malformed values and invariant violations raise
:class:`~d2d_powergame.exceptions.ConfigError` naming the key and line.
"""
from dataclasses import dataclass, field, fields, replace

from .exceptions import ConfigError, ContractViolation
from .experiments import Axis, GainModel, ScenarioSpec, SweepSpec
from .game import GameParams

OUTPUT_FORMATS = ("csv", "text")


def _bool(text):
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _optional_float(text):
    return None if text.lower() == "none" else float(text)


def _list(conv):
    def parse(text):
        return tuple(conv(item.strip()) for item in text.split(",") if item.strip())

    return parse


def _choice(options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text

    return parse


def _check(pred, message):
    def validate(value):
        if not pred(value):
            raise ValueError(message)

    return validate


# key -> (parser, validator or None)
SCHEMA = {
    "scenario.n_devices": (_int, _check(lambda v: v >= 1, "n_devices must be >= 1")),
    "scenario.n_cellular": (_int, _check(lambda v: v >= 0, "n_cellular must be >= 0")),
    "scenario.cell_radius_m": (float, _check(lambda v: v > 0, "cell radius must be > 0")),
    "scenario.path_loss_exponent": (float, _check(lambda v: 2 <= v <= 6, "exponent must lie in [2, 6]")),
    "scenario.gain_model": (_choice([m.value for m in GainModel]), None),
    "scenario.gains": (_list(float), _check(lambda v: all(g > 0 for g in v), "gains must be > 0")),
    "scenario.noise_power": (float, _check(lambda v: v > 0, "noise power must be > 0")),
    "scenario.p_max": (float, _check(lambda v: v > 0, "p_max must be > 0")),
    "scenario.seed": (_int, None),
    "scenario.d2d_min_m": (float, _check(lambda v: v > 0, "d2d_min_m must be > 0")),
    "scenario.d2d_max_m": (float, _check(lambda v: v > 0, "d2d_max_m must be > 0")),
    "scenario.feasible_for": (_optional_float, _check(lambda v: v is None or v > 0, "must be > 0 or none")),
    "game.target": (float, _check(lambda v: v > 0, "target must be > 0")),
    "game.alpha": (float, _check(lambda v: 0 <= v < 1, "alpha must satisfy 0 <= alpha < 1")),
    "game.price": (float, _check(lambda v: v >= 0, "price must be >= 0")),
    "game.tol": (float, _check(lambda v: v > 0, "tol must be > 0")),
    "game.max_iters": (_int, _check(lambda v: v >= 1, "max_iters must be >= 1")),
    "game.initial_power": (float, _check(lambda v: v > 0, "initial power must be > 0")),
    "game.pricing_sign": (_int, _check(lambda v: v in (-1, 1), "pricing_sign must be -1 or 1")),
    "rule": (str, _check(bool, "rule name must be non-empty")),
    "sweep.axis": (_choice([a.value for a in Axis]), None),
    "sweep.values": (_list(float), _check(bool, "sweep values must be non-empty")),
    "sweep.repetitions": (_int, _check(lambda v: v >= 1, "repetitions must be >= 1")),
    "sweep.n_jobs": (_int, _check(lambda v: v != 0, "n_jobs must be non-zero")),
    "compare.rules": (_list(str), _check(bool, "need at least one rule")),
    "compare.repetitions": (_int, _check(lambda v: v >= 1, "repetitions must be >= 1")),
    "check.samples": (_int, _check(lambda v: v >= 1, "samples must be >= 1")),
    "check.h_step": (float, _check(lambda v: 0 < v <= 1e-2, "h_step must lie in (0, 1e-2]")),
    "output.dir": (str, None),
    "output.format": (_choice(OUTPUT_FORMATS), None),
}


@dataclass(frozen=True)
class Config:
    scenario: ScenarioSpec = ScenarioSpec()
    game: GameParams = GameParams()
    rule: str = "priced"
    sweep: SweepSpec = SweepSpec()
    sweep_n_jobs: int = 1
    compare_rules: tuple = ("priced", "cdpc")
    compare_repetitions: int = 20
    check_samples: int = 1000
    check_h_step: float = 1e-5
    output_dir: str = "."
    output_format: str = "csv"
    explicit_keys: frozenset = field(default=frozenset(), compare=False)


def _split_line(raw):
    text = raw.split("#", 1)[0].strip()
    return text


def parse_config(text):
    """Parse configuration text into a validated :class:`Config`.

    Omitted keys keep their defaults: target 5, 20 devices, 8 mW initial
    power, 100 mW cap, price 5100, alpha 0.
    """
    values, lines = {}, {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _split_line(raw)
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section or section not in {k.split(".")[0] for k in SCHEMA if "." in k}:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if section and "." not in key and f"{section}.{key}" in SCHEMA:
            key = f"{section}.{key}"
        if key not in SCHEMA:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in values:
            raise ConfigError("duplicate key", key=key, line=lineno)
        parser, validator = SCHEMA[key]
        try:
            parsed = parser(value)
            if validator is not None:
                validator(parsed)
        except ValueError as exc:
            raise ConfigError(str(exc), key=key, line=lineno) from None
        values[key] = parsed
        lines[key] = lineno
    return build_config(values, lines)


def build_config(values, lines=None):
    lines = lines or {}

    def group(prefix):
        return {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith(prefix + ".")}

    try:
        scen = group("scenario")
        if "gain_model" in scen:
            scen["gain_model"] = GainModel(scen["gain_model"])
        if "gains" in scen and "n_devices" not in scen:
            scen["n_devices"] = len(scen["gains"])
        scenario = ScenarioSpec(**scen)
        game = GameParams(**group("game"))
        rule = values.get("rule", Config.rule)
        sw = group("sweep")
        n_jobs = sw.pop("n_jobs", 1)
        if "axis" in sw:
            sw["axis"] = Axis(sw["axis"])
        sweep = SweepSpec(rule=rule, params=game, **sw)
        cmp = group("compare")
        chk = group("check")
        out = group("output")
        return Config(
            scenario=scenario,
            game=game,
            rule=rule,
            sweep=sweep,
            sweep_n_jobs=n_jobs,
            compare_rules=cmp.get("rules", Config.compare_rules),
            compare_repetitions=cmp.get("repetitions", Config.compare_repetitions),
            check_samples=chk.get("samples", Config.check_samples),
            check_h_step=chk.get("h_step", Config.check_h_step),
            output_dir=out.get("dir", Config.output_dir),
            output_format=out.get("format", Config.output_format),
            explicit_keys=frozenset(values),
        )
    except ConfigError as exc:
        key = exc.key
        raise ConfigError(str(exc).split(": ", 1)[-1], key=key, line=lines.get(key)) from None
    except (ContractViolation, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    if value is None:
        return "none"
    return str(value)


def serialize_config(config):
    """Render ``config`` in the grammar accepted by :func:`parse_config`."""
    out = ["[scenario]"]
    for f in fields(ScenarioSpec):
        if f.name == "max_redraws":
            continue
        value = getattr(config.scenario, f.name)
        if f.name == "gains":
            if value is None:
                continue
            if len(value) and isinstance(value[0], (tuple, list)):
                raise ConfigError("gain matrices cannot be written as config", key="scenario.gains")
        if isinstance(value, GainModel):
            value = value.value
        out.append(f"{f.name} = {_fmt(value)}")
    out.append("")
    out.append("[game]")
    for f in fields(GameParams):
        out.append(f"{f.name} = {_fmt(getattr(config.game, f.name))}")
    out += [
        "",
        f"rule = {config.rule}",
        "",
        "[sweep]",
        f"axis = {config.sweep.axis.value}",
        f"values = {_fmt(tuple(float(v) for v in config.sweep.values))}",
        f"repetitions = {config.sweep.repetitions}",
        f"n_jobs = {config.sweep_n_jobs}",
        "",
        "[compare]",
        f"rules = {_fmt(tuple(config.compare_rules))}",
        f"repetitions = {config.compare_repetitions}",
        "",
        "[check]",
        f"samples = {config.check_samples}",
        f"h_step = {_fmt(config.check_h_step)}",
        "",
        "[output]",
        f"dir = {config.output_dir}",
        f"format = {config.output_format}",
    ]
    return "\n".join(out) + "\n"


def with_seed(config, seed):
    """Copy of ``config`` with the scenario seed replaced."""
    return replace(config, scenario=replace(config.scenario, seed=int(seed)))
