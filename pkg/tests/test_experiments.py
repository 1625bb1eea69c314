from dataclasses import replace

import numpy as np
import pytest

from d2d_powergame.baselines import get_rule
from d2d_powergame.exceptions import ConfigError
from d2d_powergame.experiments import (
    Axis,
    GainModel,
    ScenarioSpec,
    SweepSpec,
    admissions_over_iterations,
    admitted_count,
    compare_rules,
    generate_scenario,
    metrics_row,
    run_sweep,
)
from d2d_powergame.game import GameParams, run_to_convergence
from d2d_powergame.model import DeviceKind, is_feasible

FEASIBLE = ScenarioSpec(feasible_for=5.0)


def test_generation_is_deterministic():
    a = generate_scenario(ScenarioSpec(seed=7))
    b = generate_scenario(ScenarioSpec(seed=7))
    np.testing.assert_array_equal(a.gain_matrix, b.gain_matrix)
    assert a.devices == b.devices
    assert not np.array_equal(a.gain_matrix, generate_scenario(ScenarioSpec(seed=8)).gain_matrix)


def test_explicit_passthrough():
    spec = ScenarioSpec(n_devices=3, gain_model=GainModel.EXPLICIT, gains=(0.1, 0.2, 0.3), noise_power=1e-9)
    s = generate_scenario(spec)
    np.testing.assert_array_equal(s.direct_gains, [0.1, 0.2, 0.3])
    assert s.noise_power == 1e-9


def test_gains_in_unit_interval_over_seeds():
    for seed in range(100):
        s = generate_scenario(ScenarioSpec(seed=seed))
        assert s.n == 20
        assert np.all(np.isfinite(s.gain_matrix))
        assert np.all((s.gain_matrix > 0) & (s.gain_matrix <= 1.0))


def test_device_layout():
    s = generate_scenario(ScenarioSpec(seed=3, n_cellular=2))
    kinds = [d.kind for d in s.devices]
    assert kinds[:2] == [DeviceKind.CELLULAR] * 2 and set(kinds[2:]) == {DeviceKind.D2D_PAIR}
    assert s.devices[0].receiver == (0.0, 0.0)
    for d in s.devices:
        assert np.hypot(*d.position) <= 500.0
        if d.kind is DeviceKind.D2D_PAIR:
            assert 2.0 <= np.hypot(*np.subtract(d.receiver, d.position)) <= 25.0


def test_feasibility_filter():
    for seed in range(20):
        assert is_feasible(generate_scenario(replace(FEASIBLE, seed=seed)), 5.0)


@pytest.mark.parametrize(
    "bad",
    [{"n_devices": 0}, {"cell_radius_m": 0.0}, {"path_loss_exponent": 7.0}, {"n_cellular": 30},
     {"gain_model": GainModel.EXPLICIT}],
)
def test_spec_invariants(bad):
    with pytest.raises(ConfigError):
        ScenarioSpec(**bad)


def test_admitted_all_on_feasible():
    s = generate_scenario(FEASIBLE)
    params = GameParams(price=0.0)
    res = run_to_convergence(s, params, get_rule("unpriced"))
    assert admitted_count(res, params) == s.n


def test_admitted_empty():
    assert admitted_count(None, GameParams()) == 0


def test_admitted_overloaded():
    # two users on one receiver: both reach gamma only if gamma < 1
    spec = ScenarioSpec(n_devices=2, gain_model=GainModel.EXPLICIT, gains=(1.0, 1.0), noise_power=1e-3)
    params = GameParams(target=2.0, price=0.0)
    res = run_to_convergence(generate_scenario(spec), params, get_rule("unpriced"))
    assert admitted_count(res, params) < 2


def test_admitted_monotone_in_target():
    s = generate_scenario(ScenarioSpec(seed=4))
    res = run_to_convergence(s, GameParams(), get_rule("priced"))
    counts = [admitted_count(res, GameParams(target=t)) for t in (0.5, 1, 2, 5, 10, 50)]
    assert all(b <= a for a, b in zip(counts, counts[1:]))


def test_admissions_over_iterations_length():
    s = generate_scenario(FEASIBLE)
    params = GameParams(price=0.0)
    res = run_to_convergence(s, params, get_rule("unpriced"))
    curve = admissions_over_iterations(res, params)
    assert len(curve) == res.iterations_used and curve[-1] == s.n


def test_sweep_spec_invariants():
    with pytest.raises(ConfigError):
        SweepSpec(values=())
    with pytest.raises(ConfigError):
        SweepSpec(values=(1.0, 1.0))
    with pytest.raises(ConfigError):
        SweepSpec(axis=Axis.DEVICE_COUNT, values=(2.5,))


def test_alpha_sweep_lowers_power():
    spec = SweepSpec(axis=Axis.ALPHA, values=(0.0, 0.02), rule="unpriced", repetitions=5,
                     params=GameParams(price=0.0))
    rows = run_sweep(spec, FEASIBLE)
    assert [(r.axis_value, r.repetition) for r in rows] == [(v, k) for v in (0.0, 0.02) for k in range(5)]
    p0 = np.mean([r.mean_power_w for r in rows if r.axis_value == 0.0])
    p1 = np.mean([r.mean_power_w for r in rows if r.axis_value == 0.02])
    it0 = np.mean([r.iterations for r in rows if r.axis_value == 0.0])
    it1 = np.mean([r.iterations for r in rows if r.axis_value == 0.02])
    assert p1 < p0 and it0 != it1


def test_alpha_sweep_power_non_increasing():
    spec = SweepSpec(axis=Axis.ALPHA, values=(0.0, 0.02, 0.5), rule="unpriced", repetitions=5,
                     params=GameParams(price=0.0))
    rows = run_sweep(spec, FEASIBLE)
    means = [np.mean([r.mean_power_w for r in rows if r.axis_value == v]) for v in spec.values]
    assert means[0] >= means[1] >= means[2]


def test_price_sweep_lowers_sinr():
    spec = SweepSpec(axis=Axis.PRICE, values=(0.0, 5100.0), rule="priced", repetitions=5)
    rows = run_sweep(spec, FEASIBLE)
    s0 = np.mean([r.mean_sinr for r in rows if r.axis_value == 0.0])
    s1 = np.mean([r.mean_sinr for r in rows if r.axis_value == 5100.0])
    assert s1 < s0


def test_degenerate_sweep_equals_direct_run():
    params = GameParams(alpha=0.02)
    spec = SweepSpec(axis=Axis.ALPHA, values=(0.02,), rule="priced", repetitions=1, params=params)
    (row,) = run_sweep(spec, replace(FEASIBLE, seed=11))
    res = run_to_convergence(generate_scenario(replace(FEASIBLE, seed=11)), params, get_rule("priced"))
    assert row == metrics_row(res, params, "alpha", 0.02, 0, 11)


def test_device_count_sweep():
    spec = SweepSpec(axis=Axis.DEVICE_COUNT, values=(2, 5, 10), rule="priced", repetitions=2)
    rows = run_sweep(spec, ScenarioSpec(seed=1))
    assert [r.axis_value for r in rows] == [2, 2, 5, 5, 10, 10]


def test_sweep_unknown_rule():
    with pytest.raises(ConfigError, match="missing-rule"):
        run_sweep(SweepSpec(rule="missing-rule"), FEASIBLE)


def test_sweep_parallel_matches_serial():
    spec = SweepSpec(axis=Axis.PRICE, values=(0.0, 100.0, 5100.0), repetitions=3)
    assert run_sweep(spec, FEASIBLE, n_jobs=1) == run_sweep(spec, FEASIBLE, n_jobs=2)


def test_compare_single_rule_equals_direct():
    params = GameParams()
    (row,) = compare_rules(["cdpc"], FEASIBLE, params)
    res = run_to_convergence(generate_scenario(FEASIBLE), params, get_rule("cdpc"))
    assert row.mean_power_w == res.mean_power and row.iterations == res.iterations_used


def test_compare_priced_below_cdpc():
    rows = compare_rules(["priced", "cdpc"], FEASIBLE, GameParams(), repetitions=5)
    assert [r.rule for r in rows] == ["priced", "cdpc"]
    assert rows[0].mean_power_w < rows[1].mean_power_w


def test_compare_unknown_rule():
    with pytest.raises(ConfigError):
        compare_rules(["priced", "norm2"], FEASIBLE, GameParams())
