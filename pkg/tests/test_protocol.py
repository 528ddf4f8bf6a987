import math

import numpy as np
import pytest

from repeater_sched import linkstats
from repeater_sched.analysis import ultimate_bound_from_distance
from repeater_sched.linkstats import LinkCountDistribution, binomial_distribution
from repeater_sched.protocol import (
    BudgetError,
    ChainParams,
    FthPolicy,
    ManualPolicy,
    SkrPolicy,
    compute_skr,
    decide_fth,
    decide_skr_rule,
    initial_link_state,
    parse_policy,
    run_protocol,
)
from repeater_sched.states import BellDiagonalState, dejmps_step, dephase, swap_states

import oracles


def make_params(**overrides) -> ChainParams:
    base = dict(
        segments=4,
        multiplexing=64,
        coupling_eff=0.9,
        gate_error=1e-3,
        total_distance_m=100_000.0,
    )
    base.update(overrides)
    return ChainParams(**base)


# ---------------------------------------------------------------------------
# ChainParams


def test_params_reject_non_powers_of_two():
    with pytest.raises(ValueError):
        make_params(segments=3)
    with pytest.raises(ValueError):
        make_params(multiplexing=100)


def test_params_budget_and_slots():
    params = make_params(segments=8, multiplexing=512)
    assert params.levels == 3
    assert params.schedule_slots == 4
    assert params.budget == 9
    assert params.segment_length_m == pytest.approx(12_500.0)


# ---------------------------------------------------------------------------
# Initial state


def test_initial_state_examples():
    assert initial_link_state(make_params(gate_error=0.0)) == BellDiagonalState.perfect()
    assert initial_link_state(make_params(gate_error=1e-3)).fidelity() == pytest.approx(0.99875)
    assert initial_link_state(make_params(gate_error=1e-4)).fidelity() == pytest.approx(0.999875)


def test_initial_state_rejects_high_gate_error():
    with pytest.raises(ValueError):
        initial_link_state(make_params(gate_error=0.5))


# ---------------------------------------------------------------------------
# SKR formula


def test_skr_perfect_state_full_links():
    p = LinkCountDistribution.point_mass(64)
    assert compute_skr(p, BellDiagonalState.perfect(), 64) == pytest.approx(1.0)


def test_skr_vanishes_at_half_error():
    state = BellDiagonalState(0.25, 0.25, 0.25, 0.25)  # e_z = e_x = 1/2
    p = LinkCountDistribution.point_mass(64)
    assert compute_skr(p, state, 64) == 0.0


def test_skr_werner_value():
    state = BellDiagonalState.werner(0.95)
    p = LinkCountDistribution.point_mass(64)
    e = 2.0 / 60.0
    h2 = -e * math.log2(e) - (1 - e) * math.log2(1 - e)
    assert compute_skr(p, state, 64) == pytest.approx(1.0 - 2.0 * h2, abs=1e-12)


# ---------------------------------------------------------------------------
# Local decision rules


def test_fth_rule_examples():
    assert decide_fth(BellDiagonalState.werner(0.99), 0.95, remaining_budget=5) == 0
    assert decide_fth(BellDiagonalState.werner(0.90), 0.95, remaining_budget=5) == 1
    assert decide_fth(BellDiagonalState.werner(0.90), 0.95, remaining_budget=0) == 0


def test_skr_rule_skips_perfect_state():
    params = make_params(gate_error=0.0)
    p = binomial_distribution(64, 0.4)
    assert decide_skr_rule(p, BellDiagonalState.perfect(), params, remaining_budget=5) == 0


def test_skr_rule_skips_empty_distribution():
    params = make_params()
    p = LinkCountDistribution.point_mass(0, 64)
    state = BellDiagonalState.werner(0.8)
    assert decide_skr_rule(p, state, params, remaining_budget=5) == 0


def test_skr_rule_flips_across_crossover():
    # Scan Werner fidelities at a fixed link distribution; the rule must
    # fire exactly where the one-step SKR comparison does.
    params = make_params(gate_error=0.0)
    p = binomial_distribution(64, 0.9)
    flips = []
    for fidelity in np.linspace(0.55, 0.99, 45):
        state = BellDiagonalState.werner(float(fidelity))
        decision = decide_skr_rule(p, state, params, remaining_budget=5)
        current = compute_skr(p, state, params.multiplexing)
        out_state, success = dejmps_step(state, params.noise())
        improved = compute_skr(
            linkstats.distill_thin(p, success), out_state, params.multiplexing
        )
        assert decision == (1 if improved > current else 0)
        flips.append(decision)
    assert 1 in flips and 0 in flips  # the crossover exists in this range


# ---------------------------------------------------------------------------
# run_protocol


def test_budget_violation_rejected():
    params = make_params(segments=4, multiplexing=64)  # budget 6, slots 3
    with pytest.raises(BudgetError):
        run_protocol(params, ManualPolicy((3, 3, 1)))


def test_wrong_schedule_length_rejected():
    with pytest.raises(ValueError):
        run_protocol(make_params(), ManualPolicy((0, 0)))


def test_noiseless_short_chain_value():
    # Two perfect segments at negligible distance: the pair state stays
    # perfect (secret fraction 1) and the expected end-to-end link count
    # is E[min(X, Y)] with X, Y ~ Binomial(M, 1/2) from the analyzer's
    # intrinsic 1/2 success factor.
    m = 128
    params = make_params(
        segments=2, multiplexing=m, coupling_eff=1.0, gate_error=0.0, total_distance_m=0.0
    )
    result = run_protocol(params, ManualPolicy((0, 0)))
    pmf = oracles.exact_binomial_pmf(m, 0.5)
    expected_min = sum(
        min(i, j) * pmf[i] * pmf[j] for i in range(m + 1) for j in range(m + 1)
    )
    assert result.skr == pytest.approx(expected_min / m, rel=1e-10)
    assert result.trace[-1].post_fidelity == 1.0


def test_matches_straight_line_reimplementation():
    for schedule in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (2, 1, 1)]:
        params = make_params(segments=4, multiplexing=512, coupling_eff=0.3)
        got = run_protocol(params, ManualPolicy(schedule)).skr
        want = oracles.straight_line_n4(params, schedule)
        assert got == want  # same primitive calls, same order, bit-identical


def test_determinism_bit_identical():
    params = make_params(segments=8, multiplexing=128)
    first = run_protocol(params, SkrPolicy())
    second = run_protocol(params, SkrPolicy())
    assert first == second


def test_policy_schedule_equivalence():
    params = make_params(segments=8, multiplexing=128, coupling_eff=0.5)
    for policy in (FthPolicy(0.95), FthPolicy(0.99), SkrPolicy()):
        ld = run_protocol(params, policy)
        replay = run_protocol(params, ManualPolicy(ld.schedule))
        assert replay.skr == ld.skr
        assert replay.trace == ld.trace


def test_executed_schedule_respects_budget():
    params = make_params(segments=256, multiplexing=4, gate_error=5e-3)
    for policy in (FthPolicy(0.999), SkrPolicy()):
        result = run_protocol(params, policy)
        assert sum(result.schedule) <= params.budget


def test_noiseless_distillation_never_helps():
    # With perfect gates and no decoherence the pair state is already
    # perfect, so any distillation only halves the link count.
    params = make_params(
        segments=4,
        multiplexing=64,
        coupling_eff=0.8,
        gate_error=0.0,
        total_distance_m=40_000.0,
        coherence_time_s=math.inf,
    )
    baseline = run_protocol(params, ManualPolicy((0, 0, 0))).skr
    for schedule in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (2, 0, 1)]:
        assert run_protocol(params, ManualPolicy(schedule)).skr <= baseline + 1e-15


def test_skr_within_unit_interval_and_capacity():
    rng = np.random.default_rng(11)
    for _ in range(12):
        params = make_params(
            segments=int(2 ** rng.integers(1, 5)),
            multiplexing=int(2 ** rng.integers(2, 8)),
            coupling_eff=float(rng.uniform(0.2, 1.0)),
            gate_error=float(rng.choice([0.0, 1e-4, 1e-3])),
            total_distance_m=float(rng.uniform(1e4, 2e6)),
        )
        schedule = tuple(
            int(v) for v in rng.integers(0, 2, size=params.schedule_slots)
        )
        if sum(schedule) > params.budget:
            schedule = (0,) * params.schedule_slots
        result = run_protocol(params, ManualPolicy(schedule))
        assert 0.0 <= result.skr <= 1.0
        assert result.skr <= ultimate_bound_from_distance(
            params.total_distance_m, params.attenuation_m, params.segments - 1
        )


def test_trace_replays_step_by_step():
    params = make_params(segments=8, multiplexing=256, coupling_eff=0.4)
    result = run_protocol(params, ManualPolicy((1, 0, 2, 0)))
    noise = params.noise()
    rho = initial_link_state(params)
    p = binomial_distribution(
        params.multiplexing,
        linkstats.link_success_probability(
            params.coupling_eff, params.segment_length_m, params.attenuation_m
        ),
    )
    for stage, record in enumerate(result.trace):
        assert record.pre_fidelity == rho.fidelity()
        for step in range(record.steps):
            rho, success = dejmps_step(rho, noise)
            assert record.step_success_probs[step] == success
            p = linkstats.distill_thin(p, success)
        assert record.post_fidelity == rho.fidelity()
        if stage < params.levels:
            rho = swap_states(rho, rho, noise)
            p = linkstats.min_combine(p, p)
            rho = dephase(rho, params.segment_length_m * 2**stage, noise)
        assert record.expected_links == linkstats.expectation(p)
        assert record.stage_skr == compute_skr(p, rho, params.multiplexing)
    assert result.skr == compute_skr(p, rho, params.multiplexing)


def test_trace_has_one_record_per_stage():
    params = make_params(segments=16, multiplexing=64)
    result = run_protocol(params, SkrPolicy())
    assert len(result.trace) == params.schedule_slots == 5
    assert [r.level for r in result.trace] == [0, 1, 2, 3, 4]


# ---------------------------------------------------------------------------
# Policy parsing


def test_parse_policy_round_trip():
    assert parse_policy("skr") == SkrPolicy()
    assert parse_policy("fth:0.95") == FthPolicy(0.95)
    assert parse_policy("manual:0,1,0") == ManualPolicy((0, 1, 0))
    with pytest.raises(ValueError):
        parse_policy("bogus")
    with pytest.raises(ValueError):
        parse_policy("fth:")
