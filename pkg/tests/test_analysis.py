import math

import numpy as np
import pytest

from repeater_sched.analysis import (
    OMITTED,
    UNDEFINED_LD_ZERO,
    SweepGrid,
    bounds_rows,
    curves_by_point,
    curves_rows,
    default_policies,
    log_spaced_distances,
    min_n_table,
    minimal_advantage_n,
    plateau_ratio,
    plateau_stats,
    plateau_table,
    plob_bound,
    run_sweep,
    ultimate_bound,
    ultimate_bound_from_distance,
)
from repeater_sched.defaults import DEFAULT_SEED, model_constants
from repeater_sched.optimizer import SearchConfig
from repeater_sched.protocol import ManualPolicy, run_protocol
from repeater_sched.store import ResultsStore, config_hash


# ---------------------------------------------------------------------------
# Bounds


def test_plob_examples():
    assert plob_bound(0.5) == pytest.approx(1.0, abs=1e-15)
    assert plob_bound(0.0) == 0.0
    assert plob_bound(0.75) == pytest.approx(2.0, abs=1e-15)
    assert plob_bound(1.0) == math.inf


def test_ultimate_reduces_to_plob_without_repeaters():
    for eta in np.linspace(0.0, 0.999, 60):
        assert ultimate_bound(float(eta), 0) == pytest.approx(
            plob_bound(float(eta)), abs=1e-12
        )


def test_ultimate_single_repeater_value():
    want = -math.log2(1.0 - math.sqrt(0.5))
    assert ultimate_bound(0.5, 1) == pytest.approx(want, abs=1e-12)


def test_ultimate_monotone_in_repeaters():
    for eta in (0.1, 0.5, 0.9):
        values = [ultimate_bound(eta, n) for n in range(6)]
        assert all(b > a for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# Plateau metrics


def curve(*skrs, start=1.0):
    return [(start * (i + 1), s) for i, s in enumerate(skrs)]


def test_plateau_constant_curve():
    stats = plateau_stats(curve(0.4, 0.4, 0.4))
    assert stats.plateau_mean == pytest.approx(0.4)
    assert len(stats.plateau_distances) == 3
    assert not stats.negligible


def test_plateau_drops_tail():
    stats = plateau_stats(curve(1.0, 0.95, 0.5))
    assert stats.plateau_mean == pytest.approx(0.975)
    assert stats.plateau_distances == (1.0, 2.0)


def test_plateau_single_point():
    stats = plateau_stats(curve(0.2))
    assert stats.plateau_mean == pytest.approx(0.2)
    assert stats.plateau_distances == (1.0,)


def test_plateau_all_zero_flagged():
    stats = plateau_stats(curve(0.0, 0.0))
    assert stats.negligible
    assert stats.plateau_mean == 0.0


def test_ratio_identical_curves():
    c = curve(0.5, 0.45, 0.1)
    result = plateau_ratio(c, c)
    assert result.ratio == pytest.approx(1.0)
    assert result.flag is None


def test_ratio_constant_curves():
    result = plateau_ratio(curve(0.2, 0.2), curve(0.1, 0.1))
    assert result.ratio == pytest.approx(2.0)


def test_ratio_undefined_when_ld_zero():
    result = plateau_ratio(curve(0.2, 0.2), curve(0.0, 0.0))
    assert result.flag == UNDEFINED_LD_ZERO
    assert result.ratio is None


def test_ratio_omitted_when_both_zero():
    result = plateau_ratio(curve(0.0, 0.0), curve(0.0, 0.0))
    assert result.flag == OMITTED


def test_ratio_requires_same_grid():
    with pytest.raises(ValueError):
        plateau_ratio(curve(0.1, 0.1), [(5.0, 0.1), (6.0, 0.1)])


def test_minimal_advantage_n():
    from repeater_sched.analysis import PlateauRatio

    no_adv = {4: PlateauRatio(1.0, None, 1, 1), 8: PlateauRatio(0.9, None, 1, 1)}
    assert minimal_advantage_n(no_adv) is None
    some = {4: PlateauRatio(1.0, None, 1, 1), 8: PlateauRatio(1.2, None, 1, 1)}
    assert minimal_advantage_n(some) == 8
    undefined = {
        4: PlateauRatio(None, OMITTED, 0, 0),
        4096: PlateauRatio(None, UNDEFINED_LD_ZERO, 1, 0),
    }
    assert minimal_advantage_n(undefined) == 4096


# ---------------------------------------------------------------------------
# Sweeps


def small_grid() -> SweepGrid:
    return SweepGrid(
        n_values=(4,),
        m_values=(64,),
        coupling_values=(1.0,),
        gate_error_values=(1e-3,),
        distances_m=log_spaced_distances(1e4, 1e6, 5),
    )


def make_store(tmp_path, grid, policies, config, seed=DEFAULT_SEED, name="store"):
    setup = {
        "grid": grid.to_dict(),
        "policies": list(policies),
        "search": {
            "samples": config.samples,
            "include_ld_candidates": config.include_ld_candidates,
            "max_steps_per_level": config.max_steps_per_level,
            "fth_grid": list(config.fth_grid),
        },
        "seed": seed,
    }
    manifest = dict(setup, grid_hash=config_hash(setup), model_constants=model_constants())
    return ResultsStore.create(tmp_path / name, manifest)


def test_sweep_record_counts_and_replay(tmp_path):
    grid = small_grid()
    policies = default_policies()
    config = SearchConfig(samples=25, seed=DEFAULT_SEED)
    store = make_store(tmp_path, grid, policies, config)
    summary = run_sweep(grid, policies, config, store, workers=1)
    # 5 distances x (gd + 3 fth + skr)
    assert summary["new_records"] == 25
    records = store.records()
    assert len(records) == 25

    for record in records:
        replay = run_protocol(record.chain_params(), ManualPolicy(record.schedule))
        assert replay.skr == record.skr


def test_sweep_resume_is_idempotent(tmp_path):
    grid = small_grid()
    policies = default_policies()
    config = SearchConfig(samples=10, seed=DEFAULT_SEED)
    store = make_store(tmp_path, grid, policies, config)
    run_sweep(grid, policies, config, store, workers=1)
    before = store.records_path.read_bytes()
    summary = run_sweep(grid, policies, config, store, workers=1)
    assert summary["new_records"] == 0
    assert store.records_path.read_bytes() == before


def test_sweep_gd_dominates_ld_records(tmp_path):
    grid = small_grid()
    policies = default_policies()
    config = SearchConfig(samples=40, seed=DEFAULT_SEED)
    store = make_store(tmp_path, grid, policies, config)
    run_sweep(grid, policies, config, store, workers=1)
    by_key = {}
    for rec in store.records():
        by_key.setdefault(rec.key[:5], {})[rec.policy] = rec.skr
    for point, skrs in by_key.items():
        for label, skr in skrs.items():
            if label != "gd":
                assert skrs["gd"] >= skr


def test_sweep_tables(tmp_path):
    grid = small_grid()
    policies = default_policies()
    config = SearchConfig(samples=20, seed=DEFAULT_SEED)
    store = make_store(tmp_path, grid, policies, config)
    run_sweep(grid, policies, config, store, workers=1)
    records = store.records()

    grouped = curves_by_point(records)
    assert len(grouped) == 1
    point_curves = next(iter(grouped.values()))
    assert set(point_curves) == {"gd", "fth:0.9", "fth:0.95", "fth:0.99", "skr"}

    plateau = plateau_table(records)
    assert {row["rule"] for row in plateau} == {"fth", "skr"}
    for row in plateau:
        if row["flag"] is None:
            assert row["ratio"] >= 1.0  # GD dominates by construction

    min_n = min_n_table(records)
    assert len(min_n) == 2

    rows = curves_rows(records)
    assert len(rows) == len(records)

    brows = bounds_rows(records)
    assert len(brows) == len(grid.distances_m)
    for row in brows:
        assert row["ultimate"] >= 0.0


def test_sweep_records_stay_below_capacity(tmp_path):
    grid = small_grid()
    policies = default_policies()
    config = SearchConfig(samples=15, seed=DEFAULT_SEED)
    store = make_store(tmp_path, grid, policies, config)
    run_sweep(grid, policies, config, store, workers=1)
    for rec in store.records():
        assert rec.skr <= ultimate_bound_from_distance(
            rec.total_distance_m, rec.attenuation_m, rec.segments - 1
        )


def test_grid_round_trip():
    grid = small_grid()
    assert SweepGrid.from_dict(grid.to_dict()) == grid


def test_worker_count_env_cap(monkeypatch):
    from repeater_sched.analysis import worker_count
    from repeater_sched.defaults import THREADS_ENV_VAR

    monkeypatch.setenv(THREADS_ENV_VAR, "3")
    assert worker_count() == 3
    monkeypatch.delenv(THREADS_ENV_VAR)
    assert worker_count() >= 1
