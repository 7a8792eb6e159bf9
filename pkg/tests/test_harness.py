"""
Load path, error metric, report and campaign tests
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from exceptions import InvalidParameterError, ZeroReferenceError
from fem.material import MaterialParams
from fem.solver import SolverSettings
from models import CampaignConfig, LoadPath, MethodConfig, MethodName, ReportRow
from services.analysis_service import (
    REPORT_COLUMNS,
    corrdim_report,
    eigenvalue_decay_report,
    error_metrics,
    format_report,
    read_report,
    write_csv,
    write_report,
)
from services.experiment_service import (
    ExperimentService,
    collect_snapshots,
    evaluate_cell,
    generate_load_paths,
    prepare_campaign,
    run_campaign,
    snapshot_set,
    unit_direction,
)
from tests.conftest import circle_points
from utils.helpers import RngStream


def test_unit_directions(rng):
    """Test sampled directions have unit Frobenius norm"""
    for _ in range(20):
        assert np.linalg.norm(unit_direction(rng)) == pytest.approx(1.0)


def test_increment_norms_within_bounds(rng):
    """Test every increment lies in [dH_lp - dH_ls, dH_lp + dH_ls]"""
    for path in generate_load_paths(5, rng, steps=10):
        previous = np.zeros((3, 3))
        for H in path.H_steps:
            norm = np.linalg.norm(H - previous)
            assert 0.015 - 1e-12 <= norm <= 0.045 + 1e-12
            previous = H


def test_straight_path_without_perturbation(rng):
    """Test dH_ls = 0 gives |H(n)| = 0.03 n along one direction"""
    path = generate_load_paths(1, rng, dH_ls=0.0, steps=10)[0]
    norms = np.linalg.norm(path.H_steps.reshape(10, -1), axis=1)
    np.testing.assert_allclose(norms, 0.03 * np.arange(1, 11))


def test_paths_are_deterministic():
    """Test equal seeds give equal paths and different seeds differ"""
    first = generate_load_paths(3, RngStream(42))
    second = generate_load_paths(3, RngStream(42))
    other = generate_load_paths(3, RngStream(43))
    assert all(np.array_equal(a.H_steps, b.H_steps) for a, b in zip(first, second))
    assert not np.array_equal(first[0].H_steps, other[0].H_steps)
    assert [p.id for p in first] == [0, 1, 2]


def test_load_path_dict_round_trip(rng):
    """Test the JSON form restores a path"""
    path = generate_load_paths(1, rng, steps=4)[0]
    restored = LoadPath.from_dict(path.to_dict())
    np.testing.assert_array_equal(restored.H_steps, path.H_steps)
    assert restored.steps == 4 and restored.dH_lp == path.dH_lp


def test_invalid_path_counts(rng):
    """Test zero paths or zero steps are rejected"""
    with pytest.raises(InvalidParameterError):
        generate_load_paths(0, rng)
    with pytest.raises(InvalidParameterError):
        generate_load_paths(2, rng, steps=0)


def test_error_metrics_examples():
    """Test exact, uniform 1% and mixed error cases"""
    reference = [np.array([1.0, 0.0]), np.array([0.0, 2.0])]
    assert error_metrics(reference, reference) == (0.0, 0.0)

    uniform = [1.01 * u for u in reference]
    mean, peak = error_metrics(uniform, reference)
    assert mean == pytest.approx(0.01) and peak == pytest.approx(0.01)

    refs = [np.array([1.0])] * 5
    roms = [np.array([1.05])] + [np.array([1.0 + 0.0025])] * 4
    mean, peak = error_metrics(roms, refs)
    assert mean == pytest.approx(0.012) and peak == pytest.approx(0.05)


def test_zero_reference_rejected():
    """Test a zero reference state has no relative error"""
    with pytest.raises(ZeroReferenceError):
        error_metrics([np.ones(3)], [np.zeros(3)])


def test_error_metrics_length_mismatch():
    """Test different solution counts are rejected"""
    with pytest.raises(InvalidParameterError):
        error_metrics([np.ones(2)], [np.ones(2), np.ones(2)])


def test_eigen_decay_rank_one():
    """Test a rank-one snapshot set carries all energy in the first mode"""
    U = np.outer(np.arange(1.0, 5.0), [0.0, 1.0, 2.0, 3.0])
    rows = eigenvalue_decay_report(U)
    assert len(rows) == 4 and rows[0]["index"] == 1
    assert rows[0]["cumulative_fraction"] == pytest.approx(1.0)
    assert all(row["eigenvalue"] == pytest.approx(0.0, abs=1e-10) for row in rows[1:])


def test_corrdim_report_rows():
    """Test each row carries the plateau estimate"""
    rows, plateau = corrdim_report(circle_points(200), grid_points=50)
    assert len(rows) == 51
    assert all(row["plateau"] == plateau for row in rows)
    assert 0.5 < plateau < 1.5


def test_snapshot_set_layout(training_data):
    """Test the zero column comes first and metadata follows path order"""
    snapshots = training_data.snapshots
    assert snapshots.count == 1 + sum(p.steps for p in training_data.paths)
    assert not snapshots.U[:, 0].any()
    assert snapshots.meta[0]["step"] == 0 and snapshots.meta[0]["path"] is None
    assert snapshots.meta[1] == {"path": 0, "step": 1, "H": training_data.paths[0].H_steps[0].tolist()}
    np.testing.assert_array_equal(snapshots.U[:, 4], training_data.references[1][0])


def test_snapshot_set_from_states():
    """Test hand-built states stack into columns"""
    paths = generate_load_paths(2, RngStream(1), steps=2)
    states = [[np.full(3, 1.0), np.full(3, 2.0)], [np.full(3, 3.0), np.full(3, 4.0)]]
    snapshots = snapshot_set(paths, states)
    np.testing.assert_array_equal(snapshots.U[0], [0.0, 1.0, 2.0, 3.0, 4.0])
    assert [m["path"] for m in snapshots.meta] == [None, 0, 0, 1, 1]


def test_collect_snapshots(porous_small, porous_pairing):
    """Test two single-step paths give the zero column plus their solutions"""
    paths = generate_load_paths(2, RngStream(5), steps=1)
    snapshots = collect_snapshots(
        paths,
        porous_small,
        porous_pairing,
        MaterialParams.from_youngs(1000.0, 0.2),
        SolverSettings(res_max=1e-8),
        threads=2,
    )
    assert snapshots.U.shape == (642, 3)
    assert snapshots.U[:, 1:].any()
    assert [m["path"] for m in snapshots.meta] == [None, 0, 1]


def test_csv_formatting(tmp_path):
    """Test column order, repr floats and nan cells"""
    path = write_csv(tmp_path / "rows.csv", [{"a": 0.1, "b": math.nan, "c": 3}], ["a", "b", "c"])
    assert path.read_text(encoding="utf-8") == "a,b,c\n0.1,nan,3\n"


def test_report_round_trip(tmp_path):
    """Test a written report reads back and formats as a table"""
    rows = [ReportRow(method="POD", d=4, E_mean_pct=0.5, E_max_pct=1.25, wall_s=0.1, converged_paths=3)]
    path = write_report(tmp_path / "report.csv", rows)
    read = read_report(path)
    assert list(read[0]) == REPORT_COLUMNS
    table = format_report(read).splitlines()
    assert table[0].split() == REPORT_COLUMNS
    assert table[1].split() == ["POD", "4", "0.5000", "1.2500", "0.1000", "3"]


def test_report_missing_columns(tmp_path):
    """Test a CSV without the report columns is rejected"""
    path = tmp_path / "bad.csv"
    path.write_text("method,d\nPOD,4\n", encoding="utf-8")
    with pytest.raises(InvalidParameterError):
        read_report(path)


@pytest.fixture(scope="module")
def campaign_result():
    config = CampaignConfig.model_validate(
        {
            "mesh": {"edge_length": 6.0, "divisions": 3, "pore_centers": [[3.0, 3.0, 3.0]], "pore_radius": 1.2},
            "paths": {"n_train": 2, "n_val": 1, "steps": 2, "seed": 42},
            "methods": [{"name": "pod", "d": [1, 4, 50]}],
            "solver": {"res_max": 1e-8, "max_iter": 25},
        }
    )
    context = prepare_campaign(config)
    return config, context, run_campaign(config, context=context)


def test_campaign_rows_and_order(campaign_result):
    """Test one row per (method, d) in configuration order"""
    _, context, report = campaign_result
    assert [(row.method, row.d) for row in report.rows] == [("POD", 1), ("POD", 4), ("POD", 50)]
    assert context.snapshots.count == 1 + 2 * 2
    assert len(context.paths) == 3


def test_campaign_training_paths_are_reproduced(campaign_result):
    """Test d equal to the training rank solves the training paths exactly"""
    config, context, report = campaign_result
    assert report.row("POD", 4).converged_paths == 3
    assert report.convergence["POD:4"] == [True, True, True]

    n_train = config.paths.n_train
    training = replace(
        context, paths=context.paths[:n_train], references=context.references[:n_train]
    )
    row, flags = evaluate_cell(training, config.methods[0], 4)
    assert flags == [True] * n_train
    assert row.E_max_pct < 1e-4
    assert report.row("POD", 1).E_mean_pct >= report.row("POD", 4).E_mean_pct


def test_campaign_records_failed_cell(campaign_result):
    """Test a dimension beyond the snapshot rank fails only its own cell"""
    _, _, report = campaign_result
    row = report.row("POD", 50)
    assert math.isnan(row.E_mean_pct)
    assert row.converged_paths == 0
    assert row.error.startswith("ERROR RANK_DEFICIENT")
    assert report.convergence["POD:50"] == [False, False, False]


def test_report_row_lookup(campaign_result):
    """Test asking for a missing cell fails"""
    _, _, report = campaign_result
    with pytest.raises(InvalidParameterError):
        report.row("LEM-local", 4)


def test_failed_paths_count_towards_wall_time(campaign_result):
    """Test time spent on paths that do not converge is part of wall_s"""
    config, context, _ = campaign_result
    starved = replace(context, settings=SolverSettings(res_max=1e-30, max_iterations=1))
    row, flags = evaluate_cell(starved, config.methods[0], 4)
    assert flags == [False, False, False]
    assert row.wall_s > 0.0
    assert row.error.startswith("ERROR NO_CONVERGENCE")


def test_zero_reference_fails_only_its_path(campaign_result):
    """Test a path whose reference vanishes is reported instead of stopping the cell"""
    config, context, _ = campaign_result
    references = list(context.references)
    references[2] = [np.zeros_like(u) for u in references[2]]
    row, flags = evaluate_cell(replace(context, references=references), config.methods[0], 4)
    assert flags == [True, True, False]
    assert row.converged_paths == 2
    assert math.isfinite(row.E_mean_pct)
    assert row.error.startswith("ERROR ZERO_REFERENCE")


def test_degenerate_neighbourhood_cell(campaign_result):
    """Test n_lin = d fails its cell with SingularNeighborhood and n_lin = d + 5 does not"""
    _, context, _ = campaign_result
    graph = {"rule": "symmetric-knn", "k": 3}
    degenerate = MethodConfig(name=MethodName.LEM, d=[2], n_lin=2, graph=graph)
    wide = MethodConfig(name=MethodName.LEM, d=[2], n_lin=7, graph=graph)

    row, flags = evaluate_cell(context, degenerate, 2)
    assert not any(flags)
    assert math.isnan(row.E_mean_pct)
    assert row.error.startswith("ERROR SINGULAR_NEIGHBORHOOD")

    row, flags = evaluate_cell(context, wide, 2)
    assert any(flags)
    assert math.isfinite(row.E_mean_pct)
    assert not (row.error or "").startswith("ERROR SINGULAR_NEIGHBORHOOD")


@pytest.mark.slow
def test_campaign_is_deterministic(campaign_result):
    """Test a rerun with the same configuration gives the same snapshots and rows"""
    config, context, report = campaign_result
    rerun_context = prepare_campaign(config)
    rerun = run_campaign(config, context=rerun_context)
    assert np.array_equal(rerun_context.snapshots.U, context.snapshots.U)
    assert [r.model_dump_json(exclude={"wall_s"}) for r in rerun.rows] == [
        r.model_dump_json(exclude={"wall_s"}) for r in report.rows
    ]
    assert rerun.convergence == report.convergence


def test_service_load_paths(campaign_dict):
    """Test the service draws n_train + n_val paths"""
    config = CampaignConfig.model_validate(campaign_dict)
    paths = ExperimentService().load_paths(config)
    assert len(paths) == 3 and paths[0].steps == 2


@pytest.mark.slow
def test_seed_study(campaign_dict):
    """Test one summary row per cell spanning every seed"""
    config = CampaignConfig.model_validate(campaign_dict)
    rows = ExperimentService().seed_study(config, [1, 2])
    assert [(row.method, row.d) for row in rows] == [("POD", 1), ("POD", 4)]
    for row in rows:
        assert row.seeds == [1, 2]
        assert row.E_mean_pct_min <= row.E_mean_pct_mean <= row.E_mean_pct_max
