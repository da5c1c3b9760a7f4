import csv
import io

import pytest

from tsbroadcast.errors import ConfigError
from tsbroadcast.sweep import (
    RESULT_FIELDS,
    ResultRow,
    Settings,
    emit_csv,
    format_csv,
    parse_config,
    parse_pairs,
    plan_runs,
    read_pairs,
    run_one,
    run_sweep,
)


def spec_from(text):
    return parse_pairs(read_pairs(text))


def test_minimal_config_gets_defaults(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("# smallest useful config\nalgorithm = tss\nn_nodes = 400\n")
    spec = parse_config(path)
    assert spec.base == Settings()
    assert spec.points() == [Settings()]


@pytest.mark.parametrize("text,key", [
    ("loss_prob = 1.3", "loss_prob"),
    ("algorithm = gossip", "algorithm"),
    ("n_nodes = many", "n_nodes"),
    ("colour = red", "colour"),
    ("mobility = teleport", "mobility"),
    ("vary = alpha", "vary"),
])
def test_bad_values_name_the_key(text, key):
    with pytest.raises(ConfigError, match=key):
        spec_from(text)


def test_syntax_errors(tmp_path):
    with pytest.raises(ConfigError):
        spec_from("just some words")
    with pytest.raises(ConfigError):
        spec_from("seed = 1\nseed = 2")
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.cfg")


def test_loss_sweep_points():
    spec = spec_from("n_nodes = 700\nvary = loss_prob\nvalues = 0,0.05,0.1,0.15,0.2,0.25")
    assert [p.loss_prob for p in spec.points()] == [0, 0.05, 0.1, 0.15, 0.2, 0.25]


def test_run_ids_follow_value_order():
    a = spec_from("vary = n_nodes\nvalues = 400,200\nrepetitions = 2\nseed = 10")
    b = spec_from("vary = n_nodes\nvalues = 200,400\nrepetitions = 2\nseed = 10")
    assert plan_runs(a) == plan_runs(b)
    assert [(s.n_nodes, rid, seed) for s, rid, seed in plan_runs(a)] == [
        (200, 0, 10), (200, 1, 11), (400, 2, 12), (400, 3, 13)]


def test_sweep_csv_is_deterministic():
    spec = spec_from("n_nodes = 200\nvary = loss_prob\nvalues = 0,0.1\nrepetitions = 2\nseed = 3")
    first = format_csv(run_sweep(spec))
    second = format_csv(run_sweep(spec))
    assert first == second
    assert first.count("\n") == 5 and "\r" not in first


def test_csv_round_trip(tmp_path):
    spec = spec_from("n_nodes = 200\nseed = 4")
    rows = run_sweep(spec)
    path = tmp_path / "out.csv"
    emit_csv(rows, path)
    back = list(csv.DictReader(io.StringIO(path.read_text())))
    assert list(back[0]) == list(RESULT_FIELDS)
    assert int(back[0]["tx_count"]) == rows[0].tx_count
    assert float(back[0]["coverage_fraction"]) == pytest.approx(rows[0].coverage_fraction, rel=1e-6)


def test_csv_shapes():
    assert format_csv([]) == ",".join(RESULT_FIELDS) + "\n"
    row = ResultRow(0, 0, "tss", 1, 25.0, 1, "static", 0.0, 0.0, 0.0)
    assert format_csv([row]).count("\n") == 2


def test_failed_session_recorded():
    s = Settings(n_nodes=20, max_attempts=2)
    row, result = run_one(s, 0, 0)
    assert result is None and row.error.startswith("NotConnectedError")
    assert row.tx_count == -1


def test_mobile_row_reports_speed():
    s = Settings(n_nodes=100, mobility="gmmm", mean_speed=20, warmup=10)
    row, result = run_one(s, 0, 1)
    assert row.error == "" and row.mean_speed == 20 and row.mobility_model == "gmmm"
