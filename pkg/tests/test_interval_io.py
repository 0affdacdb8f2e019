import json
import math
from pathlib import Path

import numpy as np
import pytest

from datasets import REFERENCE_SETS, reference_table, load_reference_set
from errors import ConfigError, DatasetParseError, InvalidParameterError, ParseError, TypeNotSupportedError
from interval_io import (
    IntervalTable,
    Report,
    dump_study_config,
    format_interval_csv,
    from_bivariate_sample,
    input_digest,
    load_interval_file,
    load_study_config,
    parse_interval_csv,
    parse_study_config,
    read_interval_csv,
    study_config_from_flat,
    to_bivariate_sample,
    to_multivariate_sample,
    write_interval_csv,
    write_report,
)
from simulator import GenerationLevel

STUDIES = Path(__file__).parent.parent / "studies"


@pytest.mark.parametrize("k", sorted(REFERENCE_SETS))
def test_embedded_sets_roundtrip_exactly(k):
    table = reference_table(k)
    again = parse_interval_csv(format_interval_csv(table))
    assert again.variables == ("X", "Y")
    assert np.array_equal(again.lower, table.lower)
    assert np.array_equal(again.upper, table.upper)
    assert to_bivariate_sample(again) == load_reference_set(k)


def test_awkward_floats_roundtrip_exactly():
    lower = np.array([[0.1, 1 / 3], [-2.5e-17, 123456789.123456789]])
    table = IntervalTable(("A", "B"), lower, lower + np.array([[0.2, math.pi], [1e-300, 0.0]]))
    again = parse_interval_csv(format_interval_csv(table))
    assert np.array_equal(again.lower, table.lower)
    assert np.array_equal(again.upper, table.upper)


def test_malformed_number_names_row_and_column():
    with pytest.raises(DatasetParseError, match="Row 1, column X_hi"):
        parse_interval_csv("X_lo,X_hi,Y_lo,Y_hi\n1,abc,3,4\n")


def test_reversed_bounds_name_row():
    with pytest.raises(DatasetParseError, match="Row 2"):
        parse_interval_csv("X_lo,X_hi,Y_lo,Y_hi\n1,2,3,4\n5,4,3,4\n")


def test_missing_value():
    with pytest.raises(DatasetParseError, match="missing value"):
        parse_interval_csv("X_lo,X_hi,Y_lo,Y_hi\n1,2,,4\n")


def test_bad_header():
    with pytest.raises(DatasetParseError):
        parse_interval_csv("X_lo,X_high,Y_lo,Y_hi\n1,2,3,4\n")
    with pytest.raises(DatasetParseError):
        parse_interval_csv("X_lo,X_hi,X_mode,Y_lo,Y_hi\n1,2,1,3,4\n")


def test_modes_and_ids():
    text = "id,X_lo,X_hi,X_mode,Y_lo,Y_hi,Y_mode\na,0,6,1,0,6,\nb,1,2,1.5,3,4,3.5\n"
    table = parse_interval_csv(text)
    assert table.ids == ("a", "b")
    assert math.isnan(table.modes[0, 1])
    sample = to_bivariate_sample(table)
    assert sample.observations[0].mode_x == 1
    assert sample.observations[0].mode_y is None
    assert format_interval_csv(table) == "id,X_lo,X_hi,X_mode,Y_lo,Y_hi,Y_mode\na,0.0,6.0,1.0,0.0,6.0,\nb,1.0,2.0,1.5,3.0,4.0,3.5\n"


def test_mode_outside_interval():
    with pytest.raises(DatasetParseError, match="X_mode"):
        parse_interval_csv("X_lo,X_hi,X_mode,Y_lo,Y_hi,Y_mode\n0,1,2,0,1,0.5\n")


def test_bivariate_needs_two_variables():
    table = parse_interval_csv("A_lo,A_hi,B_lo,B_hi,C_lo,C_hi\n0,1,0,1,0,1\n1,2,1,2,1,2\n")
    with pytest.raises(InvalidParameterError):
        to_bivariate_sample(table)
    assert to_multivariate_sample(table).p == 3


def test_from_bivariate_sample_keeps_modes():
    table = parse_interval_csv("X_lo,X_hi,X_mode,Y_lo,Y_hi,Y_mode\n0,2,1,0,2,1\n1,3,2,1,3,2\n")
    again = from_bivariate_sample(to_bivariate_sample(table))
    assert np.array_equal(again.modes, table.modes)


def test_load_interval_file_digest(tmp_path):
    path = tmp_path / "set1.csv"
    path.write_text(format_interval_csv(reference_table(1)))
    digest, table = load_interval_file(path)
    assert digest == input_digest(path.read_bytes())
    assert digest.startswith("sha256:")
    assert table.n == 3


def test_bundled_study_files():
    negative = load_study_config(STUDIES / "negative.yml")
    assert negative.params.sigma_xy == pytest.approx(-1.75)
    assert negative.sample_sizes == (50, 100, 500, 1000)
    assert negative.generation_level is GenerationLevel.THETA
    assert load_study_config(STUDIES / "positive.yml").params.gamma1 == 7
    assert load_study_config(STUDIES / "positive_effective.yml").params.gamma1 == 3.25


def test_study_config_errors():
    base = "mu_x: 0\nmu_y: 0\nsigma2_x: 1\nsigma2_y: 1\nrho: 0\ngamma1: 1\ngamma2: 1\ngamma3: 0\nsample_sizes: [10]\nseed: 1\n"
    assert parse_study_config("yml", base + "replications: 5\n").replications == 5
    with pytest.raises(InvalidParameterError):
        parse_study_config("yml", base + "replications: 0\n")
    with pytest.raises(ConfigError):
        parse_study_config("yml", base + "replications: 5\nworkerz: 2\n")
    with pytest.raises(ConfigError):
        parse_study_config("yml", "- just\n- a list\n")
    with pytest.raises(ParseError):
        parse_study_config("yml", "mu_x: [unclosed\n")
    with pytest.raises(TypeNotSupportedError):
        parse_study_config("toml", base)


def test_report_json(tmp_path):
    report = Report(command="estimate", version="0.1.0", results={"rho": math.nan, "value": 0.1 + 0.2})
    data = json.loads(report.to_json())
    assert data["results"]["rho"] is None
    assert data["results"]["value"] == 0.1 + 0.2

    first = write_report(report, tmp_path, "Estimate Set 1", "json")
    second = write_report(report, tmp_path, "Estimate Set 1", "json")
    assert first.name == "estimate_set_1.json"
    assert second.name == "estimate_set_1-1.json"
    csv = write_report(report, tmp_path, "estimate", "csv")
    assert csv.read_text().splitlines()[0] == "section,key,value"
    with pytest.raises(TypeNotSupportedError):
        write_report(report, tmp_path, "estimate", "xml")


def test_interval_file_roundtrip(tmp_path):
    table = parse_interval_csv("id,X_lo,X_hi,X_mode,Y_lo,Y_hi,Y_mode\na,0.1,0.7,0.3,-1,2,\nb,1e-9,3.5,1,2,2,2\n")
    path = write_interval_csv(table, tmp_path / "two.csv")
    again = read_interval_csv(path)
    assert again.ids == table.ids
    assert np.array_equal(again.lower, table.lower)
    assert np.array_equal(again.upper, table.upper)
    assert np.array_equal(again.modes, table.modes, equal_nan=True)


@pytest.mark.parametrize("name", ["negative.yml", "positive.yml", "positive_effective.yml"])
def test_dumped_study_config_loads_back(name):
    config = load_study_config(STUDIES / name)
    assert parse_study_config("yml", dump_study_config(config)) == config


def test_study_config_from_flat_wraps_field_errors():
    flat = load_study_config(STUDIES / "negative.yml").to_flat()
    with pytest.raises(ConfigError, match="seed"):
        study_config_from_flat({**flat, "seed": -1}, "options")
    assert study_config_from_flat({**flat, "seed": 3}, "options").seed == 3
