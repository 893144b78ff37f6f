"""
Tests for schemas, CSV ingestion, encoding and the synthetic benchmarks
"""

import numpy as np
import pandas as pd
import pytest

from dpgan.data import (
    CATEGORICAL, CONTINUOUS, GAUSSIAN_RANGE, Column, EncodedDataset, Schema, balanced_split,
    check_encoding, decode, encode, feature_matrix, hexagon_centers, label_codes, load_csv,
    load_schema, make_gaussian_mixture, make_timeseries, timeseries_schema, write_csv, write_schema,
)
from dpgan.errors import ConfigError, DataError, SchemaError


@pytest.fixture
def toy_schema(test_data_dir):
    return load_schema(test_data_dir / 'toy.schema')


@pytest.fixture
def toy_table(test_data_dir, toy_schema):
    return load_csv(test_data_dir / 'toy.csv', toy_schema)


def _write(path, text):
    path.write_text(text, encoding='utf-8')
    return path


def test_schema_file_parses(toy_schema):
    assert toy_schema.names == ['age', 'hours', 'workclass', 'income']
    assert toy_schema.column('age') == Column('age', CONTINUOUS, minimum=17.0, maximum=90.0)
    assert toy_schema.column('income').levels == ('<=50K', '>50K')
    assert toy_schema.width == 1 + 1 + 3 + 2
    assert toy_schema.width_map['workclass'] == (2, 5)
    assert Schema.from_lines(toy_schema.to_lines()) == toy_schema


def test_schema_errors_name_the_line():
    with pytest.raises(SchemaError, match="line 2"):
        Schema.from_lines(['a,continuous,0,1', 'b,continuous,oops,1'])
    with pytest.raises(SchemaError, match="line 1"):
        Schema.from_lines(['a,histogram,0,1'])
    with pytest.raises(SchemaError, match="Duplicate"):
        Schema.from_lines(['a,continuous,0,1', 'a,categorical,x|y'])
    with pytest.raises(SchemaError, match="min"):
        Schema.from_lines(['a,continuous,1,1'])
    with pytest.raises(SchemaError, match="at least 2 levels"):
        Schema.from_lines(['a,categorical,x'])
    with pytest.raises(SchemaError, match="no columns"):
        Schema.from_lines(['# only a comment', ''])


def test_missing_schema_file(tmp_path):
    with pytest.raises(DataError, match="Schema file not found"):
        load_schema(tmp_path / 'absent.schema')


def test_load_csv_types_cells(toy_table):
    assert len(toy_table) == 30
    assert toy_table['age'].dtype == np.float64
    assert toy_table.loc[0, 'workclass'] == 'public'
    assert (toy_table['income'] == '>50K').sum() == 11


@pytest.mark.parametrize('row, fragment', [
    ('39,40,federal,<=50K', "row 1, column 'workclass': unknown level 'federal'"),
    ('39,forty,public,<=50K', "row 1, column 'hours': cannot parse number 'forty'"),
    ('39,120,public,<=50K', "row 1, column 'hours': value 120.0 outside [1.0, 99.0]"),
    ('39,,public,<=50K', "row 1, column 'hours'"),
])
def test_load_csv_reports_row_and_column(tmp_path, toy_schema, row, fragment):
    path = _write(tmp_path / 'bad.csv', f"age,hours,workclass,income\n{row}\n")
    with pytest.raises(DataError) as excinfo:
        load_csv(path, toy_schema)
    assert fragment in str(excinfo.value)


def test_load_csv_header_problems(tmp_path, toy_schema):
    with pytest.raises(DataError, match="do not match"):
        load_csv(_write(tmp_path / 'cols.csv', "age,hours,income\n39,40,<=50K\n"), toy_schema)
    with pytest.raises(DataError, match="empty"):
        load_csv(_write(tmp_path / 'empty.csv', ""), toy_schema)
    with pytest.raises(DataError, match="not found"):
        load_csv(tmp_path / 'absent.csv', toy_schema)
    header_only = load_csv(_write(tmp_path / 'header.csv', "age,hours,workclass,income\n"), toy_schema)
    assert len(header_only) == 0
    assert encode(header_only, toy_schema).rows.shape == (0, 7)


def test_encode_normalises_and_one_hots(toy_table, toy_schema):
    dataset = encode(toy_table, toy_schema)
    assert dataset.rows.shape == (30, 7)
    # first row: age 39, hours 40, public, <=50K
    np.testing.assert_allclose(dataset.rows[0, :2], [2 * 22 / 73 - 1, 2 * 39 / 98 - 1])
    np.testing.assert_array_equal(dataset.rows[0, 2:], [0, 1, 0, 1, 0])
    check_encoding(dataset)

    restored = decode(dataset)
    np.testing.assert_allclose(restored['age'], toy_table['age'], rtol=1e-12)
    assert list(restored['workclass']) == list(toy_table['workclass'])


def test_encoding_bounds(toy_schema):
    table = pd.DataFrame({'age': [17.0, 90.0], 'hours': [1.0, 99.0], 'workclass': ['self', 'private'],
                          'income': ['>50K', '<=50K']})
    rows = encode(table, toy_schema).rows
    np.testing.assert_array_equal(rows[:, :2], [[-1.0, -1.0], [1.0, 1.0]])


def test_check_encoding_rejects_broken_rows(toy_table, toy_schema):
    dataset = encode(toy_table, toy_schema)
    dataset.rows[3, 2:5] = [1.0, 1.0, 0.0]
    with pytest.raises(DataError, match="row 3"):
        check_encoding(dataset)
    out_of_range = EncodedDataset(np.full((1, 7), 0.0), toy_schema)
    out_of_range.rows[0, 0] = 1.5
    with pytest.raises(DataError, match="age"):
        check_encoding(out_of_range)


def test_feature_matrix_drops_label(toy_table, toy_schema):
    X, y = feature_matrix(toy_table, toy_schema, 'income')
    assert X.shape == (30, 5)
    np.testing.assert_array_equal(y, label_codes(toy_table, toy_schema, 'income'))
    assert y.sum() == 11
    with pytest.raises(SchemaError):
        label_codes(toy_table, toy_schema, 'age')


def test_balanced_split(toy_table):
    train, test = balanced_split(toy_table, 'income', 0.3, seed=0)
    # 11 rows in the minority class: round(3.3) = 3 per class in test, 8 in train
    assert (test['income'] == '>50K').sum() == (test['income'] == '<=50K').sum() == 3
    assert (train['income'] == '>50K').sum() == (train['income'] == '<=50K').sum() == 8
    again, _ = balanced_split(toy_table, 'income', 0.3, seed=0)
    pd.testing.assert_frame_equal(train, again)
    with pytest.raises(ConfigError):
        balanced_split(toy_table, 'income', 1.0, seed=0)
    with pytest.raises(DataError, match="binary"):
        balanced_split(toy_table, 'workclass', 0.3, seed=0)


def test_write_csv_round_trips_through_load(tmp_path, toy_table, toy_schema):
    path = write_csv(toy_table, tmp_path / 'out' / 'copy.csv', toy_schema)
    schema_path = write_schema(toy_schema, tmp_path / 'out' / 'copy.schema')
    pd.testing.assert_frame_equal(load_csv(path, load_schema(schema_path)), toy_table)


def test_gaussian_mixture():
    table = make_gaussian_mixture(100, seed=3)
    counts = table['component'].value_counts()
    assert set(counts) <= {16, 17}
    assert table[['x', 'y']].abs().to_numpy().max() <= GAUSSIAN_RANGE
    centers = hexagon_centers()
    for k in range(6):
        points = table.loc[table['component'] == f"c{k}", ['x', 'y']].to_numpy()
        assert np.linalg.norm(points.mean(axis=0) - centers[k]) < 0.1
    pd.testing.assert_frame_equal(table, make_gaussian_mixture(100, seed=3))
    with pytest.raises(ConfigError):
        make_gaussian_mixture(5, seed=0)


def test_timeseries():
    schema = timeseries_schema(length=24, n_regions=3)
    table = make_timeseries(40, length=24, seed=2, n_regions=3)
    assert list(table.columns) == schema.csv_columns
    values = table[schema.column('consumption').csv_names].to_numpy()
    assert values.min() == pytest.approx(-1.0)
    assert values.max() == pytest.approx(1.0)
    assert set(table['region']) <= {'r0', 'r1', 'r2'}
    assert schema.column('region').kind == CATEGORICAL
    encode(table, schema)
    with pytest.raises(ConfigError):
        make_timeseries(10, length=1)
