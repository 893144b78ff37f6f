#!/usr/bin/env python3
"""
Convert the raw UCI adult or mushrooms files into schema-conformant CSVs

The raw files have no header row. adult.data / adult.test use ", " separators
and mark missing cells with '?'; the test file also ends labels with '.'.
agaricus-lepiota.data uses single-letter codes.

Usage:
    python scripts/prepare_uci.py --dataset adult --raw adult.data --out data/adult.csv
    python scripts/prepare_uci.py --dataset mushrooms --raw agaricus-lepiota.data --out data/mushrooms.csv
"""

import sys
import argparse
from pathlib import Path

import pandas as pd

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from dpgan.data import CATEGORICAL, load_schema, validate_table, write_csv, write_schema
from dpgan.errors import DpganError
from dpgan.settings import configure_logging

SCHEMA_DIR = PROJECT_ROOT / 'data' / 'schemas'

ADULT_COLUMNS = [
    'age', 'workclass', 'fnlwgt', 'education', 'education_num', 'marital_status', 'occupation',
    'relationship', 'race', 'sex', 'capital_gain', 'capital_loss', 'hours_per_week', 'native_country',
    'income',
]

MUSHROOM_COLUMNS = [
    'class', 'cap_shape', 'cap_surface', 'cap_color', 'bruises', 'odor', 'gill_attachment', 'gill_spacing',
    'gill_size', 'gill_color', 'stalk_shape', 'stalk_root', 'stalk_surface_above_ring',
    'stalk_surface_below_ring', 'stalk_color_above_ring', 'stalk_color_below_ring', 'veil_type', 'veil_color',
    'ring_number', 'ring_type', 'spore_print_color', 'population', 'habitat',
]


def read_adult(path, schema):
    raw = pd.read_csv(
        path, header=None, names=ADULT_COLUMNS, dtype=str, skipinitialspace=True,
        comment='|', keep_default_na=False,
    )
    raw['income'] = raw['income'].str.rstrip('.')
    kept = raw[schema.csv_columns]
    complete = ~(kept == '?').any(axis=1)
    print(f"  Dropped {int((~complete).sum())} rows with missing cells")
    return kept[complete].reset_index(drop=True)


def read_mushrooms(path, schema):
    raw = pd.read_csv(path, header=None, names=MUSHROOM_COLUMNS, dtype=str, keep_default_na=False)
    return raw[schema.csv_columns]


READERS = {'adult': read_adult, 'mushrooms': read_mushrooms}


def main():
    parser = argparse.ArgumentParser(description='Prepare a UCI dataset for dpgan')
    parser.add_argument('--dataset', choices=sorted(READERS), required=True)
    parser.add_argument('--raw', required=True, help='Raw UCI data file')
    parser.add_argument('--out', required=True, help='Output CSV path')
    args = parser.parse_args()
    configure_logging()

    print("=" * 80)
    print(f"Prepare UCI {args.dataset}")
    print("=" * 80)
    print(f"Raw file: {args.raw}")
    print(f"Output:   {args.out}")
    print("=" * 80)
    print()

    schema = load_schema(SCHEMA_DIR / f"{args.dataset}.schema")
    try:
        table = READERS[args.dataset](args.raw, schema)
        table = validate_table(table, schema, source=str(args.raw))
    except (DpganError, OSError, pd.errors.ParserError) as e:
        print(f"  ✗ {e}")
        sys.exit(1)

    csv_path = write_csv(table, args.out, schema)
    schema_path = write_schema(schema, Path(args.out).with_suffix('.schema'))
    print(f"  ✓ {len(table)} rows written to {csv_path}")
    print(f"  ✓ Schema written to {schema_path}")
    for column in schema.columns:
        if column.kind == CATEGORICAL and column.name in ('income', 'class'):
            counts = table[column.name].value_counts()
            print(f"  Label balance: {dict(counts)}")
    print("=" * 80)


if __name__ == "__main__":
    main()
