#!/usr/bin/env python

import json
import logging
import math
import sys
from dataclasses import dataclass

import numpy as np
import pandas as pd


class UstatconcError(RuntimeError):
    pass


class PreconditionError(UstatconcError):
    pass


class EnumerationCapError(UstatconcError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


def set_log_config(debug=None, info=None):
    """
    Route package records to stderr at the requested level; other libraries
    stay at WARNING. Repeated calls only move the package level.
    """
    if debug:
        lv = logging.DEBUG
    elif info:
        lv = logging.INFO
    else:
        lv = logging.WARNING
    logging.basicConfig(
        format='%(asctime)s %(levelname)-8s %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S', level=logging.WARNING
    )
    logging.getLogger(__package__).setLevel(lv)


def read_json(path):
    logger = logging.getLogger(__name__)
    logger.info(f'Read JSON data: {path}')
    with open(path, 'r') as f:
        return json.load(f)


def write_json(data, path, indent=2):
    logger = logging.getLogger(__name__)
    logger.info(f'Write JSON data: {path}')
    with open(path, 'w') as f:
        json.dump(to_jsonable(data), f, indent=indent)


def to_jsonable(data):
    if isinstance(data, dict):
        return {str(k): to_jsonable(v) for k, v in data.items()}
    elif isinstance(data, LargeValue):
        return to_jsonable(data.to_dict())
    elif isinstance(data, (list, tuple, set, frozenset)):
        return [to_jsonable(v) for v in data]
    elif isinstance(data, pd.DataFrame):
        return to_jsonable(data.to_dict(orient='records'))
    elif isinstance(data, np.ndarray):
        return to_jsonable(data.tolist())
    elif isinstance(data, (np.bool_, bool)):
        return bool(data)
    elif isinstance(data, (np.integer, int)):
        return int(data)
    elif isinstance(data, (np.floating, float)):
        v = float(data)
        return v if math.isfinite(v) else str(v)
    else:
        return data


def print_json(data, indent=2):
    print(json.dumps(to_jsonable(data), indent=indent))


def print_df(df, csv_path=None, display_max_columns=500, display_width=1500):
    logger = logging.getLogger(__name__)
    logger.debug(f'df.shape: {df.shape}')
    logger.debug(f'df.dtypes: {df.dtypes}')
    pd.set_option('display.max_columns', display_max_columns)
    pd.set_option('display.width', display_width)
    pd.set_option('display.max_rows', df.shape[0])
    print(df.to_string(index=False))
    if csv_path:
        logger.info(f'Write CSV data: {csv_path}')
        df.to_csv(csv_path, index=False)


def check_keys(data, allowed, label):
    unknown = set(data) - set(allowed)
    if unknown:
        raise ValueError(f'invalid {label} keys: {sorted(unknown)}')


LOG_FLOAT_MAX = math.log(sys.float_info.max)


@dataclass(frozen=True)
class LargeValue:
    """A positive number beyond double range, kept as its natural log."""
    log_value: float

    @property
    def exponent(self):
        return math.floor(self.log_value / math.log(10))

    @property
    def mantissa(self):
        return 10 ** (self.log_value / math.log(10) - self.exponent)

    def __float__(self):
        return math.inf

    def __str__(self):
        return f'{self.mantissa:.6f}e{self.exponent:+d}'

    def to_dict(self):
        return {
            'mantissa': self.mantissa, 'exponent': self.exponent,
            'log_value': self.log_value
        }


def exp_or_large(log_value):
    if log_value > LOG_FLOAT_MAX:
        return LargeValue(log_value)
    else:
        return math.exp(log_value)


def exp_neg(rate, factor=1):
    """Return min(1, factor * exp(-rate)) without overflow."""
    if rate <= 0:
        return float(min(1, factor))
    else:
        return float(min(1.0, math.exp(math.log(factor) - rate)))
