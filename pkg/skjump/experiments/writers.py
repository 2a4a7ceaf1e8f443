"""Result files: CSV tables and the JSON manifest.

Floats are written with 17 significant digits so every value round-trips
exactly. A table that fits a rate ends with ``RATE,slope,slope_se,r_squared``.
"""
import csv
import json
import logging
import math
import os

import numpy as np

logger = logging.getLogger(__name__)

STRONG_RATE_COLUMNS = ('epsilon', 't', 'p', 'estimate', 'std_error',
                       'n_paths', 'aborts')
MOMENT_COLUMNS = ('epsilon', 'p', 'estimate', 'std_error', 'n_paths')
KOLMOGOROV_COLUMNS = ('epsilon', 't', 'ks', 'noise_floor', 'n_paths')
MALLIAVIN_COLUMNS = ('epsilon', 't', 'kind', 'estimate', 'std_error',
                     'n_paths', 'aborts')
ORACLE_COLUMNS = ('dt', 'kind', 'max_rel_gap', 'n_paths')
INVERSE_NORM_COLUMNS = ('t', 'p', 'kind', 'estimate', 'std_error', 'scaled',
                        'n_paths', 'aborts')
ASSUMPTION_COLUMNS = ('h1_lipschitz_ok', 'h1_growth_ok',
                      'h2_deriv_bounded_ok', 'h2_jump_moments_ok',
                      'worst_ratio', 'probe_count')


def format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return '{:.17g}'.format(float(value))
    return str(value)


def rate_row(fit):
    """The closing RATE row; NaNs when no rate could be fitted."""
    if fit is None:
        return ('RATE', math.nan, math.nan, math.nan)
    return ('RATE', fit.slope, fit.slope_se, fit.r_squared)


def write_csv(path, columns, rows, fit=None, with_rate=False):
    """Write a header, the rows and optionally the RATE row.

    Returns:
        str: the file name relative to its directory.
    """

    rows = list(rows)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
        if with_rate:
            writer.writerow([format_value(v) for v in rate_row(fit)])
    logger.info('Wrote %d rows to %s', len(rows), path)
    return os.path.basename(path)


def read_csv_body(path):
    """Rows of a result file without its header, as lists of strings."""
    with open(path, newline='') as f:
        return list(csv.reader(f))[1:]


def jsonable(value):
    """``value`` with string keys and non-finite floats spelled out."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def write_manifest(path, manifest):
    with open(path, 'w') as f:
        json.dump(jsonable(manifest), f, indent=2, sort_keys=True)
        f.write('\n')
    logger.info('Wrote manifest %s', path)
    return os.path.basename(path)
