"""Collection of miscelaneous tools useful in a variety of situations
(tables, fits and small numerical helpers, not specific to one module)
"""
import numpy as np
import pandas as pd
import statsmodels.api as sm

from pathlib import Path

########################################################################################
## Table Helpers
########################################################################################

def write_table(df, path):
    """Write `df` as CSV with '.' decimals and 17 significant digits.

    17 digits round-trip every float64, so reruns of the same experiment
    produce byte-identical files. Raises OSError naming the path on failure.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as err:
        raise OSError(f"could not write table to {path}: {err}") from err
    return path


########################################################################################
## Regression Helpers
########################################################################################

def fit_power_law(data=None, y_col=None, x_cols=None):
    """Fit |y| = c * prod_i x_i^{b_i} by OLS on logarithms.

    Returns the statsmodels results; `results.params[x]` is the exponent of
    column x and `results.bse[x]` its standard error. Columns in `x_cols`
    that take a single value carry no information and are dropped.

    ```
    >>> df = pd.DataFrame({'r': [1., 2., 4.], 'y': [3., 12., 48.]})
    >>> round(fit_power_law(df, 'y', ['r']).params['r'], 6)
    2.0
    ```
    """
    x_cols = [x for x in x_cols if data[x].nunique() > 1]
    if not x_cols:
        raise ValueError("no regressor varies across the sample")
    y = np.log(data[y_col].abs())
    X = np.log(data[x_cols].abs())
    X = sm.add_constant(X, has_constant='add')
    return sm.OLS(y, X).fit()


########################################################################################
## Numerical Helpers
########################################################################################

def relative_error(measured, reference, floor=0.0):
    """|measured - reference| / max(|reference|, floor), elementwise."""
    measured = np.asarray(measured, dtype=float)
    reference = np.asarray(reference, dtype=float)
    return (np.abs(measured - reference) / np.maximum(np.abs(reference), floor))[()]


def seeded_rng(seed):
    """numpy Generator for randomized property suites; same seed, same draws."""
    return np.random.default_rng(int(seed))


def _demo():
    df = pd.DataFrame({'r': [20., 30., 40.], 'y': [1.0, 2.25, 4.0]})
    print(fit_power_law(df, 'y', ['r']).summary())


if __name__ == "__main__":
    _demo()
