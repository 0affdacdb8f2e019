import numpy as np

from errors import InvalidParameterError
from intervals import BivariateIntervalSample, validate_sample
from interval_io import IntervalTable

# rows are (x_lo, x_hi, y_lo, y_hi)
REFERENCE_SETS: dict[int, tuple[tuple[float, float, float, float], ...]] = {
    1: (
        (1.0, 4.0, 6.0, 7.0),
        (2.0, 7.0, 6.0, 9.0),
        (1.0, 5.0, 5.0, 8.0),
    ),
    2: (
        (3.0, 7.0, 6.0, 12.0),
        (1.0, 8.0, 3.0, 15.0),
        (2.0, 15.0, 3.0, 22.0),
    ),
    3: (
        (5.0, 9.0, 3.0, 4.0),
        (4.0, 8.0, 1.0, 6.0),
        (4.0, 10.0, 2.0, 5.0),
        (3.0, 7.0, 2.0, 4.0),
    ),
    # both variables are classical in set 4, so range variances vanish
    4: (
        (4.0, 4.0, 3.0, 3.0),
        (5.0, 5.0, 6.0, 6.0),
        (3.0, 3.0, 5.0, 5.0),
    ),
}


def _rows(k: int) -> tuple[tuple[float, float, float, float], ...]:
    rows = REFERENCE_SETS.get(k)
    if rows is None:
        raise InvalidParameterError("set", f"data sets are numbered {min(REFERENCE_SETS)} to {max(REFERENCE_SETS)}, got {k}")
    return rows


def load_reference_set(k: int) -> BivariateIntervalSample:
    return validate_sample(_rows(k))


def reference_table(k: int) -> IntervalTable:
    data = np.array(_rows(k))
    return IntervalTable(
        variables=("X", "Y"),
        lower=data[:, [0, 2]],
        upper=data[:, [1, 3]],
    )
