"""Input validation for the estimator API."""

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import InvalidArgument

OBSERVATION_COLUMNS = ("t", "x", "y", "z", "theta")


def check_observations(X):
    """Validate an ``(n, 5)`` observation array of ``t, x, y, z, theta`` rows.

    Timestamps must be non-decreasing and non-negative.
    """
    X = check_array(X, dtype=np.float64, ensure_min_samples=0)
    if X.shape[1] != len(OBSERVATION_COLUMNS):
        raise InvalidArgument(f"observations need {len(OBSERVATION_COLUMNS)} columns {OBSERVATION_COLUMNS}, got {X.shape[1]}")
    if X.shape[0]:
        if X[0, 0] < 0:
            raise InvalidArgument("timestamps must be non-negative")
        if np.any(np.diff(X[:, 0]) < 0):
            raise InvalidArgument("timestamps must be non-decreasing")
    return X


def check_points(X, n_cols, what="query"):
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != n_cols:
        raise InvalidArgument(f"{what} array needs {n_cols} columns, got {X.shape[1]}")
    return X


def check_positions(X):
    """``(x, y, z)`` rows, or full observation rows whose position columns are taken."""
    X = check_array(X, dtype=np.float64)
    if X.shape[1] == len(OBSERVATION_COLUMNS):
        return X[:, 1:4]
    if X.shape[1] != 3:
        raise InvalidArgument(f"positions need 3 columns (or 5 observation columns), got {X.shape[1]}")
    return X


def check_node_positions(nodes):
    nodes = check_array(nodes, dtype=np.float64, ensure_min_samples=1)
    if nodes.shape[1] != 3:
        raise InvalidArgument(f"node positions need 3 columns, got {nodes.shape[1]}")
    return nodes
