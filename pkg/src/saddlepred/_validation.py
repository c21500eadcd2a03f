"""Small input-validation helpers shared by the estimators and problem builders."""
import numpy as np
from sklearn.utils.validation import check_array


def as_vector(x, name="x", dim=None):
    """Return ``x`` as a finite 1-D float64 array, checking its length."""
    arr = check_array(np.atleast_1d(np.asarray(x, dtype=np.float64)), ensure_2d=False,
                      dtype=np.float64, ensure_all_finite=True, input_name=name)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {dim}")
    return arr


def as_matrix(a, name="K"):
    """Return ``a`` as a finite, nonempty 2-D float64 array."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return check_array(arr, dtype=np.float64, ensure_all_finite=True, input_name=name)


def as_points(X, n_features=2, name="X"):
    """Validate an ``(n_samples, n_features)`` sample matrix."""
    X = check_array(X, dtype=np.float64, ensure_all_finite=True, input_name=name)
    if X.shape[1] != n_features:
        raise ValueError(f"{name} must have {n_features} columns, got {X.shape[1]}")
    return X
