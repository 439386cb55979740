"""Plain-text pattern files: one point per line, space-separated coordinates."""
import numpy as np


def save_pattern(path, points):
    np.savetxt(path, np.asarray(getattr(points, "points", points), dtype=np.float64), fmt="%.17g")


def load_pattern(path, dim=None):
    pts = np.loadtxt(path, dtype=np.float64, ndmin=2)
    if pts.size == 0:
        raise ValueError(f"{path}: empty pattern")
    if dim is not None and pts.shape[1] != dim:
        raise ValueError(f"{path}: expected {dim} coordinates per line, got {pts.shape[1]}")
    return pts
