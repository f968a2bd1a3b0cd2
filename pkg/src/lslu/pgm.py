"""Binary PGM (P5, 8-bit) image export: zero-dependency and diffable."""

from __future__ import annotations

import numpy as np


def write_pgm(path, array):
    """Write a 2-D array as a min-max scaled 8-bit binary PGM."""
    array = np.atleast_2d(np.asarray(array, dtype=float))
    lo, hi = float(array.min()), float(array.max())
    if hi > lo:
        scaled = np.round((array - lo) / (hi - lo) * 255.0)
    else:
        scaled = np.zeros_like(array)
    data = scaled.astype(np.uint8)
    header = f"P5\n{array.shape[1]} {array.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())
