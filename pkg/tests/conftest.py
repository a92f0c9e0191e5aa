"""Shared test helpers: independent oracles and file normalizers."""

import re

import numpy as np


def f_oracle(y, v):
    """Reference F statistic computed with numpy's lstsq (SVD path).

    Deliberately avoids the normal-equations route the library uses so the
    two implementations only agree if both are right.
    """
    y = np.asarray(y, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    n, r = v.shape
    sse0 = float(y @ y)
    coef, *_ = np.linalg.lstsq(v, y, rcond=None)
    resid = y - v @ coef
    sse1 = float(resid @ resid)
    return ((sse0 - sse1) / r) / (sse1 / (n - r))


def strip_timestamp(text):
    """Drop the timestamp line of a JSON document for byte comparisons."""
    return re.sub(r'^\s*"timestamp": "[^"]*",?\n', "", text, flags=re.M)
