import numpy as np


def sign_pm(v):
    """Sign with ties sent to +1, so the output is always in {-1, +1}.

    Every decision rule in the package resolves a zero score the same way;
    keeping the convention in one place stops the tie handling from
    drifting between modules.
    """
    return np.where(np.asarray(v) >= 0, 1, -1).astype(np.int64)


def frozen(a, dtype=None):
    # defensive copy whose buffer is marked read-only
    out = np.array(a, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out
