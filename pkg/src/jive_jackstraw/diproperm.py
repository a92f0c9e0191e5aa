"""Direction-Projection-Permutation two-sample test.

Projects the data onto the normalized class-mean difference direction and
compares the observed separation statistic against a label-permutation null.
The direction is recomputed for every permutation.  Results are reported as
a z-score against the null, with an interval from batch-wise z-scores.

Balanced permutations constrain each permuted class to draw as close as
possible to half of its members from each original class, which sharpens
the null for strongly separated data.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix

__all__ = ["DiProPermResult", "mean_diff_direction", "diproperm_test"]

_STATISTICS = ("mean-diff", "t")
_GEMM_CHUNK = 128


def _check_labels(labels, n):
    lab = np.asarray(labels)
    if lab.ndim != 1 or lab.shape[0] != n:
        raise ValueError(f"labels must be a length-{n} vector, got shape {lab.shape}")
    uniq = np.unique(lab)
    if uniq.size != 2:
        raise ValueError(f"labels must take exactly 2 values, got {uniq.size}")
    binary = (lab == uniq[1]).astype(bool)
    return binary


def mean_diff_direction(x, labels):
    """Unit vector along (class-1 mean - class-0 mean) of the columns."""
    x = as_matrix(x, "x")
    mask = _check_labels(labels, x.shape[1])
    diff = x[:, mask].mean(axis=1) - x[:, ~mask].mean(axis=1)
    norm = float(np.linalg.norm(diff))
    if norm == 0.0:
        raise ValueError("class means are identical; no direction")
    return diff / norm


@dataclass(frozen=True)
class DiProPermResult:
    observed_stat: float
    null_stats: np.ndarray      # (n_perm,), permutation-index order
    z_score: float
    z_interval: tuple           # (low, high)
    empirical_pvalue: float
    direction: np.ndarray       # (d,), unit norm
    statistic: str
    balanced: bool
    n_perm: int
    batches: int
    seed: int
    retries: int

    def to_dict(self):
        return {
            "observed_stat": float(self.observed_stat),
            "null_stats": self.null_stats.tolist(),
            "z_score": float(self.z_score),
            "z_interval": [float(self.z_interval[0]), float(self.z_interval[1])],
            "empirical_pvalue": float(self.empirical_pvalue),
            "direction": self.direction.tolist(),
            "statistic": self.statistic,
            "balanced": self.balanced,
            "n_perm": self.n_perm,
            "batches": self.batches,
            "seed": self.seed,
            "retries": self.retries,
        }


def _coeff_vector(n, ones_idx, n1, n0):
    # +1/n1 on the permuted class 1, -1/n0 elsewhere: X @ a is the mean difference
    a = np.full(n, -1.0 / n0)
    a[ones_idx] = 1.0 / n1
    return a


def _draw_class1(rng, idx1, idx0, balanced):
    n1 = idx1.size
    if balanced:
        # Target: half of the permuted class from each original class, the
        # odd member assigned by a fair coin, clamped to what is available.
        h = n1 // 2 + (int(rng.integers(0, 2)) if n1 % 2 else 0)
        h = int(np.clip(h, max(0, n1 - idx0.size), n1))
        take1 = rng.choice(idx1, size=h, replace=False) if h > 0 else np.empty(0, int)
        need0 = n1 - h
        take0 = rng.choice(idx0, size=need0, replace=False) if need0 > 0 else np.empty(0, int)
        return np.concatenate([take1, take0]).astype(int)
    pool = np.concatenate([idx1, idx0])
    return rng.choice(pool, size=n1, replace=False).astype(int)


def _t_statistic(projection, ones_mask):
    z1 = projection[ones_mask]
    z0 = projection[~ones_mask]
    n1, n0 = z1.size, z0.size
    pooled = ((n1 - 1) * z1.var(ddof=1) + (n0 - 1) * z0.var(ddof=1)) / (n1 + n0 - 2)
    denom = np.sqrt(pooled * (1.0 / n1 + 1.0 / n0))
    if denom == 0.0:
        raise ValueError("zero pooled variance in t statistic")
    return float((z1.mean() - z0.mean()) / denom)


def diproperm_test(
    x,
    labels,
    n_perm=1000,
    balanced=True,
    batches=10,
    seed=0,
    statistic="mean-diff",
):
    """Two-sample separation test with a permutation null.

    Parameters
    ----------
    x : array_like, shape (d, n)
        Columns are cases.
    labels : length-n vector with exactly two distinct values
        The larger value (after np.unique ordering) is class 1.
    n_perm : int
        Number of permutations, >= 100.
    balanced : bool
        Constrain permutations so each permuted class draws near-equally
        from both original classes.  Unbalanced mode relabels uniformly.
    batches : int
        Null is split into this many groups for the z-score interval
        (mean +/- 2 sd of the batch z-scores).
    seed : int
        Master seed; permutation b uses a stream derived from (seed, b), so
        the null is reproducible and order-stable.
    statistic : "mean-diff" or "t"
        Projected mean difference (default) or the pooled two-sample
        t statistic of the projections.

    Returns
    -------
    DiProPermResult
    """
    x = as_matrix(x, "x")
    d, n = x.shape
    mask = _check_labels(labels, n)
    idx1 = np.flatnonzero(mask)
    idx0 = np.flatnonzero(~mask)
    n1, n0 = idx1.size, idx0.size
    if n1 < 2 or n0 < 2:
        raise ValueError(f"both classes need >= 2 cases, got {n1} and {n0}")
    n_perm = int(n_perm)
    if n_perm < 100:
        raise ValueError(f"n_perm must be >= 100, got {n_perm}")
    batches = int(batches)
    if batches < 2:
        raise ValueError(f"batches must be >= 2, got {batches}")
    if n_perm < 2 * batches:
        raise ValueError(f"n_perm={n_perm} too small for {batches} batches")
    if statistic not in _STATISTICS:
        raise ValueError(f"statistic must be one of {_STATISTICS}, got {statistic!r}")
    if int(seed) < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    seed = int(seed)

    direction = mean_diff_direction(x, mask)
    if statistic == "mean-diff":
        # projection of the mean difference onto its own unit direction
        observed = float(
            np.linalg.norm(x[:, mask].mean(axis=1) - x[:, ~mask].mean(axis=1))
        )
    else:
        observed = _t_statistic(x.T @ direction, mask)

    children = np.random.SeedSequence(seed).spawn(n_perm)
    rngs = [np.random.default_rng(c) for c in children]
    max_retries = 10 * n_perm
    retries = 0

    gram = x.T @ x if statistic == "t" else None
    null = np.empty(n_perm)
    pending = list(range(n_perm))
    coeffs = np.empty((n, n_perm))
    ones = [None] * n_perm
    for b in pending:
        sel = _draw_class1(rngs[b], idx1, idx0, balanced)
        ones[b] = sel
        coeffs[:, b] = _coeff_vector(n, sel, n1, n0)

    while pending:
        # mean-difference norms for the pending permutations, chunked gemm
        degenerate = []
        for lo in range(0, len(pending), _GEMM_CHUNK):
            cols = pending[lo : lo + _GEMM_CHUNK]
            diffs = x @ coeffs[:, cols]
            norms = np.linalg.norm(diffs, axis=0)
            for j, b in enumerate(cols):
                if norms[j] == 0.0:
                    degenerate.append(b)
                elif statistic == "mean-diff":
                    null[b] = norms[j]
                else:
                    proj = (gram @ coeffs[:, b]) / norms[j]
                    sel_mask = np.zeros(n, dtype=bool)
                    sel_mask[ones[b]] = True
                    null[b] = _t_statistic(proj, sel_mask)
        if not degenerate:
            break
        retries += len(degenerate)
        if retries > max_retries:
            raise RuntimeError(
                f"{retries} degenerate permutation directions (budget {max_retries}); "
                "data admits no mean separation"
            )
        for b in degenerate:
            sel = _draw_class1(rngs[b], idx1, idx0, balanced)
            ones[b] = sel
            coeffs[:, b] = _coeff_vector(n, sel, n1, n0)
        pending = degenerate

    sd = float(null.std(ddof=1))
    if sd == 0.0:
        raise ValueError("null statistics are constant; z-score undefined")
    z = (observed - float(null.mean())) / sd

    batch_z = []
    for group in np.array_split(null, batches):
        gsd = float(group.std(ddof=1))
        if gsd == 0.0:
            raise ValueError("a null batch is constant; z interval undefined")
        batch_z.append((observed - float(group.mean())) / gsd)
    batch_z = np.asarray(batch_z)
    center = float(batch_z.mean())
    spread = float(batch_z.std(ddof=1))
    interval = (center - 2.0 * spread, center + 2.0 * spread)

    pvalue = float(np.sum(null >= observed) / n_perm)

    return DiProPermResult(
        observed_stat=observed,
        null_stats=null,
        z_score=z,
        z_interval=interval,
        empirical_pvalue=pvalue,
        direction=direction,
        statistic=statistic,
        balanced=bool(balanced),
        n_perm=n_perm,
        batches=batches,
        seed=seed,
        retries=retries,
    )
