"""Permutation significance inference for loadings.

A loading L = D.v pairs each feature with a score vector v (one CNS or BSS
row, or a whole subspace).  Observed per-feature F statistics are compared
against a permutation null: K randomly chosen rows of the block under test
are shuffled across cases, the score is either recomputed ("full" mode) or
reused ("approximate" mode), and the F statistics of exactly those K rows
are pooled over S replicates.  Empirical p-values then get a multiple-testing
adjustment.

Replicate b always draws from its own RNG stream derived from (seed, b), so
the pooled null is identical no matter how many worker threads run it.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ajive import ajive_decompose
from .linalg import as_vector

__all__ = [
    "LoadingTarget",
    "JackstrawConfig",
    "JackstrawResult",
    "ReplicateError",
    "loading_vector",
    "f_statistic",
    "observed_f",
    "permute_rows",
    "null_samples",
    "empirical_pvalues",
    "adjust_pvalues",
    "jackstraw_run",
]

_SPACES = ("joint", "individual", "pca")
_MODES = ("full", "approximate")
_ADJUSTMENTS = ("bonferroni", "bh", "none")

# Residual sums of squares below this fraction of SSE_0 count as a perfect
# fit and return the +infinity sentinel.
_PERFECT_FIT_REL = 1e-24


class ReplicateError(RuntimeError):
    """A null replicate failed; carries the replicate index."""

    def __init__(self, replicate, message):
        super().__init__(f"replicate {replicate}: {message}")
        self.replicate = replicate


@dataclass(frozen=True)
class LoadingTarget:
    """Which loadings are under test.

    space      "joint", "individual", or "pca" (the baseline variant).
    block      index of the block whose features are tested (and whose rows
               get permuted).
    component  score index within the space, or None to test against the
               whole subspace at once.
    """

    space: str
    block: int = 0
    component: int = 0

    def __post_init__(self):
        if self.space not in _SPACES:
            raise ValueError(f"space must be one of {_SPACES}, got {self.space!r}")
        if int(self.block) < 0:
            raise ValueError(f"block index must be >= 0, got {self.block}")
        object.__setattr__(self, "block", int(self.block))
        if self.component is not None:
            if int(self.component) < 0:
                raise ValueError(f"component must be >= 0, got {self.component}")
            object.__setattr__(self, "component", int(self.component))

    def to_dict(self):
        return {"space": self.space, "block": self.block, "component": self.component}

    @classmethod
    def from_dict(cls, d):
        return cls(space=d["space"], block=d["block"], component=d["component"])


@dataclass(frozen=True)
class JackstrawConfig:
    """Settings of one jackstraw run.

    k_rows (K) rows are permuted per replicate; n_reps (S) replicates pool
    into an S*K null.  K must stay well below the feature count (enforced as
    K <= d_m/2 at run time); the engine warns when S*K < 10*d_m.
    """

    k_rows: int
    n_reps: int
    mode: str = "approximate"
    seed: int = 0
    alpha: float = 0.05
    adjustment: str = "bonferroni"
    smoothing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "k_rows", int(self.k_rows))
        object.__setattr__(self, "n_reps", int(self.n_reps))
        if self.k_rows < 1:
            raise ValueError(f"k_rows must be >= 1, got {self.k_rows}")
        if self.n_reps < 1:
            raise ValueError(f"n_reps must be >= 1, got {self.n_reps}")
        mode = {"approx": "approximate"}.get(self.mode, self.mode)
        if mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        object.__setattr__(self, "mode", mode)
        if int(self.seed) < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))
        if not 0.0 < float(self.alpha) < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.adjustment not in _ADJUSTMENTS:
            raise ValueError(
                f"adjustment must be one of {_ADJUSTMENTS}, got {self.adjustment!r}"
            )
        object.__setattr__(self, "smoothing", bool(self.smoothing))

    def check_against_block(self, n_features):
        if 2 * self.k_rows > n_features:
            raise ValueError(
                f"k_rows={self.k_rows} too large for a {n_features}-feature block "
                f"(need k_rows <= d/2)"
            )
        if self.n_reps * self.k_rows < 10 * n_features:
            warnings.warn(
                f"S*K = {self.n_reps * self.k_rows} null samples is below the "
                f"recommended 10*d = {10 * n_features}; p-values will be coarse",
                UserWarning,
                stacklevel=3,
            )

    def to_dict(self):
        return {
            "k_rows": self.k_rows,
            "n_reps": self.n_reps,
            "mode": self.mode,
            "seed": self.seed,
            "alpha": self.alpha,
            "adjustment": self.adjustment,
            "smoothing": self.smoothing,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class JackstrawResult:
    f_observed: np.ndarray      # (d,)
    f_null: np.ndarray          # (S*K,), replicate-index order
    p_raw: np.ndarray           # (d,)
    p_adjusted: np.ndarray      # (d,)
    significant: np.ndarray     # (d,) booleans
    target: LoadingTarget
    config: JackstrawConfig

    def to_dict(self):
        return {
            "target": self.target.to_dict(),
            "config": self.config.to_dict(),
            "f_observed": self.f_observed.tolist(),
            "f_null": self.f_null.tolist(),
            "p_raw": self.p_raw.tolist(),
            "p_adjusted": self.p_adjusted.tolist(),
            "significant": [bool(x) for x in self.significant],
            "n_significant": int(np.sum(self.significant)),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            f_observed=np.asarray(d["f_observed"], dtype=float),
            f_null=np.asarray(d["f_null"], dtype=float),
            p_raw=np.asarray(d["p_raw"], dtype=float),
            p_adjusted=np.asarray(d["p_adjusted"], dtype=float),
            significant=np.asarray(d["significant"], dtype=bool),
            target=LoadingTarget.from_dict(d["target"]),
            config=JackstrawConfig.from_dict(d["config"]),
        )


def loading_vector(block, v):
    """Loading L = D.v of a centered block against a unit-norm score vector."""
    v = as_vector(v, "score vector")
    if v.shape[0] != block.n_cases:
        raise ValueError(
            f"score length {v.shape[0]} does not match {block.n_cases} cases"
        )
    nv = float(np.linalg.norm(v))
    if abs(nv - 1.0) > 1e-8:
        raise ValueError(f"score vector must be unit norm, got ||v|| = {nv!r}")
    if not block.centered:
        raise ValueError("loading_vector needs a centered block")
    return block.matrix @ v


def _as_predictor(v, n):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    if v.ndim != 2 or v.shape[0] != n:
        raise ValueError(f"predictor must be (n, r) with n={n}, got shape {v.shape}")
    if v.shape[1] < 1:
        raise ValueError("predictor needs at least one column")
    if not np.all(np.isfinite(v)):
        raise ValueError("predictor contains non-finite entries")
    return v


def f_statistic(y, v):
    """No-intercept regression F statistic of a centered response on v.

    SSE_0 = ||y||^2, SSE_1 = ||y - v (v'v)^-1 v'y||^2, and
    F = ((SSE_0 - SSE_1)/r) / (SSE_1/(n - r)) for an n x r predictor; with a
    single column this is the (SSE_0 - SSE_1) / (SSE_1/(n-1)) form.  A
    perfect fit returns +inf as a sentinel; an identically zero response
    returns 0.
    """
    y = as_vector(y, "response")
    n = y.shape[0]
    v = _as_predictor(v, n)
    r = v.shape[1]
    if n <= r:
        raise ValueError(f"need more cases than predictor columns (n={n}, r={r})")
    if abs(float(y.mean())) > 1e-8:
        raise ValueError("response must be centered (|mean| <= 1e-8)")
    sse0 = float(y @ y)
    if sse0 == 0.0:
        return 0.0
    gram = v.T @ v
    try:
        coef = np.linalg.solve(gram, v.T @ y)
    except np.linalg.LinAlgError:
        raise ValueError("singular predictor Gram matrix") from None
    resid = y - v @ coef
    sse1 = float(resid @ resid)
    if sse1 <= sse0 * _PERFECT_FIT_REL:
        return float("inf")
    return ((sse0 - sse1) / r) / (sse1 / (n - r))


def observed_f(block, v):
    """F statistic of every row of a centered block against predictor v."""
    if not block.centered:
        raise ValueError("observed_f needs a centered block")
    n = block.n_cases
    v = _as_predictor(v, n)
    r = v.shape[1]
    if n <= r:
        raise ValueError(f"need more cases than predictor columns (n={n}, r={r})")
    y = block.matrix                       # (d, n)
    sse0 = np.einsum("ij,ij->i", y, y)
    gram = v.T @ v
    try:
        coef = np.linalg.solve(gram, v.T @ y.T)    # (r, d)
    except np.linalg.LinAlgError:
        raise ValueError("singular predictor Gram matrix") from None
    resid = y.T - v @ coef                 # (n, d)
    sse1 = np.einsum("ij,ij->j", resid, resid)
    out = np.zeros(block.n_features)
    live = sse0 > 0.0
    perfect = live & (sse1 <= sse0 * _PERFECT_FIT_REL)
    ok = live & ~perfect
    out[perfect] = np.inf
    out[ok] = ((sse0[ok] - sse1[ok]) / r) / (sse1[ok] / (n - r))
    return out


def permute_rows(block, row_indices, rng):
    """Shuffle the entries of the selected rows independently across cases.

    Every other row is untouched.  Row means are invariant, so a centered
    block stays centered.
    """
    idx = np.asarray(row_indices, dtype=int)
    if idx.ndim != 1 or idx.size < 1:
        raise ValueError("row_indices must be a non-empty 1-D index list")
    if np.unique(idx).size != idx.size:
        raise ValueError(f"duplicate row indices: {sorted(idx.tolist())}")
    if idx.min() < 0 or idx.max() >= block.n_features:
        raise ValueError(
            f"row indices out of range [0, {block.n_features - 1}]: {sorted(idx.tolist())}"
        )
    mat = block.matrix.copy()
    for i in idx:
        mat[i] = mat[i][rng.permutation(block.n_cases)]
    return block.with_matrix(mat)


def _predictor_from(dec, target):
    """Score predictor for a target: one unit vector, or the whole subspace."""
    if target.space == "joint":
        source = dec.cns
        label = f"joint rank {dec.joint_rank}"
    elif target.space == "individual":
        fit = dec.blocks[target.block]
        source = fit.bss
        label = f"individual rank {fit.individual_rank} of block {fit.name!r}"
    else:
        raise ValueError(f"target space {target.space!r} is not an AJIVE space")
    if source.shape[0] == 0:
        raise ValueError(f"no scores available ({label})")
    if target.component is None:
        return source.T.copy()
    if target.component >= source.shape[0]:
        raise ValueError(
            f"component {target.component} out of range ({label})"
        )
    return source[target.component].copy()


def _prepare(blocks, target, initial_ranks, joint_rank):
    """Center blocks as needed, fit the base decomposition, pull the predictor."""
    blocks = [b if b.centered else b.center() for b in blocks]
    if not 0 <= target.block < len(blocks):
        raise ValueError(f"target block {target.block} out of range ({len(blocks)} blocks)")
    dec = ajive_decompose(blocks, initial_ranks, joint_rank)
    predictor = _predictor_from(dec, target)
    return blocks, dec, predictor


def _null_engine(target_block, config, predictor, refit, threads=1):
    """Pool S*K null F values; replicate b fills slots [b*K, (b+1)*K).

    predictor is the fixed score (approximate mode); refit, when given,
    maps a permuted block to a fresh predictor (full mode).
    """
    d = target_block.n_features
    k = config.k_rows
    s = config.n_reps
    config.check_against_block(d)
    children = np.random.SeedSequence(config.seed).spawn(s)
    out = np.empty(s * k)

    def run_range(lo, hi):
        for b in range(lo, hi):
            rng = np.random.default_rng(children[b])
            rows = np.sort(rng.choice(d, size=k, replace=False))
            permuted = permute_rows(target_block, rows, rng)
            try:
                v = predictor if refit is None else refit(permuted)
                for j, i in enumerate(rows):
                    out[b * k + j] = f_statistic(permuted.matrix[i], v)
            except ReplicateError:
                raise
            except Exception as exc:
                raise ReplicateError(b, str(exc)) from exc

    threads = max(1, int(threads))
    if threads == 1 or s == 1:
        run_range(0, s)
    else:
        bounds = np.linspace(0, s, min(threads, s) + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(run_range, int(lo), int(hi))
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            for f in futures:
                f.result()
    return out


def null_samples(blocks, target, initial_ranks, joint_rank, config, threads=1):
    """Generate the S*K permutation null for a target's loadings.

    In full mode every replicate re-runs the decomposition on the permuted
    blocks (other blocks enter unchanged) and re-extracts the target score;
    approximate mode reuses the original score.  Deterministic given
    config.seed, independent of ``threads``.
    """
    blocks, dec, predictor = _prepare(blocks, target, initial_ranks, joint_rank)
    if config.mode == "full":
        frozen_rank = dec.joint_rank  # auto rank resolved once, not per replicate
        others = list(blocks)

        def refit(permuted):
            trial = list(others)
            trial[target.block] = permuted
            return _predictor_from(
                ajive_decompose(trial, initial_ranks, frozen_rank), target
            )

        return _null_engine(blocks[target.block], config, None, refit, threads)
    return _null_engine(blocks[target.block], config, predictor, None, threads)


def empirical_pvalues(f_obs, f_null, smoothing=False):
    """Fraction of null draws at or above each observed F.

    Ties count against the observation (the indicator is F_obs <= F_null).
    With smoothing, (1 + count)/(1 + B) keeps p-values off exact zero.  +inf
    observations map to p = 0 regardless.
    """
    f_obs = np.asarray(f_obs, dtype=np.float64)
    if f_obs.ndim != 1 or f_obs.size < 1:
        raise ValueError("f_obs must be a non-empty 1-D array")
    f_null = np.asarray(f_null, dtype=np.float64)
    if f_null.ndim != 1 or f_null.size < 1:
        raise ValueError("f_null must be a non-empty 1-D array")
    if np.any(np.isnan(f_obs)) or np.any(np.isnan(f_null)):
        raise ValueError("F values must not be NaN")
    b = f_null.size
    ordered = np.sort(f_null)
    count = b - np.searchsorted(ordered, f_obs, side="left")
    if smoothing:
        p = (1.0 + count) / (1.0 + b)
    else:
        p = count / b
    p[np.isinf(f_obs)] = 0.0
    return p


def adjust_pvalues(p, method):
    """Multiple-testing adjustment: "bonferroni", "bh", or "none"."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("p must be a non-empty 1-D array")
    if np.any(p < 0.0) or np.any(p > 1.0) or np.any(np.isnan(p)):
        raise ValueError("p-values must lie in [0, 1]")
    d = p.size
    if method == "none":
        return p.copy()
    if method == "bonferroni":
        return np.minimum(p * d, 1.0)
    if method == "bh":
        order = np.argsort(p, kind="stable")
        scaled = p[order] * d / np.arange(1, d + 1)
        adjusted = np.minimum.accumulate(scaled[::-1])[::-1]
        adjusted = np.minimum(adjusted, 1.0)
        out = np.empty_like(p)
        out[order] = adjusted
        return out
    raise ValueError(f"method must be one of {_ADJUSTMENTS}, got {method!r}")


def jackstraw_run(blocks, target, initial_ranks, joint_rank, config, threads=1):
    """Full pipeline: observed F, permutation null, p-values, significance."""
    prepared, dec, predictor = _prepare(blocks, target, initial_ranks, joint_rank)
    target_block = prepared[target.block]
    f_obs = observed_f(target_block, predictor)
    if config.mode == "full":
        frozen_rank = dec.joint_rank

        def refit(permuted):
            trial = list(prepared)
            trial[target.block] = permuted
            return _predictor_from(
                ajive_decompose(trial, initial_ranks, frozen_rank), target
            )

        f_null = _null_engine(target_block, config, None, refit, threads)
    else:
        f_null = _null_engine(target_block, config, predictor, None, threads)
    p_raw = empirical_pvalues(f_obs, f_null, config.smoothing)
    p_adjusted = adjust_pvalues(p_raw, config.adjustment)
    significant = p_adjusted <= config.alpha
    return JackstrawResult(
        f_observed=f_obs,
        f_null=f_null,
        p_raw=p_raw,
        p_adjusted=p_adjusted,
        significant=significant,
        target=target,
        config=config,
    )
