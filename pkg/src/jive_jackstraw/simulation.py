"""Toy two-block generator with known ground truth, plus the AJIVE-vs-PCA
jackstraw comparison harness.

Each block is joint signal + individual signal + Gaussian noise.  The case
patterns are fixed +/-1 designs chosen to be exactly mutually orthogonal:
the joint pattern splits cases into halves, the individual patterns follow
(+,-,+,-) and (+,-,-,+) on quarters.  Supports are contiguous feature
ranges, so every feature is either joint-loaded, individual-loaded, or pure
noise, and significance masks are known exactly.
"""

from dataclasses import dataclass, replace

import numpy as np

from .ajive import DataBlock, ajive_decompose, select_scores
from .jackstraw import (
    JackstrawConfig,
    LoadingTarget,
    _null_engine,
    adjust_pvalues,
    empirical_pvalues,
    jackstraw_run,
    JackstrawResult,
    observed_f,
)
from .linalg import center_rows, pca, vector_angle

__all__ = [
    "ToyConfig",
    "ToyGroundTruth",
    "MethodComparison",
    "simulate_toy",
    "accuracy",
    "true_positive_rate",
    "pair_components",
    "pca_jackstraw_run",
    "compare_methods",
    "COLUMN_LABELS",
    "ROW_LABELS",
]

COLUMN_LABELS = (
    "D1.(joint/PC2)",
    "D1.(indivi/PC1)",
    "D2.(joint/PC2)",
    "D2.(indivi/PC1)",
)
ROW_LABELS = ("AJIVE-jackstraw", "PCA-jackstraw")


def _check_range(rng_pair, d, what):
    lo, hi = int(rng_pair[0]), int(rng_pair[1])
    if not 1 <= lo <= hi <= d:
        raise ValueError(f"{what} range ({lo}, {hi}) must satisfy 1 <= lo <= hi <= {d}")
    return lo, hi


@dataclass(frozen=True)
class ToyConfig:
    """Toy problem dimensions and signal levels.

    Supports are 1-based inclusive (start, stop) feature ranges, one pair
    per block.  n must be divisible by 4 so the quarter-based case patterns
    stay exactly orthogonal.
    """

    d1: int = 120
    d2: int = 120
    n: int = 160
    joint_amplitude: float = 0.7
    individual_amplitude: float = 1.0
    noise_variance: float = 2.0
    joint_support: tuple = ((1, 80), (1, 40))
    individual_support: tuple = ((81, 120), (41, 120))
    seed: int = 0

    def __post_init__(self):
        for name in ("d1", "d2", "n", "seed"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.d1 < 2 or self.d2 < 2:
            raise ValueError(f"block sizes must be >= 2, got d1={self.d1}, d2={self.d2}")
        if self.n < 4 or self.n % 4 != 0:
            raise ValueError(
                f"n must be a positive multiple of 4 for orthogonal case patterns, got {self.n}"
            )
        if not float(self.joint_amplitude) > 0.0:
            raise ValueError(f"joint_amplitude must be > 0, got {self.joint_amplitude}")
        if not float(self.individual_amplitude) > 0.0:
            raise ValueError(
                f"individual_amplitude must be > 0, got {self.individual_amplitude}"
            )
        if float(self.noise_variance) < 0.0:
            raise ValueError(f"noise_variance must be >= 0, got {self.noise_variance}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        js = tuple(tuple(int(v) for v in pair) for pair in self.joint_support)
        iv = tuple(tuple(int(v) for v in pair) for pair in self.individual_support)
        if len(js) != 2 or len(iv) != 2:
            raise ValueError("joint_support and individual_support need one range per block")
        for m, d in enumerate((self.d1, self.d2)):
            jlo, jhi = _check_range(js[m], d, f"block {m + 1} joint support")
            ilo, ihi = _check_range(iv[m], d, f"block {m + 1} individual support")
            if jlo <= ihi and ilo <= jhi:
                raise ValueError(
                    f"block {m + 1}: joint support ({jlo}, {jhi}) overlaps "
                    f"individual support ({ilo}, {ihi})"
                )
        object.__setattr__(self, "joint_support", js)
        object.__setattr__(self, "individual_support", iv)

    def to_dict(self):
        return {
            "d1": self.d1,
            "d2": self.d2,
            "n": self.n,
            "joint_amplitude": float(self.joint_amplitude),
            "individual_amplitude": float(self.individual_amplitude),
            "noise_variance": float(self.noise_variance),
            "joint_support": [list(p) for p in self.joint_support],
            "individual_support": [list(p) for p in self.individual_support],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("joint_support", "individual_support"):
            if key in d:
                d[key] = tuple(tuple(p) for p in d[key])
        return cls(**d)


@dataclass(frozen=True)
class ToyGroundTruth:
    """What the generator actually planted.

    Score patterns are the raw +/-1 designs; loading vectors are the 0/1
    support indicators (directions only, not normalized).  Masks flag the
    features a perfect detector would call significant.
    """

    joint_score: np.ndarray          # (n,)
    individual_scores: tuple         # 2 x (n,)
    joint_loadings: tuple            # 2 x (d_m,)
    individual_loadings: tuple       # 2 x (d_m,)
    joint_masks: tuple               # 2 x (d_m,) booleans
    individual_masks: tuple          # 2 x (d_m,) booleans


def _quarter_pattern(n, signs):
    q = n // 4
    return np.repeat(np.asarray(signs, dtype=np.float64), q)


def _indicator(d, lo, hi):
    u = np.zeros(d)
    u[lo - 1 : hi] = 1.0
    return u


def simulate_toy(config=None):
    """Generate the two toy blocks and their ground truth.

    Returns (blocks, truth); blocks come back row-centered.  Deterministic
    given config.seed, with an independent noise stream per block.
    """
    cfg = config if config is not None else ToyConfig()
    n = cfg.n
    half = n // 2
    s_joint = np.ones(n)
    s_joint[half:] = -1.0
    s_ind = (
        _quarter_pattern(n, (1, -1, 1, -1)),
        _quarter_pattern(n, (1, -1, -1, 1)),
    )
    children = np.random.SeedSequence(cfg.seed).spawn(2)

    blocks = []
    joint_loadings = []
    individual_loadings = []
    joint_masks = []
    individual_masks = []
    for m, d in enumerate((cfg.d1, cfg.d2)):
        u = _indicator(d, *cfg.joint_support[m])
        w = _indicator(d, *cfg.individual_support[m])
        signal = cfg.joint_amplitude * np.outer(u, s_joint)
        signal += cfg.individual_amplitude * np.outer(w, s_ind[m])
        if cfg.noise_variance > 0.0:
            rng = np.random.default_rng(children[m])
            signal = signal + rng.normal(0.0, np.sqrt(cfg.noise_variance), (d, n))
        blocks.append(
            DataBlock(
                name=f"block{m + 1}",
                matrix=center_rows(signal),
                feature_names=[f"f{i + 1}" for i in range(d)],
                case_ids=[f"case{j + 1}" for j in range(n)],
                centered=True,
            )
        )
        joint_loadings.append(u)
        individual_loadings.append(w)
        joint_masks.append(u > 0)
        individual_masks.append(w > 0)

    truth = ToyGroundTruth(
        joint_score=s_joint,
        individual_scores=s_ind,
        joint_loadings=tuple(joint_loadings),
        individual_loadings=tuple(individual_loadings),
        joint_masks=tuple(joint_masks),
        individual_masks=tuple(individual_masks),
    )
    return blocks, truth


def accuracy(significant, truth_mask):
    """Proportion of features where the two masks agree."""
    a = np.asarray(significant, dtype=bool)
    b = np.asarray(truth_mask, dtype=bool)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean(a == b))


def true_positive_rate(significant, truth_mask):
    """Proportion of truly significant features that were detected.

    The alternative reading of an agreement count; reported alongside
    accuracy in comparison tables.
    """
    a = np.asarray(significant, dtype=bool)
    b = np.asarray(truth_mask, dtype=bool)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    total = int(b.sum())
    if total == 0:
        raise ValueError("truth mask flags no features")
    return float(np.sum(a & b) / total)


def pair_components(estimated, truth):
    """Assign each estimated vector to a distinct truth vector.

    Exhaustive search over permutations (component counts here are tiny)
    minimizing the total pairwise angle.  Returns a tuple where entry i is
    the truth index paired with estimated vector i.
    """
    from itertools import permutations

    est = [np.asarray(v, dtype=np.float64) for v in estimated]
    tru = [np.asarray(v, dtype=np.float64) for v in truth]
    if len(est) != len(tru):
        raise ValueError(f"{len(est)} estimated vectors vs {len(tru)} truth vectors")
    if len(est) == 0:
        return ()
    best = None
    best_total = np.inf
    for perm in permutations(range(len(tru))):
        total = sum(vector_angle(e, tru[j]) for e, j in zip(est, perm))
        if total < best_total:
            best_total = total
            best = perm
    return tuple(best)


def pca_jackstraw_run(block, rank, component, config, threads=1):
    """Jackstraw significance of one PCA component's loadings.

    The same permutation engine as the AJIVE pipeline, with a PCA score as
    the predictor.  Approximate mode reuses the original score; full mode
    recomputes the PCA on every permuted block.
    """
    prepared = block if block.centered else block.center()
    rank = int(rank)
    component = int(component)
    if not 0 <= component < rank:
        raise ValueError(f"component {component} out of range for rank {rank}")
    scores, _, _ = pca(prepared.matrix, rank)
    predictor = scores[component]
    f_obs = observed_f(prepared, predictor)
    if config.mode == "full":

        def refit(permuted):
            s, _, _ = pca(permuted.matrix, rank)
            return s[component]

        f_null = _null_engine(prepared, config, None, refit, threads)
    else:
        f_null = _null_engine(prepared, config, predictor, None, threads)
    p_raw = empirical_pvalues(f_obs, f_null, config.smoothing)
    p_adjusted = adjust_pvalues(p_raw, config.adjustment)
    return JackstrawResult(
        f_observed=f_obs,
        f_null=f_null,
        p_raw=p_raw,
        p_adjusted=p_adjusted,
        significant=p_adjusted <= config.alpha,
        target=LoadingTarget(space="pca", block=0, component=component),
        config=config,
    )


@dataclass(frozen=True)
class MethodComparison:
    """2x4 tables in the usual layout: per block, joint then individual."""

    col_labels: tuple
    row_labels: tuple
    accuracy: np.ndarray         # (2, 4)
    angles: np.ndarray           # (2, 4), degrees
    true_positive: np.ndarray    # (2, 4)
    n_significant: np.ndarray    # (2, 4) ints

    def to_dict(self):
        return {
            "col_labels": list(self.col_labels),
            "row_labels": list(self.row_labels),
            "accuracy": self.accuracy.tolist(),
            "angles": self.angles.tolist(),
            "true_positive": self.true_positive.tolist(),
            "n_significant": self.n_significant.tolist(),
        }


def _cell_seed(base, index):
    return int(np.random.SeedSequence([int(base), int(index)]).generate_state(1, np.uint64)[0])


def compare_methods(config, jconfig, threads=1):
    """Run AJIVE-jackstraw and PCA-jackstraw on one toy draw.

    AJIVE uses per-block rank 2 and joint rank 1; PCA uses rank 2 per block
    with components paired to the truth by smallest loading angle.  Each of
    the 8 (method x block x space) cells gets its own RNG stream derived
    from jconfig.seed, so cells stay independent but reproducible.
    """
    if not isinstance(jconfig, JackstrawConfig):
        raise ValueError("jconfig must be a JackstrawConfig")
    blocks, truth = simulate_toy(config)
    ranks = (2, 2)
    joint_rank = 1
    dec = ajive_decompose(blocks, ranks, joint_rank)

    acc = np.zeros((2, 4))
    ang = np.zeros((2, 4))
    tpr = np.zeros((2, 4))
    nsig = np.zeros((2, 4), dtype=int)

    cell = 0
    for m in range(2):
        for space, mask, true_loading in (
            ("joint", truth.joint_masks[m], truth.joint_loadings[m]),
            ("individual", truth.individual_masks[m], truth.individual_loadings[m]),
        ):
            jc = replace(jconfig, seed=_cell_seed(jconfig.seed, cell))
            res = jackstraw_run(
                blocks, LoadingTarget(space, m, 0), ranks, joint_rank, jc, threads
            )
            col = 2 * m + (0 if space == "joint" else 1)
            acc[0, col] = accuracy(res.significant, mask)
            tpr[0, col] = true_positive_rate(res.significant, mask)
            nsig[0, col] = int(res.significant.sum())
            score = select_scores(dec, space, m, 0)
            ang[0, col] = vector_angle(blocks[m].matrix @ score, true_loading)
            cell += 1

    for m in range(2):
        scores, loadings, _ = pca(blocks[m].matrix, 2)
        pairing = pair_components(
            [loadings[:, 0], loadings[:, 1]],
            [truth.joint_loadings[m], truth.individual_loadings[m]],
        )
        for pc in range(2):
            truth_idx = pairing[pc]  # 0 = joint, 1 = individual
            jc = replace(jconfig, seed=_cell_seed(jconfig.seed, cell))
            res = pca_jackstraw_run(blocks[m], 2, pc, jc, threads)
            mask = truth.joint_masks[m] if truth_idx == 0 else truth.individual_masks[m]
            true_loading = (
                truth.joint_loadings[m] if truth_idx == 0 else truth.individual_loadings[m]
            )
            col = 2 * m + truth_idx
            acc[1, col] = accuracy(res.significant, mask)
            tpr[1, col] = true_positive_rate(res.significant, mask)
            nsig[1, col] = int(res.significant.sum())
            ang[1, col] = vector_angle(loadings[:, pc], true_loading)
            cell += 1

    return MethodComparison(
        col_labels=COLUMN_LABELS,
        row_labels=ROW_LABELS,
        accuracy=acc,
        angles=ang,
        true_positive=tpr,
        n_significant=nsig,
    )
