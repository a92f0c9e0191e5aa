"""Multi-block joint/individual decomposition.

The pipeline: each block gets a rank-r_m truncated SVD whose normalized row
basis (r_m x n) enters a stacked matrix; the stacked matrix's top right
singular vectors are the common normalized scores (CNS) shared by all blocks.
Each block is then split into a joint part (projection onto the CNS row
space), an individual part (best rank r_m - r_J approximation of the
remainder), and an unmodeled residual.  Block-specific scores (BSS) are the
normalized principal-component scores of the individual part.
"""

import numpy as np
from dataclasses import dataclass

from .linalg import as_matrix, center_rows, truncated_svd

__all__ = [
    "DataBlock",
    "BlockFit",
    "AjiveDecomposition",
    "ajive_decompose",
    "build_indicator_block",
    "select_scores",
]

# Stacked-basis squared singular values run from 1 (no association between
# blocks) to M (all blocks share the direction).  Auto rank selection keeps
# directions past the midpoint.
def _auto_joint_rank(stacked_singular_values, n_blocks):
    threshold = 1.0 + (n_blocks - 1) / 2.0
    return int(np.sum(stacked_singular_values**2 > threshold))


@dataclass
class DataBlock:
    """One data matrix (features x cases) with row/column labels.

    ``centered`` declares that every row already has mean zero; operations
    that need centering verify the claim instead of re-centering.
    """

    name: str
    matrix: np.ndarray
    feature_names: list = None
    case_ids: list = None
    centered: bool = False

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix, f"block {self.name!r}")
        d, n = self.matrix.shape
        if self.feature_names is None:
            self.feature_names = [f"f{i + 1}" for i in range(d)]
        if self.case_ids is None:
            self.case_ids = [f"case{j + 1}" for j in range(n)]
        self.feature_names = [str(x) for x in self.feature_names]
        self.case_ids = [str(x) for x in self.case_ids]
        if len(self.feature_names) != d:
            raise ValueError(
                f"block {self.name!r}: {len(self.feature_names)} feature names for {d} rows"
            )
        if len(self.case_ids) != n:
            raise ValueError(
                f"block {self.name!r}: {len(self.case_ids)} case ids for {n} columns"
            )

    @property
    def n_features(self):
        return self.matrix.shape[0]

    @property
    def n_cases(self):
        return self.matrix.shape[1]

    def center(self):
        """Return a row-centered copy of this block."""
        return DataBlock(
            name=self.name,
            matrix=center_rows(self.matrix),
            feature_names=list(self.feature_names),
            case_ids=list(self.case_ids),
            centered=True,
        )

    def with_matrix(self, matrix, centered=None):
        """Copy of this block with the matrix replaced (labels kept)."""
        return DataBlock(
            name=self.name,
            matrix=matrix,
            feature_names=list(self.feature_names),
            case_ids=list(self.case_ids),
            centered=self.centered if centered is None else centered,
        )


@dataclass(frozen=True)
class BlockFit:
    """Per-block slice of an AjiveDecomposition."""

    name: str
    joint: np.ndarray              # (d_m, n)
    individual: np.ndarray         # (d_m, n)
    bss: np.ndarray                # (r_I, n), orthonormal rows
    initial_rank: int
    individual_rank: int


@dataclass(frozen=True)
class AjiveDecomposition:
    cns: np.ndarray                     # (r_J, n), orthonormal rows
    joint_rank: int
    stacked_singular_values: np.ndarray
    blocks: tuple                       # of BlockFit, input order
    case_ids: tuple
    auto_centered: tuple                # names of blocks centered on entry
    block_scales: tuple                 # Frobenius scale divided out per block (1.0 = none)

    @property
    def n_blocks(self):
        return len(self.blocks)

    def block_index(self, name):
        for i, b in enumerate(self.blocks):
            if b.name == name:
                return i
        raise ValueError(f"no block named {name!r}")


def _check_centered(matrix, name, tol=1e-8):
    worst = float(np.max(np.abs(matrix.mean(axis=1))))
    if worst > tol:
        raise ValueError(
            f"block {name!r} is flagged centered but has row means up to {worst:.3g}"
        )


def ajive_decompose(blocks, initial_ranks, joint_rank="auto", normalize_blocks=False):
    """Decompose M data blocks into joint, individual, and residual parts.

    Parameters
    ----------
    blocks : list of DataBlock
        At least two, sharing identical case_ids in identical order.  Blocks
        not flagged centered are row-centered on entry and recorded in the
        result's ``auto_centered``.
    initial_ranks : sequence of int
        Per-block rank r_m of the low-rank first step, 1 <= r_m <= min(d_m, n).
    joint_rank : int or "auto"
        Number of common directions r_J.  Must not exceed min(r_m).  "auto"
        keeps stacked singular values whose square exceeds 1 + (M-1)/2.
    normalize_blocks : bool
        When True each centered block is divided by its Frobenius norm before
        the decomposition; the scale factors are recorded.  Default off.

    Returns
    -------
    AjiveDecomposition
    """
    blocks = list(blocks)
    if len(blocks) < 2:
        raise ValueError(f"need at least 2 blocks, got {len(blocks)}")
    names = [b.name for b in blocks]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate block names: {names}")
    case_ids = blocks[0].case_ids
    for b in blocks[1:]:
        if b.case_ids != case_ids:
            raise ValueError(
                f"blocks {blocks[0].name!r} and {b.name!r} do not share case ids"
            )
    n = blocks[0].n_cases
    initial_ranks = [int(r) for r in initial_ranks]
    if len(initial_ranks) != len(blocks):
        raise ValueError(
            f"{len(initial_ranks)} initial ranks for {len(blocks)} blocks"
        )
    for b, r in zip(blocks, initial_ranks):
        cap = min(b.n_features, n)
        if not 1 <= r <= cap:
            raise ValueError(
                f"block {b.name!r}: initial rank {r} outside [1, {cap}]"
            )

    auto_centered = []
    mats = []
    for b in blocks:
        if b.centered:
            _check_centered(b.matrix, b.name)
            mats.append(b.matrix)
        else:
            mats.append(center_rows(b.matrix))
            auto_centered.append(b.name)

    scales = []
    if normalize_blocks:
        scaled = []
        for b, m in zip(blocks, mats):
            s = float(np.linalg.norm(m))
            if s == 0.0:
                raise ValueError(f"block {b.name!r} is all zeros, cannot normalize")
            scaled.append(m / s)
            scales.append(s)
        mats = scaled
    else:
        scales = [1.0] * len(blocks)

    bases = [
        truncated_svd(m, r).right_vectors.T for m, r in zip(mats, initial_ranks)
    ]
    stacked = np.vstack(bases)
    stacked_f = truncated_svd(stacked, min(stacked.shape))
    stacked_singular_values = stacked_f.singular_values

    if joint_rank == "auto":
        r_j = _auto_joint_rank(stacked_singular_values, len(blocks))
    else:
        r_j = int(joint_rank)
    if r_j < 0:
        raise ValueError(f"joint rank must be >= 0, got {r_j}")
    if r_j > min(initial_ranks):
        raise ValueError(
            f"joint rank {r_j} exceeds smallest initial rank {min(initial_ranks)}"
        )

    cns = stacked_f.right_vectors.T[:r_j].copy() if r_j > 0 else np.zeros((0, n))

    fits = []
    for b, m, r in zip(blocks, mats, initial_ranks):
        joint = (m @ cns.T) @ cns if r_j > 0 else np.zeros_like(m)
        remainder = m - joint
        r_i = r - r_j
        if r_i > 0:
            f = truncated_svd(remainder, r_i)
            individual = f.reconstruct()
            bss = f.right_vectors.T.copy()
        else:
            individual = np.zeros_like(m)
            bss = np.zeros((0, n))
        fits.append(
            BlockFit(
                name=b.name,
                joint=joint,
                individual=individual,
                bss=bss,
                initial_rank=r,
                individual_rank=r_i,
            )
        )

    return AjiveDecomposition(
        cns=cns,
        joint_rank=r_j,
        stacked_singular_values=stacked_singular_values,
        blocks=tuple(fits),
        case_ids=tuple(case_ids),
        auto_centered=tuple(auto_centered),
        block_scales=tuple(scales),
    )


def build_indicator_block(labels, class_order, name="indicator", case_ids=None):
    """One-hot class-membership block: one row per class, one column per case.

    Each column carries a single 1 in the row of that case's class.  The
    block is returned uncentered; centering happens at decomposition entry
    like any other block.
    """
    labels = [str(x) for x in labels]
    class_order = [str(x) for x in class_order]
    if len(class_order) < 2:
        raise ValueError(f"need at least 2 classes, got {len(class_order)}")
    if len(set(class_order)) != len(class_order):
        raise ValueError(f"duplicate classes in class_order: {class_order}")
    if len(labels) < 1:
        raise ValueError("labels must be non-empty")
    row_of = {c: i for i, c in enumerate(class_order)}
    unknown = sorted(set(labels) - set(class_order))
    if unknown:
        raise ValueError(f"labels not in class_order: {unknown}")
    if len(set(labels)) < 2:
        raise ValueError(
            "all cases share one class; the indicator block would be rank 0 after centering"
        )
    matrix = np.zeros((len(class_order), len(labels)))
    for j, lab in enumerate(labels):
        matrix[row_of[lab], j] = 1.0
    return DataBlock(
        name=name,
        matrix=matrix,
        feature_names=list(class_order),
        case_ids=case_ids,
        centered=False,
    )


def select_scores(dec, space, block=None, component=0):
    """Return one unit-norm score vector (length n) from a decomposition.

    ``space`` is "joint" (a CNS row; block is ignored) or "individual" (a BSS
    row of the given block index).
    """
    component = int(component)
    if component < 0:
        raise ValueError(f"component must be >= 0, got {component}")
    if space == "joint":
        if component >= dec.joint_rank:
            raise ValueError(
                f"joint component {component} out of range (joint rank {dec.joint_rank})"
            )
        return dec.cns[component].copy()
    if space == "individual":
        if block is None:
            raise ValueError("individual scores need a block index")
        block = int(block)
        if not 0 <= block < dec.n_blocks:
            raise ValueError(f"block index {block} out of range ({dec.n_blocks} blocks)")
        fit = dec.blocks[block]
        if component >= fit.individual_rank:
            raise ValueError(
                f"individual component {component} out of range for block "
                f"{fit.name!r} (individual rank {fit.individual_rank})"
            )
        return fit.bss[component].copy()
    raise ValueError(f"space must be 'joint' or 'individual', got {space!r}")
