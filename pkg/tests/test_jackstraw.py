import numpy as np
import pytest
import scipy.stats
from statsmodels.stats.multitest import multipletests

from jive_jackstraw.ajive import DataBlock
from jive_jackstraw.jackstraw import (
    JackstrawConfig,
    JackstrawResult,
    LoadingTarget,
    ReplicateError,
    _null_engine,
    adjust_pvalues,
    empirical_pvalues,
    f_statistic,
    jackstraw_run,
    loading_vector,
    null_samples,
    observed_f,
    permute_rows,
)
from jive_jackstraw.simulation import ToyConfig, simulate_toy

from conftest import f_oracle


def _noise_block(seed, d=30, n=24, name="a"):
    rng = np.random.default_rng(seed)
    return DataBlock(name=name, matrix=rng.normal(size=(d, n))).center()


def test_f_statistic_frozen_value():
    y = np.array([1.0, -1.0, 2.0, -2.0])
    v = np.array([0.5, -0.5, 0.5, -0.5])
    # sse0 = 10, fit 3v leaves sse1 = 1, so F = 9 / (1/3) = 27
    assert f_statistic(y, v) == pytest.approx(27.0, abs=1e-12)


def test_f_statistic_matches_lstsq_oracle():
    rng = np.random.default_rng(20)
    for _ in range(50):
        n = int(rng.integers(8, 40))
        r = int(rng.integers(1, 4))
        v = rng.normal(size=(n, r))
        y = rng.normal(size=n)
        y -= y.mean()
        mine = f_statistic(y, v if r > 1 else v[:, 0])
        ref = f_oracle(y, v)
        assert mine == pytest.approx(ref, rel=1e-10)


def test_f_statistic_sentinels():
    v = np.array([1.0, -1.0, 2.0, -2.0]) / np.sqrt(10.0)
    assert f_statistic(3.0 * v, v) == np.inf
    assert f_statistic(np.zeros(4), v) == 0.0


def test_f_statistic_validation():
    v = np.array([0.5, -0.5, 0.5, -0.5])
    with pytest.raises(ValueError):
        f_statistic(np.array([1.0, 1.0, 1.0, 2.0]), v)     # not centered
    with pytest.raises(ValueError):
        f_statistic(np.array([1.0, -1.0]), np.ones((2, 2)))  # n <= r
    dup = np.column_stack([v, v])
    with pytest.raises(ValueError):
        f_statistic(np.array([1.0, -1.0, 1.0, -1.0]), dup)  # singular Gram
    with pytest.raises(ValueError):
        f_statistic(np.array([1.0, -1.0, 1.0, -1.0]), np.array([1.0, np.nan, 0.0, 0.0]))


def test_observed_f_matches_rowwise_f():
    rng = np.random.default_rng(21)
    n = 18
    v = rng.normal(size=n)
    v -= v.mean()
    mat = rng.normal(size=(9, n))
    mat[3] = 0.0                      # zero response row
    mat[5] = 2.5 * v                  # perfect fit row
    mat -= mat.mean(axis=1, keepdims=True)
    block = DataBlock(name="x", matrix=mat, centered=True)
    out = observed_f(block, v)
    assert out[3] == 0.0
    assert out[5] == np.inf
    for i in (0, 1, 2, 4, 6, 7, 8):
        assert out[i] == pytest.approx(f_statistic(mat[i], v), rel=1e-12)


def test_loading_vector_matches_product_and_validates():
    block = _noise_block(22)
    v = np.random.default_rng(1).normal(size=block.n_cases)
    v /= np.linalg.norm(v)
    assert np.allclose(loading_vector(block, v), block.matrix @ v)
    with pytest.raises(ValueError):
        loading_vector(block, 2.0 * v)                    # not unit norm
    with pytest.raises(ValueError):
        loading_vector(block, v[:-1])                     # wrong length
    raw = DataBlock(name="r", matrix=np.ones((3, 4)))
    unit = np.array([0.5, 0.5, 0.5, 0.5])
    with pytest.raises(ValueError):
        loading_vector(raw, unit)                         # block not centered


def test_permute_rows_touches_only_selected_rows():
    block = _noise_block(23)
    rng = np.random.default_rng(5)
    rows = np.array([2, 7, 11])
    shuffled = permute_rows(block, rows, rng)
    assert shuffled.centered
    assert shuffled is not block
    untouched = np.setdiff1d(np.arange(block.n_features), rows)
    assert np.array_equal(shuffled.matrix[untouched], block.matrix[untouched])
    for i in rows:
        assert not np.array_equal(shuffled.matrix[i], block.matrix[i])
        assert np.allclose(np.sort(shuffled.matrix[i]), np.sort(block.matrix[i]))
        # row means survive the shuffle, so the block stays centered
        assert abs(shuffled.matrix[i].mean()) < 1e-12


def test_permute_rows_deterministic_and_validated():
    block = _noise_block(24)
    a = permute_rows(block, [0, 3], np.random.default_rng(99))
    b = permute_rows(block, [0, 3], np.random.default_rng(99))
    assert np.array_equal(a.matrix, b.matrix)
    with pytest.raises(ValueError):
        permute_rows(block, [], np.random.default_rng(0))
    with pytest.raises(ValueError):
        permute_rows(block, [1, 1], np.random.default_rng(0))
    with pytest.raises(ValueError):
        permute_rows(block, [block.n_features], np.random.default_rng(0))
    with pytest.raises(ValueError):
        permute_rows(block, [-1], np.random.default_rng(0))


def test_empirical_pvalues_frozen_tie_handling():
    null = np.array([1.0, 2.0, 3.0, 2.0])
    p = empirical_pvalues(np.array([2.0, 0.5, 4.0]), null)
    # ties count toward the null: three of four draws are >= 2.0
    assert np.allclose(p, [0.75, 1.0, 0.0])
    smoothed = empirical_pvalues(np.array([2.0, 0.5, 4.0]), null, smoothing=True)
    assert np.allclose(smoothed, [0.8, 1.0, 0.2])


def test_empirical_pvalues_infinite_observation_is_zero():
    null = np.array([1.0, np.inf, 3.0])
    p = empirical_pvalues(np.array([np.inf, 2.0]), null)
    assert p[0] == 0.0
    assert p[1] == pytest.approx(2.0 / 3.0)
    smoothed = empirical_pvalues(np.array([np.inf]), null, smoothing=True)
    assert smoothed[0] == 0.0


def test_empirical_pvalues_match_brute_force():
    rng = np.random.default_rng(25)
    obs = rng.normal(size=40) ** 2
    null = rng.normal(size=300) ** 2
    p = empirical_pvalues(obs, null)
    brute = np.array([(null >= f).mean() for f in obs])
    assert np.allclose(p, brute)


def test_empirical_pvalues_validation():
    with pytest.raises(ValueError):
        empirical_pvalues(np.array([]), np.array([1.0]))
    with pytest.raises(ValueError):
        empirical_pvalues(np.array([1.0]), np.array([]))
    with pytest.raises(ValueError):
        empirical_pvalues(np.array([np.nan]), np.array([1.0]))


def test_adjust_bonferroni_frozen():
    out = adjust_pvalues(np.array([0.01, 0.5, 0.002]), "bonferroni")
    assert np.allclose(out, [0.03, 1.0, 0.006])


def test_adjust_bh_frozen_stepup():
    out = adjust_pvalues(np.array([0.01, 0.02, 0.03, 0.04]), "bh")
    assert np.allclose(out, [0.04, 0.04, 0.04, 0.04])


def test_adjust_bh_matches_statsmodels():
    rng = np.random.default_rng(26)
    for _ in range(10):
        p = rng.uniform(size=int(rng.integers(3, 60)))
        mine = adjust_pvalues(p, "bh")
        ref = multipletests(p, method="fdr_bh")[1]
        assert np.allclose(mine, ref, atol=1e-12)


def test_adjust_none_and_validation():
    p = np.array([0.2, 0.8])
    out = adjust_pvalues(p, "none")
    assert np.array_equal(out, p)
    assert out is not p
    with pytest.raises(ValueError):
        adjust_pvalues(np.array([1.5]), "bonferroni")
    with pytest.raises(ValueError):
        adjust_pvalues(p, "holm")


def test_bonferroni_never_beats_bh():
    rng = np.random.default_rng(27)
    p = rng.uniform(size=50) ** 2
    bon = adjust_pvalues(p, "bonferroni")
    bh = adjust_pvalues(p, "bh")
    assert np.all(bon >= bh - 1e-12)


def test_config_validation_and_alias():
    assert JackstrawConfig(k_rows=1, n_reps=10, mode="approx").mode == "approximate"
    with pytest.raises(ValueError):
        JackstrawConfig(k_rows=0, n_reps=10)
    with pytest.raises(ValueError):
        JackstrawConfig(k_rows=1, n_reps=0)
    with pytest.raises(ValueError):
        JackstrawConfig(k_rows=1, n_reps=10, mode="exact")
    with pytest.raises(ValueError):
        JackstrawConfig(k_rows=1, n_reps=10, alpha=1.0)
    with pytest.raises(ValueError):
        JackstrawConfig(k_rows=1, n_reps=10, adjustment="fdr")
    with pytest.raises(ValueError):
        JackstrawConfig(k_rows=1, n_reps=10, seed=-1)
    cfg = JackstrawConfig(k_rows=2, n_reps=50, smoothing=True, adjustment="bh")
    assert JackstrawConfig.from_dict(cfg.to_dict()) == cfg


def test_target_validation_and_round_trip():
    with pytest.raises(ValueError):
        LoadingTarget(space="residual")
    with pytest.raises(ValueError):
        LoadingTarget(space="joint", block=-1)
    with pytest.raises(ValueError):
        LoadingTarget(space="joint", component=-2)
    t = LoadingTarget(space="individual", block=1, component=None)
    assert LoadingTarget.from_dict(t.to_dict()) == t


def test_k_rows_capped_by_feature_count():
    blocks = [_noise_block(28, name="a"), _noise_block(29, name="b")]
    config = JackstrawConfig(k_rows=16, n_reps=5)   # 2*16 > 30 features
    with pytest.raises(ValueError):
        null_samples(blocks, LoadingTarget("joint"), (2, 2), 1, config)


def test_small_null_warns():
    blocks = [_noise_block(30, name="a"), _noise_block(31, name="b")]
    config = JackstrawConfig(k_rows=1, n_reps=5)
    with pytest.warns(UserWarning, match="below the recommended"):
        null_samples(blocks, LoadingTarget("joint"), (2, 2), 1, config)


@pytest.mark.filterwarnings("ignore:S\\*K")
def test_null_engine_deterministic_across_threads():
    blocks = [_noise_block(32, d=40, name="a"), _noise_block(33, d=40, name="b")]
    config = JackstrawConfig(k_rows=2, n_reps=30, seed=7)
    target = LoadingTarget("joint")
    one = null_samples(blocks, target, (2, 2), 1, config, threads=1)
    three = null_samples(blocks, target, (2, 2), 1, config, threads=3)
    eight = null_samples(blocks, target, (2, 2), 1, config, threads=8)
    assert one.shape == (60,)
    assert np.array_equal(one, three)
    assert np.array_equal(one, eight)
    # a different seed moves the null
    other = null_samples(
        blocks, target, (2, 2), 1, JackstrawConfig(k_rows=2, n_reps=30, seed=8)
    )
    assert not np.array_equal(one, other)


@pytest.mark.filterwarnings("ignore:S\\*K")
def test_null_mean_near_f_distribution_mean():
    # permuted rows against a fixed score are classic F(1, n-1) material
    blocks = [
        _noise_block(34, d=60, n=20, name="a"),
        _noise_block(35, d=60, n=20, name="b"),
    ]
    config = JackstrawConfig(k_rows=3, n_reps=200, seed=0)
    null = null_samples(blocks, LoadingTarget("joint"), (2, 2), 1, config)
    assert null.shape == (600,)
    assert np.all(np.isfinite(null))
    # F(1, 19) has mean 19/17 ~ 1.118
    assert 0.9 < float(null.mean()) < 1.4


@pytest.mark.filterwarnings("ignore:S\\*K")
def test_single_replicate_single_row():
    blocks = [_noise_block(36, name="a"), _noise_block(37, name="b")]
    config = JackstrawConfig(k_rows=1, n_reps=1, seed=3)
    null = null_samples(blocks, LoadingTarget("joint"), (2, 2), 1, config)
    assert null.shape == (1,)
    assert np.isfinite(null[0]) and null[0] >= 0.0


@pytest.mark.filterwarnings("ignore:S\\*K")
def test_true_support_dominates_null():
    blocks, _ = simulate_toy(ToyConfig(seed=1))
    config = JackstrawConfig(k_rows=1, n_reps=300, seed=1)
    target = LoadingTarget("joint", block=0, component=0)
    null = null_samples(blocks, target, (2, 2), 1, config)
    from jive_jackstraw.jackstraw import _prepare

    prepared, _, predictor = _prepare(blocks, target, (2, 2), 1)
    obs = observed_f(prepared[0], predictor)
    stat = scipy.stats.mannwhitneyu(obs[:80], null, alternative="greater")
    assert stat.pvalue < 1e-10


def test_jackstraw_run_recovers_toy_joint_support():
    blocks, truth = simulate_toy(ToyConfig(seed=0))
    config = JackstrawConfig(k_rows=1, n_reps=1200, seed=0)
    res = jackstraw_run(blocks, LoadingTarget("joint", 0, 0), (2, 2), 1, config)
    assert np.array_equal(res.significant, truth.joint_masks[0])
    assert int(res.significant.sum()) == 80
    assert np.all(res.p_adjusted[truth.joint_masks[0]] <= 0.05)
    assert res.f_observed.shape == (120,)
    assert res.f_null.shape == (1200,)
    # true-support rows carry much larger F than the rest
    assert res.f_observed[:80].min() > res.f_observed[80:].max()


@pytest.mark.filterwarnings("ignore:S\\*K")
def test_full_mode_runs_and_is_deterministic():
    blocks, _ = simulate_toy(ToyConfig(seed=2))
    config = JackstrawConfig(k_rows=1, n_reps=30, mode="full", seed=4)
    target = LoadingTarget("joint", 0, 0)
    a = jackstraw_run(blocks, target, (2, 2), 1, config)
    b = jackstraw_run(blocks, target, (2, 2), 1, config, threads=4)
    assert np.array_equal(a.f_null, b.f_null)
    assert np.array_equal(a.p_raw, b.p_raw)
    # the refit makes full-mode nulls differ from the approximate ones
    approx = jackstraw_run(
        blocks, target, (2, 2), 1, JackstrawConfig(k_rows=1, n_reps=30, seed=4)
    )
    assert not np.array_equal(a.f_null, approx.f_null)


@pytest.mark.filterwarnings("ignore:S\\*K")
def test_whole_subspace_target():
    blocks, truth = simulate_toy(ToyConfig(seed=3))
    config = JackstrawConfig(k_rows=2, n_reps=120, seed=5)
    res = jackstraw_run(blocks, LoadingTarget("individual", 1, None), (2, 2), 1, config)
    assert res.f_observed.shape == (120,)
    # block 2's individual support is rows 41..120
    detected = np.flatnonzero(res.significant)
    assert detected.size > 0
    assert np.all(detected >= 40)


def test_result_round_trip():
    blocks, _ = simulate_toy(ToyConfig(seed=4))
    config = JackstrawConfig(k_rows=1, n_reps=1200, seed=6, adjustment="bh")
    res = jackstraw_run(blocks, LoadingTarget("joint", 0, 0), (2, 2), 1, config)
    back = JackstrawResult.from_dict(res.to_dict())
    assert np.array_equal(back.f_observed, res.f_observed)
    assert np.array_equal(back.f_null, res.f_null)
    assert np.array_equal(back.significant, res.significant)
    assert back.target == res.target
    assert back.config == res.config


def test_missing_scores_are_reported():
    blocks = [_noise_block(38, name="a"), _noise_block(39, name="b")]
    config = JackstrawConfig(k_rows=1, n_reps=10)
    with pytest.raises(ValueError):
        # joint rank 0 leaves nothing to test in joint space
        null_samples(blocks, LoadingTarget("joint"), (2, 2), 0, config)
    with pytest.raises(ValueError):
        # individual rank is 0 when the initial rank equals the joint rank
        null_samples(blocks, LoadingTarget("individual", 0, 0), (2, 2), 2, config)
    with pytest.raises(ValueError):
        null_samples(blocks, LoadingTarget("joint", 0, 5), (2, 2), 1, config)
    with pytest.raises(ValueError):
        null_samples(blocks, LoadingTarget("joint", block=7), (2, 2), 1, config)


def test_replicate_errors_carry_the_index():
    block = _noise_block(40)
    config = JackstrawConfig(k_rows=1, n_reps=4, mode="full", seed=0)

    def refit(_permuted):
        raise ValueError("boom")

    with pytest.raises(ReplicateError) as err:
        with pytest.warns(UserWarning):
            _null_engine(block, config, None, refit)
    assert 0 <= err.value.replicate < 4
    assert "boom" in str(err.value)
