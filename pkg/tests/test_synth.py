import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from masort.appearance import uniformity
from masort.errors import ConfigurationError
from masort.metrics import evaluate
from masort.synth import (
    ScenarioConfig,
    cluster_features,
    generate,
    generate_proposal_pool,
    pairwise_cosines,
)
from masort.tracker import TrackerConfig, run


def test_same_seed_same_files(tmp_path):
    cfg = ScenarioConfig(seed=4, n_objects=4, n_frames=30, det_noise_std=2.0, fp_rate=0.5, fn_rate=0.1,
                         feature_noise=0.05, occlusion_windows=((1, 5, 9),))
    a = generate(cfg).write(tmp_path / "a")
    b = generate(cfg).write(tmp_path / "b")
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes()
    c = generate(ScenarioConfig(**{**cfg.to_dict(), "seed": 5})).write(tmp_path / "c")
    assert c["det"].read_bytes() != a["det"].read_bytes()


def test_noiseless_detections_equal_gt():
    sc = generate(ScenarioConfig(seed=1, n_objects=3, n_frames=20))
    for f, items in sc.gt.items():
        gt_boxes = {oid: b for oid, b in items}
        for src, d in zip(sc.sources[f], sc.detections[f]):
            assert d.bbox == gt_boxes[src]
        assert len(sc.detections[f]) == len(items)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 8), st.sampled_from(["constant-velocity", "sinusoidal-crossing"]))
def test_boxes_inside_arena(seed, n, motion):
    cfg = ScenarioConfig(seed=seed, n_objects=n, n_frames=25, motion=motion, det_noise_std=5.0, fp_rate=1.0)
    sc = generate(cfg)
    aw, ah = cfg.arena
    for items in sc.gt.values():
        for _, b in items:
            assert 0 <= b.x and b.x2 <= aw + 1e-9 and 0 <= b.y and b.y2 <= ah + 1e-9
    for dets in sc.detections.values():
        for d in dets:
            assert 0 <= d.bbox.x and d.bbox.x2 <= aw + 1e-9 and 0 <= d.bbox.y and d.bbox.y2 <= ah + 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 10))
def test_identical_mode_is_fully_uniform(seed, n):
    sc = generate(ScenarioConfig(seed=seed, n_objects=n, n_frames=3, feature_mode="identical", fp_rate=1.0))
    for dets in sc.detections.values():
        assert uniformity([d.feature for d in dets]).mu_det == 1.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 16))
def test_distinct_mode_near_orthogonal(seed, n):
    sc = generate(ScenarioConfig(seed=seed, n_objects=n, n_frames=2, feature_dim=16))
    cos = pairwise_cosines(sc.object_features)
    assert np.abs(cos - np.eye(n)).max() <= 0.05


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12), st.floats(0.3, 0.99))
def test_clustered_mode_respects_floor(seed, n, floor):
    sc = generate(ScenarioConfig(seed=seed, n_objects=n, n_frames=2, feature_mode="clustered", cos_floor=floor))
    assert pairwise_cosines(sc.object_features).min() >= floor - 1e-12


def test_cluster_features_low_dimension_fallback():
    rng = np.random.Generator(np.random.PCG64(0))
    members, outliers = cluster_features(rng, 10, 4, 0.8)
    assert outliers.shape == (0, 4)
    assert pairwise_cosines(members).min() >= 0.8 - 1e-12
    with pytest.raises(ConfigurationError):
        cluster_features(rng, 10, 4, 0.8, n_outliers=2)


def test_occlusion_window_drops_detections():
    sc = generate(ScenarioConfig(seed=2, n_objects=2, n_frames=15, occlusion_windows=((1, 4, 8),)))
    for f in range(4, 9):
        assert 1 not in sc.sources[f]
    assert 1 in sc.sources[3] and 1 in sc.sources[9]


def test_rates_shape_counts():
    sc = generate(ScenarioConfig(seed=0, n_objects=5, n_frames=400, fn_rate=0.2, fp_rate=1.0))
    srcs = [s for v in sc.sources.values() for s in v]
    misses = 5 * 400 - sum(1 for s in srcs if s > 0)
    assert 0.15 < misses / 2000 < 0.25
    assert 0.85 < sum(1 for s in srcs if s == 0) / 400 < 1.15


@pytest.mark.parametrize("kwargs", [
    {"max_size": (700.0, 50.0)},
    {"min_size": (50.0, 50.0), "max_size": (40.0, 60.0)},
    {"motion": "teleport"},
    {"feature_mode": "fuzzy"},
    {"fn_rate": 1.5},
    {"occlusion_windows": ((9, 1, 2),)},
    {"n_frames": 0},
])
def test_bad_configs(kwargs):
    with pytest.raises(ConfigurationError):
        ScenarioConfig(**kwargs)


def test_closed_loop_noiseless_is_perfect():
    sc = generate(ScenarioConfig(seed=0, n_objects=5, n_frames=100))
    r = evaluate(sc.gt, run(sc.detections, TrackerConfig(min_hits=1)))
    assert (r.hota, r.mota, r.idf1) == (1.0, 1.0, 1.0)


def test_proposal_pool_margins():
    pool = generate_proposal_pool(seed=3, n_frames=2)
    assert set(pool.labels) == {"class", "distractor", "background"}
    for frame in (1, 2):
        items = [(p, lab) for p, lab in zip(pool.proposals, pool.labels) if p.frame == frame]
        cls = [p for p, lab in items if lab == "class"]
        assert min(p.s_spec for p in cls) > max(p.s_spec for p, lab in items if lab != "class")
        assert all(p.s_gen < 0.3 for p, lab in items if lab == "background")
        assert all(p.s_gen >= 0.3 for p, lab in items if lab != "background")
