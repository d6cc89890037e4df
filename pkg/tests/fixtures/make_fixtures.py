"""Regenerate the committed metric fixture sequences.

Run from the repository root::

    python tests/fixtures/make_fixtures.py

Each sequence directory under ``tests/fixtures/metrics`` holds ``gt.txt``
and ``pred.txt`` in MOT format.
"""

from pathlib import Path

from masort import synth
from masort.geometry import BBox
from masort.mot_io import write_gt, write_results
from masort.tracker import TrackerConfig, run

ROOT = Path(__file__).parent / "metrics"


def _line(n_frames, oid=1, x0=10.0, y0=20.0, vx=5.0, w=30.0, h=60.0, start=1):
    return {f: (oid, BBox(x0 + vx * (f - start), y0, w, h)) for f in range(start, start + n_frames)}


def _merge(*tracks):
    out = {}
    for t in tracks:
        for f, item in t.items():
            out.setdefault(f, []).append(item)
    return out


def sequences():
    a = _line(20, 1)
    b = _line(20, 2, y0=200.0, vx=-3.0, x0=300.0)
    c = _line(20, 3, y0=400.0, vx=2.0, x0=100.0)
    perfect = _merge(a, b, c)
    yield "perfect", perfect, perfect

    one = _merge(_line(10, 1))
    fp = {f: list(v) for f, v in one.items()}
    fp[5] = fp[5] + [(9, BBox(400.0, 400.0, 30.0, 60.0))]
    yield "single_fp", one, fp

    g1, g2 = _line(10, 1), _line(10, 2, y0=300.0)
    gt = _merge(g1, g2)
    swapped = {}
    for f, items in gt.items():
        swapped[f] = [((3 - i) if f >= 6 else i, b) for i, b in items]
    yield "id_swap", gt, swapped

    gt = _merge(_line(10, 1))
    split = {f: [(1 if f <= 5 else 2, b) for _, b in items] for f, items in gt.items()}
    yield "split_track", gt, split

    for seed in (11, 12):
        cfg = synth.ScenarioConfig(seed=seed, n_objects=6, n_frames=60, det_noise_std=3.0, fp_rate=0.5,
                                   fn_rate=0.1, feature_mode="clustered", cos_floor=0.8, feature_noise=0.05,
                                   motion="sinusoidal-crossing")
        sc = synth.generate(cfg)
        yield f"noisy_{seed}", sc.gt, run(sc.detections, TrackerConfig())


def main():
    for name, gt, pred in sequences():
        d = ROOT / name
        d.mkdir(parents=True, exist_ok=True)
        write_gt(d / "gt.txt", gt)
        write_results(d / "pred.txt", pred)
        print("wrote", d)


if __name__ == "__main__":
    main()
