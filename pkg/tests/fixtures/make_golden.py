"""Produce golden metric values with the public TrackEval toolkit.

Needs ``trackeval`` importable (e.g. ``pip install trackeval`` into a
scratch environment); it is not a dependency of this package. Files are
parsed here with NumPy and boxes compared with TrackEval's own IoU, so
nothing from ``masort`` enters the golden values.

    python tests/fixtures/make_golden.py
"""

import json
from pathlib import Path

import numpy as np
from trackeval.datasets._base_dataset import _BaseDataset
from trackeval.metrics import CLEAR, HOTA, Identity

ROOT = Path(__file__).parent / "metrics"


def _load(path):
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    return arr[:, :6] if arr.size else np.zeros((0, 6))


def _data(gt_rows, pr_rows):
    frames = sorted(set(gt_rows[:, 0].astype(int)) | set(pr_rows[:, 0].astype(int)))
    gt_ids_all = sorted(set(gt_rows[:, 1].astype(int)))
    pr_ids_all = sorted(set(pr_rows[:, 1].astype(int)))
    gmap = {v: i for i, v in enumerate(gt_ids_all)}
    pmap = {v: i for i, v in enumerate(pr_ids_all)}
    data = {"gt_ids": [], "tracker_ids": [], "similarity_scores": [],
            "num_gt_ids": len(gmap), "num_tracker_ids": len(pmap),
            "num_gt_dets": len(gt_rows), "num_tracker_dets": len(pr_rows), "num_timesteps": len(frames)}
    for f in frames:
        g = gt_rows[gt_rows[:, 0] == f]
        p = pr_rows[pr_rows[:, 0] == f]
        data["gt_ids"].append(np.array([gmap[int(i)] for i in g[:, 1]], dtype=int))
        data["tracker_ids"].append(np.array([pmap[int(i)] for i in p[:, 1]], dtype=int))
        data["similarity_scores"].append(_BaseDataset._calculate_box_ious(g[:, 2:6], p[:, 2:6], box_format="xywh"))
    return data


def main():
    for d in sorted(p for p in ROOT.iterdir() if p.is_dir()):
        data = _data(_load(d / "gt.txt"), _load(d / "pred.txt"))
        h = HOTA().eval_sequence(data)
        c = CLEAR({"THRESHOLD": 0.5, "PRINT_CONFIG": False}).eval_sequence(data)
        i = Identity({"THRESHOLD": 0.5, "PRINT_CONFIG": False}).eval_sequence(data)
        golden = {
            "HOTA": float(np.mean(h["HOTA"])),
            "DetA": float(np.mean(h["DetA"])),
            "AssA": float(np.mean(h["AssA"])),
            "HOTA_alpha": [float(v) for v in h["HOTA"]],
            "DetA_alpha": [float(v) for v in h["DetA"]],
            "AssA_alpha": [float(v) for v in h["AssA"]],
            "MOTA": float(c["MOTA"]),
            "TP": int(c["CLR_TP"]),
            "FP": int(c["CLR_FP"]),
            "FN": int(c["CLR_FN"]),
            "IDSW": int(c["IDSW"]),
            "IDF1": float(i["IDF1"]),
            "IDTP": int(i["IDTP"]),
            "IDFP": int(i["IDFP"]),
            "IDFN": int(i["IDFN"]),
        }
        (d / "golden.json").write_text(json.dumps(golden, indent=2) + "\n", encoding="utf-8")
        print(d.name, {k: golden[k] for k in ("HOTA", "MOTA", "IDF1", "IDSW")})


if __name__ == "__main__":
    main()
