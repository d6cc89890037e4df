"""
The command-line round trip
===========================

Every stage is also a ``masort`` subcommand writing plain MOT text files and a
manifest that records inputs, configuration and output hashes.
"""

import json
import tempfile
from pathlib import Path

from masort.cli import main

work = Path(tempfile.mkdtemp())
scenario = work / "scenario.cfg"
scenario.write_text("seed = 2\nn_objects = 4\nn_frames = 60\ndet_noise_std = 1.5\nfp_rate = 0.2\n"
                    "feature_mode = clustered\nfeature_noise = 0.05\n")

main(["synth", str(scenario), "--out", str(work / "seq")])
main(["track", str(work / "seq" / "det.txt"), "--features", str(work / "seq" / "feat.txt"),
      "--out", str(work / "res")])
main(["eval", str(work / "seq" / "gt.txt"), str(work / "res" / "results.txt"), "--out", str(work / "eval")])

manifest = json.loads((work / "res" / "manifest.json").read_text())
print("mode:", manifest["mode"], " theta:", manifest["config"]["theta"])
print("results sha256:", manifest["outputs"]["results"]["sha256"][:16], "...")
