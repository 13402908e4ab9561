"""Memorizing a picture from every other column.

A 2-d network learns the gray levels of the odd columns.  With a small
initialization the learned image is smooth and fills the held-out columns
sensibly; with a large one it picks up high frequencies and generalizes
worse.  Output images land in ./image-demo as PGM files.

    python3 demos/image_memorization.py [path/to/image.pgm]
"""

import sys

from fpl._runtime import tune_allocator
from fpl.experiments import run_experiment

tune_allocator()
overrides = {"epochs": "1000"}
if len(sys.argv) > 1:
    overrides["image"] = sys.argv[1]
res = run_experiment("image2d", overrides, "image-demo").results
print("peaks on the middle row:", res["peaks"])
for std, r in res["runs"].items():
    print(f"init std {std}: train loss {r['train_loss']:.4f}, held-out MSE {r['test_mse']:.4f}")
