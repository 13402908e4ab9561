"""Filtering method on MNIST: the smooth part of the labels is learned first.

Labels are split by a Gaussian filter in input space into a low- and a
high-frequency part.  During training the relative error of the low part
drops below that of the high part and stays there.

    python3 demos/mnist_filtering.py IMAGES_IDX LABELS_IDX
"""

import sys

from fpl._runtime import tune_allocator
from fpl.experiments import run_experiment

tune_allocator()
if len(sys.argv) != 3:
    sys.exit(__doc__)
res = run_experiment("filter", {"images": sys.argv[1], "labels": sys.argv[2],
                                "epochs": "200"}, "mnist-demo").results
print("low part ahead of high part:", res["low_before_high"])
print("turning epochs of the filtered distance:", res["turning_epochs"])
print("per-epoch errors: mnist-demo/filter.csv")
