"""Low frequencies first: a tanh network fitting sin(x) + sin(3x) + sin(5x).

The target has three spectral peaks.  We train a 1-200-1 network with Adam
and watch the relative error Delta_F at each peak.  The lowest peak is
captured within a few hundred epochs while the highest one takes tens of
thousands.

    python3 demos/fprinciple_1d.py [epochs]
"""

import sys

import numpy as np

from fpl import datasets, nn, spectral
from fpl._runtime import tune_allocator
from fpl.experiments import threshold_crossing_epochs

tune_allocator()
epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 20000

data = datasets.synth_1d("appA")
y = data.labels[:, 0]
half = spectral.dft_1d(y, np.arange(y.size // 2 + 1))
peaks = spectral.select_peak_frequencies(half, 3)
print("DFT peaks of the target (cycles over the sample window):", peaks)

ks = np.array(peaks, dtype=float)
trace = spectral.SpectrumTrace(ks, spectral.dft_1d(y, ks))
params = nn.init_network([1, 200, 1], "tanh", init_std=0.1, seed=0)
config = nn.TrainConfig("mse", "adam", 2e-4, "full", epochs, 0.1, 0, 500)
run = nn.train(params, data.inputs, data.labels, config,
               probes={"spectrum": lambda e, p: trace.add(e, spectral.dft_1d(nn.forward(p, data.inputs)[:, 0], ks))})

print(f"\n{'epoch':>7} " + " ".join(f"dF(k={k:g})".rjust(10) for k in ks))
for e, row in zip(trace.epochs, trace.delta):
    if e % 2500 == 0 or e == trace.epochs[-1]:
        print(f"{e:7d} " + " ".join(f"{v:10.3f}" for v in row))

cross = threshold_crossing_epochs(trace, 0.3)
print("\nfirst epoch with Delta_F < 0.3:", {f"k={k:g}": v for k, v in cross.items()})
