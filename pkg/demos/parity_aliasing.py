"""Why networks fail on parity: the training sample invents low frequencies.

On the full cube the parity function has no power near k = 0, but a random
subset of 200 points does.  A network trained on the subset fits these
artificial low frequencies and misses the true peak at k = 1/4.

    python3 demos/parity_aliasing.py
"""

import tempfile

from fpl._runtime import tune_allocator
from fpl.experiments import run_experiment

tune_allocator()
with tempfile.TemporaryDirectory() as out:
    res = run_experiment("parity", {"epochs": "1000"}, out).results
for key, value in res.items():
    print(f"{key}: {value}")
