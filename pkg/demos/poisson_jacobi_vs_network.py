"""Jacobi and a variational network converge in opposite frequency order.

Jacobi damps mode k by cos(k pi / n) per sweep, so high frequencies of the
error vanish first.  A network trained on the variational energy picks up
low frequencies first.  Both are run on the same Poisson problem on [-1, 1].

    python3 demos/poisson_jacobi_vs_network.py [epochs]
"""

import sys

import numpy as np

from fpl import poisson
from fpl._runtime import tune_allocator

tune_allocator()
epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
n = 1000

lam, _ = poisson.jacobi_spectrum(n)
print("Jacobi contraction factors |lambda_k| for k = 1, 10, 100, 400:",
      np.round(np.abs(lam[[0, 9, 99, 399]]), 6))

problem, peaks = poisson.reference_solution(n)
print("solution peaks (cycles per unit):", peaks)

jac = poisson.jacobi_trace(problem, n, None, 60000, 5000, peaks)
print(f"\n{'sweep':>7} " + " ".join(f"dF({p:g})".rjust(9) for p in peaks))
for s, d in zip(jac.step, jac.delta):
    print(f"{s:7d} " + " ".join(f"{v:9.3f}" for v in d))

dnn = poisson.dnn_solve(problem, poisson.PRESETS["desk-poisson"], epochs, n, record_every=250,
                        peaks=peaks)
print(f"\n{'epoch':>7} " + " ".join(f"dF({p:g})".rjust(9) for p in peaks) + "  sup-err")
for e, d, err in zip(dnn.spectrum.epochs, dnn.spectrum.delta, dnn.sup_norm):
    print(f"{e:7d} " + " ".join(f"{v:9.3f}" for v in d) + f"  {err:7.3f}")
