"""Monte-Carlo check that low-frequency gradients dominate for small weights.

For a one-hidden-layer tanh network the frequency loss L(k) has closed-form
gradients carrying a factor exp(-|pi k / 2 w|).  Sampling hidden weights
uniformly from a ball of radius delta, we count how often every gradient at
k1 = 1 exceeds the one at k2 = 3.

    python3 demos/priority_theorems.py
"""

from fpl import theory
from fpl._runtime import tune_allocator
from fpl.experiments import EXPERIMENTS, theory_rows

tune_allocator()
print("transform of tanh at k = 1:", theory.tanh_unit_ft(1, 1, 0, 1.0))
cfg = EXPERIMENTS["theory"].resolve({"samples": "20000"})
print(f"\n{'delta':>6} {'dominance':>10} {'95% interval':>20} {'faster decay':>13}")
for r in theory_rows(cfg):
    print(f"{r['delta']:6g} {r['ratio_thm1']:10.4f}   [{r['ci_lo']:.4f}, {r['ci_hi']:.4f}] "
          f"{r['ratio_thm2']:12.4f}")
