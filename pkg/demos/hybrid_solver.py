"""A network as initial guess for Jacobi.

The network removes the slow low-frequency error cheaply; Jacobi then
removes the high-frequency remainder quickly.  Costs are counted in
floating point operations so the comparison does not depend on the machine.

    python3 demos/hybrid_solver.py
"""

from fpl import poisson
from fpl._runtime import tune_allocator
from fpl.experiments import hybrid_verdict

tune_allocator()
eps = 5e-2
problem, peaks = poisson.reference_solution(1000)
runs = poisson.hybrid_solve(problem, poisson.PRESETS["desk-hybrid"],
                            [0, 50, 200, 800, None], dnn_epochs=1500,
                            jacobi_sweeps_budget=200000, record_every=10,
                            jacobi_record_every=1000, peaks=peaks)
print(f"cost to reach sup-norm error {eps}:")
for m, run in runs.items():
    label = "network only" if m is None else ("Jacobi only" if m == 0 else f"M = {m} epochs")
    print(f"  {label:<15} {run.cost_to_reach(eps):.3g}")
print(hybrid_verdict(runs, eps))
