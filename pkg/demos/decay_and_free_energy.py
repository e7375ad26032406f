"""Free renewal decay estimate and the homogeneous free energy."""
from pinlab import PolymerParams, build_kernel
from pinlab.experiments import decay_check, free_energy_estimate, homogeneous_free_energy

kernel = build_kernel(0.5, horizon=4096)

rep = decay_check(kernel, 0.05, list(range(500, 4001, 500)))
for r in rep.rows:
    print(f"n={r['n']:5d}  P={r['probability']:.3e}  bound={r['bound']:.3e}  holds={r['holds']}")
print(f"fitted slope {rep.footer['fitted_slope']:.3f}, exponent {rep.footer['decay_exponent']:.3f}")

fe = free_energy_estimate(kernel, PolymerParams(0.0, 1.0), [1024, 2048, 4096])
print(f"free energy estimate {fe.footer['final_estimate']:.10f}, "
      f"root {homogeneous_free_energy(kernel, 1.0):.10f}")
