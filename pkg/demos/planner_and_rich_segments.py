"""Parameter chain for log-many returns, then a planted rich segment.

Below the entropy-cost threshold the chain is infeasible; above it the
planner emits (gamma, kappa, m, nu).  Planting the tilt level on the segment
J_n shows the polymer visiting it.
"""
from pinlab import GaussianLaw, PolymerParams, build_kernel, h_t
from pinlab.experiments import log_returns_experiment, theorem2_planner

law = GaussianLaw()
kernel = build_kernel(0.5, horizon=2000)
eps = 0.5

for beta in (2.0, 3.5):
    h = h_t(law, beta, eps, kernel.alpha) + 0.1
    plan = theorem2_planner(law, kernel, eps, beta, h)
    if not plan.feasible:
        print(f"beta={beta}: infeasible ({plan.infeasibility_reason})")
        continue
    print(f"beta={beta}: gamma={plan.gamma:.6f} kappa={plan.kappa:.6f} m={plan.m} nu={plan.nu:.3e}")

params = PolymerParams(3.5, plan.h)
rep = log_returns_experiment(kernel, params, [500, 1000, 2000], plan=plan, nu_values=(0.5,),
                             planted=True)
for r in (r for r in rep.rows if r["nu"] == 0.5):
    print(f"n={r['n']:5d} |J|={r['segment_size']}  E[contacts in J]={r['expected_contacts_in_J']:.3f}"
          f"  E[contacts in [1,n]]={r['expected_contacts']:.2f}")
