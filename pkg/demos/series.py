"""Summed constrained partition series in the delocalized phase.

Partial sums flatten as n_max grows, and the index-reversed series has the
same law as the forward one.
"""
from pinlab import GaussianLaw, PolymerParams, annealed_critical_point, build_kernel
from pinlab.experiments import series_plateau, series_symmetry

law = GaussianLaw()
kernel = build_kernel(0.5, horizon=2000)
params = PolymerParams(0.5, annealed_critical_point(law, 0.5) - 1.0)

plateau = series_plateau(kernel, params, n_small=1000, n_large=2000, replicas=30, law=law)
print(f"replicas with < 1% growth from 1000 to 2000: {plateau.footer['fraction_within']:.2f}")
sym = series_symmetry(kernel, params, depth=500, replicas=200, law=law)
print(f"forward vs reversed KS p-value: {sym.footer['p_value']:.3f}")
