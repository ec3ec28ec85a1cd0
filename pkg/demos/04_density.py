"""Testing continuous data by binning.

Points are mapped to the unit cube with the normal CDF, cut into kappa^d cells
and then tested as multinomial data. The adaptive variant tries several bin
widths at once and splits budget and level between them.
"""

from ldp_twosample import BinningSpec, PrivacyConfig, StreamKey, adaptive_density_test, density_test
from ldp_twosample.simulation import ScenarioSpec, sample_scenario

y, z = sample_scenario(ScenarioSpec("gaussian_location", d=3, location=0.2), 1500, 1500, StreamKey(11))

spec = BinningSpec(d=3, kappa=4)
res = density_test(y, z, spec, PrivacyConfig("rappor", 2.0, spec.k), "l2", 0.05, 299, StreamKey(12))
print(f"fixed kappa=4: p={res.p_value:.4f} reject={res.reject}")

res = adaptive_density_test(y, z, alpha=2.0, gamma=0.05, B=299, mechanism="rappor", key=StreamKey(13))
print(f"adaptive with {len(res.sub_results)} sub-tests: adjusted p={res.p_value:.4f} reject={res.reject}")
for t, sub in enumerate(res.sub_results, start=1):
    print(f"  kappa={2**t} at level {sub.gamma:.3f}: p={sub.p_value:.4f}")
