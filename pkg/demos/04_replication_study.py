"""A small replication study comparing both stopping rules.

Each replication draws fresh GARCH training data and a monitoring stream
with a late mean shift (kstar = floor(m**0.75)), runs both detectors on the
same data, and normalizes the stopping times. The benchmark nu_tilde puts
the ordinary rule on the page rule's scale, so the mean gap
mean(nu_page) - mean(nu_tilde) measures how much earlier the page rule
stops. Output CSVs land in demos_output/ (plot density_*.csv against the
limit laws to reproduce the delay-density pictures).
"""

import math

import numpy as np

from pagecusum import (ChangeScenario, Garch11Spec, MonitoringParams,
                       resolve_critical_value, simulate_to_dir)

m = 1000
gamma = 0.25
reps = 1000
out_dir = "demos_output/late_change_study"

params = MonitoringParams(m=m, gamma=gamma, alpha=0.1, horizon_factor=5.0)
scenario = ChangeScenario.from_exponent(1.0, 1.0, 0.75, m)
garch = Garch11Spec(omega=0.5, alpha_g=0.2, beta_g=0.3)
c_page = resolve_critical_value(gamma, 0.1, "one_sided", "page")
c_q = resolve_critical_value(gamma, 0.1, "one_sided", "ordinary")

print(f"m={m}, gamma={gamma}, change at kstar={scenario.kstar}, "
      f"{reps} replications")
meta = simulate_to_dir(params, scenario, garch, reps, c_page, c_q, seed=11,
                       out_dir=out_dir)
print(f"normalizations: a_page={meta['a_page']:.2f}, b_page="
      f"{meta['b_page']:.2f}; a_q={meta['a_q']:.2f}, b_q={meta['b_q']:.2f}")
print(f"regime: {meta['case']['variant']} (eta={meta['case']['eta']:+.3f})")

from pagecusum.experiments import read_records_csv

records = read_records_csv(f"{out_dir}/records.csv")
nu_page = np.array([r.nu_page for r in records if r.nu_page is not None])
nu_tilde = np.array([r.nu_tilde for r in records if r.nu_tilde is not None])
taus_p = np.array([r.tau_page for r in records if r.tau_page is not None])
taus_q = np.array([r.tau_q for r in records if r.tau_q is not None])

print(f"\nmean stopping times: page {taus_p.mean():.1f}, "
      f"ordinary {taus_q.mean():.1f} (change at {scenario.kstar})")
diff = nu_page.mean() - nu_tilde.mean()
se = np.std(nu_page - nu_tilde, ddof=1) / math.sqrt(nu_page.size)
print(f"normalized advantage of page over the benchmark: {diff:+.3f} "
      f"(paired se {se:.3f})")
print(f"\nwrote records.csv, density_page.csv, density_q.csv, "
      f"density_tilde.csv, meta.json to {out_dir}/")
