"""Step-size schedules, the partial-sum sandwich they rest on, and
empirical decay-rate fitting on a solver trace.
"""

import numpy as np

from airig import (
    ScheduleParams,
    build_preset,
    eta,
    fit_rates,
    gamma,
    harmonic_sum_bounds,
    min_valid_n,
    reference_optimum,
    run_airig,
)

params = ScheduleParams(gamma0=1.0, eta0=1.0, b=0.25, r=0.0)
ks = np.array([0, 1, 10, 100, 1000, 10000])
print("k       gamma_k     eta_k       gamma*eta")
for k in ks:
    print(f"{k:<7d} {gamma(params, k):.5f}    {eta(params, k):.5f}    {gamma(params, k) * eta(params, k):.6f}")

# Every rate statement reduces to two-sided bounds on sum (1+t)^-alpha.
# The lower/upper envelopes differ by exactly a factor of two.
print("\nalpha   N       lower        sum          upper")
for alpha in (0.25, 0.5, 0.75):
    n0 = min_valid_n(alpha)
    for n in (n0, 10 * n0 + 17, 100 * n0 + 1):
        lo, hi, total = harmonic_sum_bounds(alpha, n)
        assert lo <= total <= hi and hi == 2 * lo
        print(f"{alpha:.2f}    {n:<7d} {lo:10.3f}   {total:10.3f}   {hi:10.3f}")

# Fit log-log decay slopes on a benchmark run at the preset's full size.
# The infeasibility series eventually bottoms out at exact zero, and zeros
# are excluded from the log fit, so the window covers the whole run.
inst, params, _ = build_preset("paper-fig1")
_, f_star, _ = reference_optimum(inst)
hist = run_airig(inst.problem, params, n_iters=6000, eval_every=5)
report = fit_rates(hist, f_star, window_fraction=1.0)

print(f"\nfitted over {hist.iterations} iterations:")
print(f"  suboptimality slope {report.slope_f:+.3f}  (r2={report.r2_f:.3f}, {report.n_used_f} points)")
print(f"  infeasibility slope {report.slope_phi:+.3f}  (r2={report.r2_phi:.3f}, "
      f"{report.n_used_phi} points, {report.n_excluded_phi} at the exact-zero floor)")
