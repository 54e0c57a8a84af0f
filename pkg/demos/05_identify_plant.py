"""Identifying the actuator model from a chirp record.

The identification loop that produced the nominal model: command an
exponential current sweep open loop, record current in and force out,
estimate the frequency response with the H1 estimator, and fit a low-order
rational model with linearized complex least squares.  Here the "hardware"
is the clean simulated actuator, so the fit should land on the true
coefficients almost exactly.

Run:  python demos/05_identify_plant.py   (about 5 s)
"""

from pathlib import Path

import numpy as np

from seactrl.lti import log_grid
from seactrl.plant import PlantConfig, ReferenceSpec, SimScenario, run_scenario
from seactrl.sysid import (
    TimeSeries,
    empirical_frf,
    fit_rational,
    write_frf_csv,
    zoh_compensate,
)

OUT = Path("demo_out/05_identify")
OUT.mkdir(parents=True, exist_ok=True)

print("sweeping 0.05 -> 35 Hz over 120 s at 1.5 A ...")
sc = SimScenario(
    reference=ReferenceSpec(kind="current_chirp", amplitude=1.5,
                            f_start=0.05, f_end=35.0),
    duration_s=120.0, plant=PlantConfig(), gamma=0.0,
    controller_hz=1000, reference_hz=200, plant_hz=1000)
log = run_scenario(sc)
u = TimeSeries(1e-3, log.i_m)
y = TimeSeries(1e-3, log.f_o)
u.to_csv(OUT / "input.csv")
y.to_csv(OUT / "output.csv")

grid = log_grid(0.2, 30.0, 20)
frf = zoh_compensate(empirical_frf(u, y, grid), u.sample_period)
write_frf_csv(frf, OUT / "frf.csv")

result = fit_rational(frf, num_order=0, den_order=3)
num = result.tf.num / result.tf.den[0]
den = result.tf.den / result.tf.den[0]
true_den = np.array([0.01, 1.13, 23.04, 987.0]) / 0.01
true_num = 208.8 / 0.01

print(f"\nfit residual: {result.relative_residual:.2e}   "
      f"condition: {result.condition:.1f}   bins: {result.n_bins}")
print(f"{'coefficient':>12} | {'fitted':>12} | {'true':>12} | {'error':>8}")
print(f"{'gain':>12} | {num[0]:>12.2f} | {true_num:>12.2f} | "
      f"{abs(num[0] - true_num) / true_num * 100:>7.3f}%")
for i, (got, want) in enumerate(zip(den[1:], true_den[1:]), start=1):
    print(f"{'den s^' + str(3 - i):>12} | {got:>12.2f} | {want:>12.2f} | "
          f"{abs(got - want) / want * 100:>7.3f}%")
print(f"\nrecords and FRF in {OUT}/")
