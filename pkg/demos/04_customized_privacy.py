"""Customized privacy beats one-size-fits-all.

Half the devices are marked sensitive. Three strategies hold the sensitive
devices at the same epsilon target:

  uniform  everyone gets the same mechanism
  weight   sensitive devices get half the aggregation weight
  clip     sensitive devices get half the clipping bound

Weight and clip shrink the sensitive devices' sensitivity constant, so the
calibrated noise is smaller at the same sensitive-device budget — and
accuracy improves in the high-privacy regime. Writes the combined CSV that
the plotkit frontend renders.

Run:  python3 demos/04_customized_privacy.py
"""

from pathlib import Path

from otapriv import SweepSpec, paper_default_config, run_mode_comparison
from otapriv.analysis import SWEEP_CSV_COLUMNS
from otapriv.harness import sweep_header, write_csv

cfg = paper_default_config()
spec = SweepSpec(sensitive_fraction=0.5, rho=0.5)
rows = run_mode_comparison(cfg, spec)

by_mode = {}
for row in rows:
    by_mode.setdefault(row["mode"], []).append(row)

eps_grid = [r["eps_target"] for r in by_mode["uniform"]]
print(f"{'eps':>6} {'uniform':>9} {'weight':>9} {'clip':>9}")
for i, eps in enumerate(eps_grid):
    accs = [by_mode[m][i]["acc_empirical"] for m in ("uniform", "weight", "clip")]
    print(f"{eps:6g} {accs[0]:9.3f} {accs[1]:9.3f} {accs[2]:9.3f}")

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
path = out / "mode_comparison.csv"
write_csv(path, rows, ["mode"] + SWEEP_CSV_COLUMNS,
          header_comment=sweep_header(cfg, spec))
print(f"\nwrote {path}")
print("\nAt small eps, weight and clip customization outperform the uniform")
print("baseline; at large eps all three converge — extra noise is no longer")
print("the binding constraint.")
