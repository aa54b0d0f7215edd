"""Small end-to-end Monte Carlo run of the pilot-reuse cell.

Four UEs share one pilot; three surfaces each serve one of them. Compares
no surface / random phases / optimized phases across the three combining
schemes at a reduced trial count and antenna size, then shows the power
decomposition. The full-scale experiments run through the CLI presets.
Run with: python demos/demo_uplink_experiment.py   (about a minute)
"""

import time

import numpy as np

from rismimo import SystemConfig, run_link_level

config = SystemConfig(bs_antennas=64, ris_rows=16, ris_cols=16, num_ues=4,
                      num_ris=3, pilot_count=1, trials=100, seed=42)
print(f"cell: {config.num_ues} UEs on {config.pilot_count} pilot(s), "
      f"{config.num_ris} surfaces of {config.ris_elements} elements, "
      f"M = {config.bs_antennas} BS antennas, {config.trials} trials")
print(f"transmit power over noise floor: "
      f"{10 * np.log10(config.tx_snr):.0f} dB")

start = time.perf_counter()
result = run_link_level(config)
print(f"run time {time.perf_counter() - start:.1f} s\n")

print("uplink SE (bit/s/Hz), mean per UE:")
print(f"{'scheme':8s} {'no surface':>11s} {'random':>8s} {'optimized':>10s}")
for scheme in ("mr", "zf", "mmse"):
    row = [result.mean_ul_se(scheme, mode) for mode in ("nr", "rps", "mo")]
    print(f"{scheme:8s} {row[0]:11.3f} {row[1]:8.3f} {row[2]:10.3f}")

print("\nper-group uplink SE with MMSE combining:")
for group in ("closest", "farthest"):
    row = [result.mean_ul_se("mmse", mode, group)
           for mode in ("nr", "rps", "mo")]
    print(f"{group:8s} {row[0]:11.3f} {row[1]:8.3f} {row[2]:10.3f}")

print("\ndownlink SE with MMSE precoding (hardening bound):")
row = [result.mean_dl_se("mmse", mode) for mode in ("nr", "rps", "mo")]
print(f"{'all UEs':8s} {row[0]:11.3f} {row[1]:8.3f} {row[2]:10.3f}")

print("\nnormalized power terms at the MMSE combiner output (all UEs):")
print(f"{'mode':6s} {'DS':>9s} {'IPR':>9s} {'IOP':>9s} {'EE':>9s}")
for mode in ("nr", "rps", "mo"):
    terms = result.mean_power_terms("mmse", mode)
    print(f"{mode:6s} {terms['ds']:9.3f} {terms['ipr']:9.4f} "
          f"{terms['iop']:9.4f} {terms['ee']:9.4f}")
