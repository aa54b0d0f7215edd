"""Deployment-angle planning for multiple surfaces.

Shows the orthogonal-azimuth grid, what happens when two surfaces collide
in the sine domain, and how snapping suppresses the line-of-sight coupling
between their BS steering vectors.
Run with: python demos/demo_placement_grid.py
"""

import numpy as np

from rismimo import (build_angle_grid, snap_to_grid,
                     steering_inner_product_magnitude, validate_placement)

M = 64
WAVELENGTH = 0.1
SPACING = WAVELENGTH / 2

grid = build_angle_grid(M, SPACING, WAVELENGTH)
print(f"grid for M = {M}, half-wavelength spacing: {len(grid.angles)} angles "
      f"(expected 4 M d/lambda = {int(4 * M * SPACING / WAVELENGTH)})")
first_quadrant = np.sort(grid.angles[(grid.angles >= 0)
                                     & (grid.angles <= np.pi / 2)])
print(f"first quadrant in degrees: {np.rad2deg(first_quadrant[:6]).round(2)} ..."
      f" {np.rad2deg(first_quadrant[-3:]).round(2)}")
print(f"worst gap near endfire: "
      f"{np.rad2deg(np.max(np.diff(first_quadrant))):.2f} deg")

print("\nsteering coupling |a^H a'| (coherent value would be M):")
pairs = [(grid.angles[5], grid.angles[9], "two distinct grid angles"),
         (grid.angles[5], 0.5 * (grid.angles[5] + grid.angles[6]),
          "grid angle vs off-grid angle"),
         (grid.angles[5], float(np.pi - grid.angles[5]),
          "mirror pair (same sine)")]
for a, b, label in pairs:
    value = steering_inner_product_magnitude(a, b, M, SPACING, WAVELENGTH)
    print(f"  {label:32s}: {value:10.3e}")

print("\nvalidating the placement [10 deg, 170 deg, 90 deg, -90 deg]:")
proposal = [np.deg2rad(10), np.deg2rad(170), np.pi / 2, -np.pi / 2]
for violation in validate_placement(proposal, M, SPACING, WAVELENGTH):
    print(f"  angles {violation.first} and {violation.second}: "
          f"{violation.rule} - {violation.detail}")

print("\nsequential snapping of three surfaces near 40 deg:")
occupied = []
for target_deg in (40.0, 41.0, 43.0):
    snapped = snap_to_grid(np.deg2rad(target_deg), grid, occupied)
    occupied.append(snapped)
    print(f"  target {target_deg:5.1f} deg -> {np.rad2deg(snapped):7.3f} deg")
report = validate_placement(occupied, M, SPACING, WAVELENGTH)
print(f"violations after snapping: {len(report)}")
