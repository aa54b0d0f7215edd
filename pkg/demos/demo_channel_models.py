"""Tour of the channel building blocks.

Walks through the array responses, the two spatial correlation models, and
the random channel generators, checking each sampled statistic against its
analytic value. Run with: python demos/demo_channel_models.py
"""

import numpy as np

from rismimo import (ArrayGeometry, FadingParams, LinkGeometry,
                     bs_array_response, bs_ue_correlation, covariance_factor,
                     complex_normal, path_loss, ris_array_response,
                     ris_correlation_kernel, sample_bs_ris_channel)

WAVELENGTH = 0.1
geom = ArrayGeometry(bs_antennas=64, bs_spacing=WAVELENGTH / 2,
                     ris_rows=16, ris_cols=16, ris_spacing=WAVELENGTH / 2,
                     wavelength=WAVELENGTH)
rng = np.random.default_rng(7)

print("== array responses ==")
for angle_deg in (0, 30, 60):
    vec = bs_array_response(np.deg2rad(angle_deg), geom)
    print(f"BS ULA at {angle_deg:2d} deg: first phases "
          f"{np.angle(vec[:3]).round(3)}, |a|^2 = {np.vdot(vec, vec).real:.0f}")
upa = ris_array_response(np.pi / 6, 0.1, geom)
print(f"surface UPA: {upa.size} elements, modulus spread "
      f"{np.ptp(np.abs(upa)):.1e}")

print("\n== path loss ==")
beta0 = 10 ** (-35.3 / 10)
for d in (10, 50, 120, 150):
    print(f"  d = {d:3d} m: direct (exp 4.2) {10*np.log10(path_loss(d, 4.2, beta0)):7.1f} dB, "
          f"surface hop (exp 2.3) {10*np.log10(path_loss(d, 2.3, beta0)):7.1f} dB")

print("\n== direct-link correlation (exponential model) ==")
cov = bs_ue_correlation(1.0, 0.5, np.deg2rad(45), 64)
eigvals = np.linalg.eigvalsh(cov)
print(f"unit-gain, corr 0.5: eigenvalue range [{eigvals[0]:.3f}, {eigvals[-1]:.3f}]"
      f" (analytic limits 1/3 and 3), trace {np.trace(cov).real:.0f}")

print("\n== surface element kernel (isotropic scattering) ==")
kernel = ris_correlation_kernel(geom)
kvals = np.linalg.eigvalsh(kernel)
print(f"sinc kernel 16x16 at half wavelength: lam_max {kvals[-1]:.2f}, "
      f"effective rank {np.trace(kernel) ** 2 / np.sum(kvals ** 2):.0f} of {kernel.shape[0]}")
print(f"vertical neighbours decorrelated: K[0,1] = {kernel[0, 1]:.1e}")

print("\n== Rician BS-surface channel ==")
fading = FadingParams(ref_gain=beta0, bs_ris_exponent=2.3, ris_ue_exponent=2.3,
                      bs_ue_exponent=4.2, rician_factor=10 ** 0.5,
                      corr_factor=0.5)
link = LinkGeometry(bs_ris_distance=120.0, bs_ris_aoa=np.deg2rad(40),
                    ris_aod_azimuth=np.pi / 6)
power = np.mean([np.linalg.norm(
    sample_bs_ris_channel(link, fading, geom, rng), "fro") ** 2
    for _ in range(2000)])
expected = path_loss(120.0, 2.3, beta0) * geom.bs_antennas * geom.ris_elements
print(f"mean Frobenius power over 2000 draws: {power:.3e} "
      f"(analytic {expected:.3e}, ratio {power / expected:.3f})")

print("\n== correlated vector sampling ==")
factor = covariance_factor(kernel)
draws = complex_normal(rng, 20000, geom.ris_elements) @ factor.T
emp_diag = np.mean(np.abs(draws) ** 2, axis=0)
print(f"surface-UE draws: per-element variance {emp_diag.mean():.3f} "
      f"(target 1.0), spread {emp_diag.std():.3f}")
