"""Threshold filters: smoothed-step Chebyshev expansions.

Builds the polynomial filters used for eigenvalue thresholding, shows how
their coefficients decay, and checks the plateau quality outside the gap.
"""

import math

import numpy as np

from chebgsee import default_degree, eval_cheb, shifted_sign_cheb, smoothing_rate

print("=" * 70)
print("Shifted-step filters P(x) ~ 1 below c, ~ 0 above c")
print("=" * 70)

c, delta, eta = -0.3, 0.1, 0.01
d = default_degree(delta, eta)
filt = shifted_sign_cheb(c, delta, eta, d)
print(f"\nthreshold c={c}, gap delta={delta}, error target eta={eta}")
print(f"smoothing rate kappa = {smoothing_rate(delta, eta):.2f}")
print(f"default degree d = {d}, quality warning: {filt.meta.quality_warning}")
print(f"max plateau deviation outside the gap: {filt.meta.max_plateau_error:.3e} "
      f"(2*eta = {2 * eta})")

print("\nvalues across the step:")
for x in (-0.9, c - delta, c, c + delta, 0.2, 0.9):
    print(f"  P({x:+.2f}) = {eval_cheb(filt, x):+.6f}")

print("\ncoefficient envelope (max |a_k| per block of 20):")
for lo in range(0, d + 1, 20):
    block = np.abs(filt.coeffs[lo:lo + 20])
    print(f"  k in [{lo:4d}, {min(lo + 19, d):4d}]: {block.max():.3e}")

print("\ncoefficient bounds: |a_0| <= 1 and |a_k| <= 4/pi for step-like targets")
print(f"  |a_0| = {abs(filt.coeffs[0]):.6f}")
print(f"  max |a_k| = {np.abs(filt.coeffs[1:]).max():.6f}  (4/pi = {4 / math.pi:.6f})")

print("\nA degree too small for (delta, eta) is flagged rather than rejected:")
coarse = shifted_sign_cheb(c, delta, eta, 12)
print(f"  d=12 -> quality warning: {coarse.meta.quality_warning}, "
      f"plateau error {coarse.meta.max_plateau_error:.3f}")
