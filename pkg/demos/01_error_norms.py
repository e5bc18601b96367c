"""Proportional action versus error angle, and where it vanishes.

Both controllers push with a proportional term that is largest at a 90 deg
error and zero at 180 deg. This prints the sweep and the configuration error
at the three half turns about the principal axes.
"""
import numpy as np

from pseudotarget import WeightMatrix, psi, sweep_error_norms

K = WeightMatrix(1.0, 2.0, 3.0)
tab = sweep_error_norms(K, [0.0, 0.0, 1.0], 19)   # every 10 deg about e3
print(" beta   |q_e0 q_ev|   |e_R|")
for b, qn, en in zip(tab.beta_deg, tab.qnorm, tab.ernorm):
    print(f"{b:5.0f}   {qn:10.6f}   {en:8.6f}")

# half turns about e1, e2, e3 sit at Psi = k2+k3, k1+k3, k1+k2
for axis, R_e in zip("123", (np.diag([1.0, -1, -1]), np.diag([-1.0, 1, -1]), np.diag([-1.0, -1, 1]))):
    print(f"Psi at 180 deg about e{axis}: {psi(R_e, np.eye(3), K):.12f}")
print("critical values:", K.critical_values)
