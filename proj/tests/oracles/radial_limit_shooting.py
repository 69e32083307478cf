"""Shooting oracle for the radial sign-changing solution of -w'' - w'/r = 40 (w - w^3), w(1) = 0.

Prints the centre value, the nodal radius r0 and the slope |w'(r0)|.
"""
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

LAM = 40.0


def shoot(a):
    rhs = lambda r, y: [y[1], -y[1] / r - LAM * (y[0] - y[0] ** 3)]
    r0 = 1e-6
    y0 = [a - LAM * (a - a ** 3) * r0 ** 2 / 4, -LAM * (a - a ** 3) * r0 / 2]
    return solve_ivp(rhs, [r0, 1.0], y0, method="DOP853", rtol=1e-13, atol=1e-14, dense_output=True)


a = brentq(lambda a: shoot(a).y[0, -1], 0.781, 0.805, xtol=1e-15)
sol = shoot(a)
grid = np.linspace(1e-6, 1.0, 200001)
w = sol.sol(grid)[0]
idx = np.where(np.diff(np.sign(w)) != 0)[0]
r0 = brentq(lambda r: sol.sol(r)[0], grid[idx[0]], grid[idx[0] + 1], xtol=1e-15)
print(f"w(0)   = {a:.15f}")
print(f"r0     = {r0:.15f}")
print(f"omega  = {abs(sol.sol(r0)[1]):.15f}")
print(f"zeros  = {len(idx)}")
