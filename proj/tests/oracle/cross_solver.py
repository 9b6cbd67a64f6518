"""Solves the nominal problem at x0 with scipy SLSQP on the same transcription
and compares the optimal cost with the library's solve_nominal."""
import json
import subprocess
import sys

import numpy as np
from scipy.optimize import minimize

XBAR = np.array([1e9, 1e9, 1.0, 1e9])
H = 20.2
W = dict(a=0.25, b=1.02e-14, c1=4.41e-10, k3=0.6, delta=1.2e-2, k2=0.6, s2=7.5e6,
         gamma0=0.9, g=1.5e-2, r=4.0e-2, p0=2e-11, k1=0.8, s1=1.2e7)
N, TAU, SUB = 10, 0.2, 4
RHO_F, RHO_U, X2_MIN, RHO = 1000.0, 1.0, 0.05, 10.0
X0 = np.array([1.0, 0.15, 0.0, 1.0])


def f(x, u1, u2):
    x1, x2, x3, x4 = x
    raw = XBAR[0] * x1
    return np.array([
        W["a"] * x1 * (1 - W["b"] * raw) - W["c1"] * XBAR[3] * x4 * x1 - W["k3"] * XBAR[2] * x3 * x1,
        -W["delta"] * x2 - W["k2"] * XBAR[2] * x3 * x2 + W["s2"] / XBAR[1],
        -W["gamma0"] * x3 + u2 / XBAR[2],
        W["g"] * raw / (H + raw) * x4 - W["r"] * x4 - W["p0"] * XBAR[0] * x4 * x1
        - W["k1"] * XBAR[2] * x4 * x3 + W["s1"] * u1 / XBAR[3],
    ])


def rollout(u):
    x = X0.copy()
    traj = [x]
    h = TAU / SUB
    for i in range(N):
        u1, u2 = u[2 * i], u[2 * i + 1]
        for _ in range(SUB):
            k1 = f(x, u1, u2)
            k2 = f(x + 0.5 * h * k1, u1, u2)
            k3 = f(x + 0.5 * h * k2, u1, u2)
            k4 = f(x + h * k3, u1, u2)
            x = np.maximum(x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4), 0.0)
        traj.append(x)
    return np.array(traj)


def cost(u):
    t = rollout(u)
    return RHO_F * t[-1, 0] + t[1:, 0].sum() + RHO_U * np.abs(u).sum()


def solve_reference():
    bounds = [(0.0, 5.0), (0.0, 1.0)] * N + [(0.0, 10.0)]
    cons = {"type": "ineq", "fun": lambda z: z[-1] - (X2_MIN - rollout(z[:-1])[1:, 1])}
    best = None
    starts = [np.zeros(2 * N), np.tile([5.0, 1.0], N), np.tile([2.5, 0.5], N), np.tile([0.0, 1.0], N)]
    for u0 in starts:
        r = minimize(lambda z: cost(z[:-1]) + RHO * z[-1] ** 2, np.append(u0, 0.0), method="SLSQP",
                     bounds=bounds, constraints=[cons], options={"maxiter": 500, "ftol": 1e-12})
        z = r.x
        resid = max(0.0, np.max(X2_MIN - rollout(z[:-1])[1:, 1]) - z[-1])
        if resid > 1e-6:
            continue
        val = cost(z[:-1]) + RHO * z[-1] ** 2
        if best is None or val < best[0]:
            best = (val, cost(z[:-1]), z)
    return best


def main():
    ours = json.loads(subprocess.run([sys.argv[1]], check=True, capture_output=True, text=True).stdout)
    u = np.array(ours["u"])
    # The same transcription evaluated here must reproduce the library's cost.
    mine = cost(u)
    if abs(mine - ours["J"]) > 1e-9 * abs(ours["J"]):
        print(f"transcription mismatch: python J {mine:.12g}, library J {ours['J']:.12g}")
        return 1
    best = solve_reference()
    if best is None:
        print("SLSQP found no feasible point from any start")
        return 1
    _, J_ref, z = best
    rel = abs(ours["J"] - J_ref) / abs(J_ref)
    print(f"library J* {ours['J']:.6g} (mu {ours['mu']:.3g}), SLSQP J* {J_ref:.6g} (mu {z[-1]:.3g}), "
          f"relative difference {rel:.3e}")
    return 0 if rel <= 0.02 else 1


if __name__ == "__main__":
    sys.exit(main())
