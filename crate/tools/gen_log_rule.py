"""Compute the symmetric corrected-trapezoid rule for log-singular periodic integrands.

The rule replaces the trapezoid nodes j = -(a-1)..(a-1) around a log singularity
by Q symmetric pairs of nodes +-x_k h with weights w_k, chosen so that the rule is
exact (in the zeta-regularized sense) for x^{2q} and x^{2q} log|x|, q = 0..Q-1.

Usage: python3 gen_log_rule.py Q a
"""
import sys
import mpmath as mp
import numpy as np
from scipy.optimize import least_squares

mp.mp.dps = 80
Q = int(sys.argv[1]) if len(sys.argv) > 1 else 8
A = int(sys.argv[2]) if len(sys.argv) > 2 else 10

m0 = [-mp.zeta(-2 * q, A) for q in range(Q)]
m1 = [mp.zeta(-2 * q, A, derivative=1) for q in range(Q)]
scale = [mp.mpf(A) ** (2 * q) for q in range(Q)]


def residual_np(v):
    x = np.exp(v[:Q])
    w = v[Q:]
    r = []
    for q in range(Q):
        s = float(scale[q])
        r.append((np.sum(w * x ** (2 * q)) - float(m0[q])) / s)
        r.append((np.sum(w * x ** (2 * q) * np.log(x)) - float(m1[q])) / s)
    return np.array(r)


def residual_mp(v):
    xs, ws = v[:Q], v[Q:]
    r = []
    for q in range(Q):
        r.append((sum(ws[k] * xs[k] ** (2 * q) for k in range(Q)) - m0[q]) / scale[q])
        r.append((sum(ws[k] * xs[k] ** (2 * q) * mp.log(xs[k]) for k in range(Q)) - m1[q]) / scale[q])
    return r


def jacobian_mp(v):
    xs, ws = v[:Q], v[Q:]
    J = mp.matrix(2 * Q, 2 * Q)
    for q in range(Q):
        for k in range(Q):
            x, w = xs[k], ws[k]
            p = 2 * q
            dx0 = w * p * x ** (p - 1) if p > 0 else mp.mpf(0)
            dx1 = w * (p * x ** (p - 1) * mp.log(x) if p > 0 else 0) + w * x ** (p - 1)
            J[2 * q, k] = dx0 / scale[q]
            J[2 * q, Q + k] = x ** p / scale[q]
            J[2 * q + 1, k] = dx1 / scale[q]
            J[2 * q + 1, Q + k] = x ** p * mp.log(x) / scale[q]
    return J


rng = np.random.default_rng(0)
start = None
for trial in range(2000):
    x0 = np.sort(rng.uniform(1e-3, A, Q))
    w0 = rng.uniform(0.1, 1.5, Q)
    sol = least_squares(residual_np, np.concatenate([np.log(x0), w0]),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=4000)
    x = np.exp(sol.x[:Q])
    if sol.cost < 1e-20 and np.all(x < A) and np.all(sol.x[Q:] > 0):
        start = sol
        break
if start is None:
    sys.exit("no admissible solution found")

v = [mp.mpf(float(t)) for t in np.exp(start.x[:Q])] + [mp.mpf(float(t)) for t in start.x[Q:]]
for _ in range(30):
    r = mp.matrix(residual_mp(v))
    dv = mp.lu_solve(jacobian_mp(v), -r)
    v = [v[i] + dv[i] for i in range(2 * Q)]
    if mp.norm(dv) < mp.mpf(10) ** -70:
        break
print("# residual", mp.nstr(max(abs(t) for t in residual_mp(v)), 5))
order = sorted(range(Q), key=lambda k: v[k])
for k in order:
    print(mp.nstr(v[k], 22, min_fixed=-1, max_fixed=1), mp.nstr(v[Q + k], 22, min_fixed=-1, max_fixed=1))
