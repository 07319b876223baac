#!/usr/bin/env python3
"""Generate tests/data/reference.json, the frozen high-precision oracle.

Every value is computed with mpmath at 50 significant digits and, where two
independent routes exist (closed form vs generic solve, quadratic form vs
eigendecomposition), both are evaluated and asserted to agree before anything
is written.  The JSON stores correctly rounded doubles; regeneration is only
needed if an instance definition changes.

Run from the repository root:  python3 tools/oracles/make_reference.py
"""

import json
import math
import os

import mpmath as mp

mp.mp.dps = 50

OUT = os.path.join(os.path.dirname(__file__), "..", "..", "tests", "data", "reference.json")

TIGHT = mp.mpf("1e-35")


def check(name, a, b, tol=TIGHT):
    err = abs(mp.mpf(a) - mp.mpf(b))
    if err > tol:
        raise AssertionError(f"{name}: |{mp.nstr(a, 30)} - {mp.nstr(b, 30)}| = {mp.nstr(err, 6)} > {mp.nstr(tol, 3)}")
    print(f"  ok {name:48s} err {mp.nstr(err, 3)}")


def f2(x):
    """Nearest double for the JSON file."""
    return float(mp.mpf(x))


def vec(v):
    return [f2(x) for x in v]


# ---------------------------------------------------------------------------
# generic entropic OT machinery (full precision, support-restricted)
# ---------------------------------------------------------------------------

def sq_cost(points):
    n = len(points)
    c = mp.zeros(n, n)
    for i in range(n):
        for j in range(n):
            c[i, j] = sum((mp.mpf(a) - mp.mpf(b)) ** 2 for a, b in zip(points[i], points[j]))
    return c


def t_eps(f, w, cost_cols, eps):
    """T_eps(f, mu) evaluated at the column points of cost_cols (n x m)."""
    n = len(f)
    m = cost_cols.cols
    out = []
    for j in range(m):
        s = mp.mpf(0)
        for i in range(n):
            if w[i] > 0:
                s += mp.e ** ((f[i] - cost_cols[i, j]) / eps) * w[i]
        out.append(-eps * mp.log(s))
    return out


def solve_potentials(mu, nu, cost, eps, tol=mp.mpf("1e-42"), max_iter=500000):
    """Alternating f <- T(g, nu), g <- T(f, mu); returns gauge-fixed (f, g)."""
    sup_i = [i for i, w in enumerate(mu) if w > 0]
    sup_j = [j for j, w in enumerate(nu) if w > 0]
    ci = mp.matrix(len(sup_i), len(sup_j))
    for a, i in enumerate(sup_i):
        for b, j in enumerate(sup_j):
            ci[a, b] = cost[i, j]
    ms = [mu[i] for i in sup_i]
    ns = [nu[j] for j in sup_j]
    f = [mp.mpf(0)] * len(sup_i)
    g = t_eps(f, ms, ci, eps)
    for it in range(max_iter):
        f = t_eps(g, ns, ci.T, eps)
        g_new = t_eps(f, ms, ci, eps)
        res = max(abs(a - b) for a, b in zip(g_new, g))
        g = g_new
        if res < tol:
            break
    else:
        raise RuntimeError("sinkhorn did not converge")
    # gauge: equal shift so f[first support of mu] == g[first support of nu]
    s = (f[0] - g[0]) / 2
    f = [x - s for x in f]
    g = [x + s for x in g]
    ff = [mp.mpf(0)] * len(mu)
    gg = [mp.mpf(0)] * len(nu)
    for a, i in enumerate(sup_i):
        ff[i] = f[a]
    for b, j in enumerate(sup_j):
        gg[j] = g[b]
    return ff, gg


def ot_value(mu, nu, f, g):
    return sum(m * x for m, x in zip(mu, f)) + sum(n * y for n, y in zip(nu, g))


def self_potential(mu, cost, eps, tol=mp.mpf("1e-42"), max_iter=500000):
    """Symmetric iteration f <- (f + T(f, mu))/2 on the support of mu."""
    sup = [i for i, w in enumerate(mu) if w > 0]
    ci = mp.matrix(len(sup), len(sup))
    for a, i in enumerate(sup):
        for b, j in enumerate(sup):
            ci[a, b] = cost[i, j]
    ms = [mu[i] for i in sup]
    f = [mp.mpf(0)] * len(sup)
    for it in range(max_iter):
        tf = t_eps(f, ms, ci, eps)
        f_new = [(a + b) / 2 for a, b in zip(f, tf)]
        res = max(abs(a - b) for a, b in zip(f_new, f))
        f = f_new
        if res < tol:
            break
    else:
        raise RuntimeError("self potential did not converge")
    ff = [mp.mpf(0)] * len(mu)
    for a, i in enumerate(sup):
        ff[i] = f[a]
    return ff


def ot_eps(mu, nu, cost, eps):
    if mu == nu:
        f = self_potential(mu, cost, eps)
        return 2 * sum(m * x for m, x in zip(mu, f))
    f, g = solve_potentials(mu, nu, cost, eps)
    return ot_value(mu, nu, f, g)


def sdiv(mu, nu, cost, eps):
    return ot_eps(mu, nu, cost, eps) - ot_eps(mu, mu, cost, eps) / 2 - ot_eps(nu, nu, cost, eps) / 2


def tensor_structures(mu, cost, eps):
    """Support-restricted H, K, D^(1/2) H D^(1/2) and its eigensystem."""
    sup = [i for i, w in enumerate(mu) if w > 0]
    f = self_potential(mu, cost, eps)
    n = len(sup)
    H = mp.matrix(n, n)
    for a, i in enumerate(sup):
        for b, j in enumerate(sup):
            H[a, b] = mp.e ** ((f[i] + f[j] - cost[i, j]) / eps)
    K = mp.matrix(n, n)
    M = mp.matrix(n, n)
    ms = [mu[i] for i in sup]
    for a in range(n):
        for b in range(n):
            K[a, b] = H[a, b] * ms[b]
            M[a, b] = mp.sqrt(ms[a]) * H[a, b] * mp.sqrt(ms[b])
    E, Q = mp.eigsy(M)
    lam = [E[i] for i in range(n)]
    return sup, f, ms, H, K, M, lam, Q


def pseudo_apply(ms, lam, Q, rhs, transform):
    """x = D^(-1/2) h(M) D^(1/2) rhs with h(lam)=transform(lam), zeroing lam=1 modes."""
    n = len(ms)
    y = [mp.sqrt(ms[i]) * rhs[i] for i in range(n)]
    out = [mp.mpf(0)] * n
    for k in range(n):
        if abs(1 - lam[k]) < mp.mpf("1e-30"):
            continue
        coef = sum(Q[i, k] * y[i] for i in range(n)) * transform(lam[k])
        for i in range(n):
            out[i] += coef * Q[i, k]
    return [out[i] / mp.sqrt(ms[i]) for i in range(n)]


def metric_tensor_generic(mu, cost, eps, b):
    """(eps/2) b^T (I - K^2)^+ H b with the zero-mu-mean representative, plus extras."""
    sup, f, ms, H, K, M, lam, Q = tensor_structures(mu, cost, eps)
    bs = [b[i] for i in sup]
    Hb = [sum(H[a, c] * bs[c] for c in range(len(sup))) for a in range(len(sup))]
    x = pseudo_apply(ms, lam, Q, Hb, lambda l: 1 / (1 - l ** 2))
    g = eps / 2 * sum(bb * xx for bb, xx in zip(bs, x))
    return g, (sup, f, ms, H, K, M, lam, Q, Hb, x)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def two_dirac_ot(r, s, eps):
    k1 = mp.e ** (-((r - s) ** 2) / eps)
    k2 = mp.e ** (-((r + s) ** 2) / eps)
    return eps * (mp.log(2) - mp.log(k1 + k2))


def two_dirac_sdiv(r, s, eps):
    k1 = mp.e ** (-((r - s) ** 2) / eps)
    k2 = mp.e ** (-((r + s) ** 2) / eps)
    krr = mp.e ** (-(2 * r) ** 2 / eps)
    kss = mp.e ** (-(2 * s) ** 2 / eps)
    return eps * (-mp.log(k1 + k2) + mp.log(1 + krr) / 2 + mp.log(1 + kss) / 2)


def gaussian_kappa(v0, v1, eps):
    return 1 + mp.sqrt(1 + 16 * v0 * v1 / eps ** 2)


def gaussian_ot(v0, v1, eps):
    k = gaussian_kappa(v0, v1, eps)
    return v0 + v1 - eps / 2 * (k - mp.log(k) + mp.log(2) - 2)


def gaussian_sdiv(m0, v0, m1, v1, eps):
    k00 = gaussian_kappa(v0, v0, eps)
    k01 = gaussian_kappa(v0, v1, eps)
    k11 = gaussian_kappa(v1, v1, eps)
    return (m0 - m1) ** 2 + eps / 4 * (k00 - 2 * k01 + k11 + mp.log(k01 ** 2 / (k00 * k11)))


def gaussian_metric(v, eps):
    return 1 / (4 * mp.sqrt(eps ** 2 / 16 + v ** 2))


def F(x):
    return mp.quad(lambda s: (1 + s ** 2) ** mp.mpf("-0.25"), [0, x])


def F_inv(y):
    x = mp.findroot(lambda x: F(x) - y, y)
    return x


def nonconvexity_value(r, eps):
    kap = mp.e ** (-4 * r ** 2 / eps)
    return 1 + kap / (1 + kap) * ((8 * r ** 2 / eps) / (1 + kap) - 2)


def two_point_closed(r, m, eps):
    b = mp.e ** (-2 * r ** 2 / eps)
    M2 = m * (1 - m)
    p = (-b + mp.sqrt(b ** 2 + 4 * M2 * b * (1 - b))) / (2 * (1 - b))
    lam2 = 1 - p / M2
    g = eps / 2 * (M2 - p) / (p * (2 * M2 - p))
    return b, M2, p, lam2, g


# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------

ref = {"_meta": {"generator": "tools/oracles/make_reference.py", "dps": mp.mp.dps}}

print("softmin")
val = -mp.log((1 + mp.e ** -1) / 2)
ref["softmin"] = {
    "points": [[0.0], [1.0]], "epsilon": 1.0, "f": [0.0, 0.0],
    "weights": [0.5, 0.5], "value_each": f2(val),
}
print(f"  value {mp.nstr(val, 25)}")

print("rkhs_two_point")
ref["rkhs_two_point"] = {
    "points": [[0.0], [1.0]], "epsilon": 1.0, "a": [1.0, -1.0],
    "mmd_sq": f2(2 - 2 * mp.e ** -1),
}

print("sinkhorn5")
pts5 = [[0.0, 0.0], [1.0, 0.2], [0.3, 0.9], [-0.4, 0.5], [0.8, -0.6]]
eps5 = mp.mpf("0.8")
mu5 = [mp.mpf(w) for w in ("0.15", "0.25", "0.3", "0.1", "0.2")]
nu5 = [mp.mpf(w) for w in ("0.3", "0.1", "0.2", "0.25", "0.15")]
cost5 = sq_cost(pts5)
f5, g5 = solve_potentials(mu5, nu5, cost5, eps5)
ot5 = ot_value(mu5, nu5, f5, g5)
# fixed point check
tg = t_eps(f5, mu5, cost5, eps5)
check("schroedinger g = T(f, mu)", max(abs(a - b) for a, b in zip(tg, g5)), 0)
tf = t_eps(g5, nu5, cost5.T, eps5)
check("schroedinger f = T(g, nu)", max(abs(a - b) for a, b in zip(tf, f5)), 0)
# plan marginals
plan5 = mp.matrix(5, 5)
for i in range(5):
    for j in range(5):
        plan5[i, j] = mp.e ** ((f5[i] + g5[j] - cost5[i, j]) / eps5) * mu5[i] * nu5[j]
for i in range(5):
    check(f"plan row {i}", sum(plan5[i, j] for j in range(5)), mu5[i])
fmm5 = self_potential(mu5, cost5, eps5)
fnn5 = self_potential(nu5, cost5, eps5)
ot_mm5 = 2 * sum(m * x for m, x in zip(mu5, fmm5))
ot_nn5 = 2 * sum(n * x for n, x in zip(nu5, fnn5))
s5 = ot5 - ot_mm5 / 2 - ot_nn5 / 2
# gradient pairing against FD of S(mu + t b, nu)
b5 = [mp.mpf(w) for w in ("0.04", "-0.02", "0.05", "-0.03", "-0.04")]
grad5 = [a - b for a, b in zip(f5, fmm5)]
pair5 = sum(g * b for g, b in zip(grad5, b5))
t = mp.mpf("1e-12")
mup = [m + t * b for m, b in zip(mu5, b5)]
mum = [m - t * b for m, b in zip(mu5, b5)]
fd5 = (sdiv(mup, nu5, cost5, eps5) - sdiv(mum, nu5, cost5, eps5)) / (2 * t)
check("grad pairing vs FD", pair5, fd5, mp.mpf("1e-20"))
ref["sinkhorn5"] = {
    "points": pts5, "epsilon": f2(eps5), "mu": vec(mu5), "nu": vec(nu5),
    "f": vec(f5), "g": vec(g5), "ot": f2(ot5),
    "ot_mu_mu": f2(ot_mm5), "ot_nu_nu": f2(ot_nn5), "sdiv": f2(s5),
    "self_potential_mu": vec(fmm5),
    "grad_tangent": vec(b5), "grad_pairing": f2(pair5),
}
print(f"  ot {mp.nstr(ot5, 25)}  sdiv {mp.nstr(s5, 25)}")

print("tensor3")
pts3 = [[0.0], [0.55], [1.3]]
eps3 = mp.mpf("0.75")
mu3 = [mp.mpf(w) for w in ("0.2", "0.5", "0.3")]
b3 = [mp.mpf(w) for w in ("0.4", "-0.1", "-0.3")]
cost3 = sq_cost(pts3)
g3, (sup3, f3, ms3, H3, K3, M3, lam3, Q3, Hb3, x3) = metric_tensor_generic(mu3, cost3, eps3, b3)
# K row sums and spectrum
for a in range(3):
    check(f"K row {a}", sum(K3[a, c] for c in range(3)), 1)
check("lambda1 = 1", lam3[-1], 1)
check("mean of representative", sum(m * x for m, x in zip(ms3, x3)), 0)
# residual of the pseudo solve against the projected rhs
PHb3 = [Hb3[a] - sum(m * h for m, h in zip(ms3, Hb3)) for a in range(3)]
resid3 = [x3[a] - sum(K3[a, c] * sum(K3[c, d] * x3[d] for d in range(3)) for c in range(3)) for a in range(3)]
check("(I-K^2)x = P Hb", max(abs(r - p) for r, p in zip(resid3, PHb3)), 0)
# FD Hessian of S against g (closed-route confirmation of the tensor formula)
t = mp.mpf("1e-10")
mup = [m + t * b for m, b in zip(mu3, b3)]
mum = [m - t * b for m, b in zip(mu3, b3)]
fd_g3 = (sdiv(mup, mu3, cost3, eps3) + sdiv(mum, mu3, cost3, eps3)) / (2 * t ** 2)
check("FD Hessian vs tensor", fd_g3, g3, mp.mpf("1e-15"))
# tilde route: u = (I+K)^-1 H b, beta_dot = u / a, gram-norm + L2(mu) pairing
a3 = [mp.e ** (f3[i] / eps3) for i in range(3)]
u3 = mp.lu_solve(mp.eye(3) + K3, mp.matrix(Hb3))
u3 = [u3[i] for i in range(3)]
check("tangency sum mu*u", sum(m * u for m, u in zip(ms3, u3)), 0)
bdot3 = [u3[i] / a3[i] for i in range(3)]
G3 = mp.matrix(3, 3)
for i in range(3):
    for j in range(3):
        G3[i, j] = mp.e ** (-cost3[i, j] / eps3)
coords3 = mp.lu_solve(G3, mp.matrix(bdot3))
norm_hc3 = sum(coords3[i] * bdot3[i] for i in range(3))
w2 = pseudo_apply(ms3, lam3, Q3, u3, lambda l: 1 / (1 - l))
second3 = sum(ms3[i] * u3[i] * w2[i] for i in range(3))
gt3 = eps3 / 2 * (norm_hc3 + 2 * second3)
check("tilde tensor equals tensor", gt3, g3)
bHb3 = sum(b3[i] * Hb3[i] for i in range(3))
cnorm3 = max(cost3[i, j] for i in range(3) for j in range(3))
q3 = 1 - mp.e ** (-4 * cnorm3 / eps3)
assert bHb3 <= 2 / eps3 * g3 <= bHb3 / (1 - q3 ** 2)
assert lam3[-2] <= q3
ref["tensor3"] = {
    "points": pts3, "epsilon": f2(eps3), "mu": vec(mu3), "b": vec(b3),
    "self_potential": vec(f3), "eigenvalues": vec(sorted(lam3, reverse=True)),
    "lambda2": f2(lam3[-2]), "q_bound": f2(q3),
    "pseudo_solve": vec(x3), "potential_derivative": vec([-eps3 * x for x in x3]),
    "g": f2(g3), "g_tilde": f2(gt3), "beta_dot": vec(bdot3),
    "beta_dot_norm_sq": f2(norm_hc3), "b_H_b": f2(bHb3),
}
print(f"  g {mp.nstr(g3, 25)}  lambda2 {mp.nstr(lam3[-2], 25)}")

print("two_dirac")
cases = []
for (r, s, e) in [("0.5", "1.25", "1.0"), ("0.3", "0.9", "0.7"),
                  ("1.0", "2.0", "2.5"), ("1.0", "0.0", "1.0")]:
    r, s, e = mp.mpf(r), mp.mpf(s), mp.mpf(e)
    ot_cf = two_dirac_ot(r, s, e)
    sd_cf = two_dirac_sdiv(r, s, e)
    # generic cross-check on the 4-point space {r,-r,s,-s}
    pts = [[f2(r)], [f2(-r)], [f2(s)], [f2(-s)]]
    cost = sq_cost([[r], [-r], [s], [-s]])
    mu = [mp.mpf("0.5"), mp.mpf("0.5"), mp.mpf(0), mp.mpf(0)]
    nu = [mp.mpf(0), mp.mpf(0), mp.mpf("0.5"), mp.mpf("0.5")]
    check(f"two dirac ot r={r} s={s}", ot_eps(mu, nu, cost, e), ot_cf, mp.mpf("1e-30"))
    check(f"two dirac sdiv r={r} s={s}", sdiv(mu, nu, cost, e), sd_cf, mp.mpf("1e-30"))
    cases.append({"r": f2(r), "s": f2(s), "epsilon": f2(e), "ot": f2(ot_cf), "sdiv": f2(sd_cf)})
rsp, esp = mp.mpf("0.6"), mp.mpf("1.1")
f_closed = esp / 2 * (mp.log(2) - mp.log(1 + mp.e ** (-4 * rsp ** 2 / esp)))
cost_sp = sq_cost([[rsp], [-rsp]])
f_num = self_potential([mp.mpf("0.5"), mp.mpf("0.5")], cost_sp, esp)
check("self potential closed form", f_num[0], f_closed, mp.mpf("1e-30"))
ref["two_dirac"] = {
    "cases": cases,
    "self_potential": {"r": f2(rsp), "epsilon": f2(esp), "f": f2(f_closed)},
}

print("triangle")
e1 = mp.mpf(1)
r1 = mp.sqrt(e1)
gap = (mp.sqrt(two_dirac_sdiv(0, 2 * r1, e1)) - mp.sqrt(two_dirac_sdiv(0, r1, e1))
       - mp.sqrt(two_dirac_sdiv(r1, 2 * r1, e1))) / mp.sqrt(e1)
s01 = two_dirac_sdiv(0, r1, e1) / e1
check("S(mu0, mu_r)/eps at r=sqrt(eps)", s01, 1 - mp.log(2) / 2 + mp.log(1 + mp.e ** -4) / 2)
# scaling invariance of the normalized gap
e2 = mp.mpf("0.37")
r2 = mp.sqrt(e2)
gap2 = (mp.sqrt(two_dirac_sdiv(0, 2 * r2, e2)) - mp.sqrt(two_dirac_sdiv(0, r2, e2))
        - mp.sqrt(two_dirac_sdiv(r2, 2 * r2, e2))) / mp.sqrt(e2)
check("gap scaling invariance", gap, gap2)
assert abs(gap - mp.mpf("0.093")) < mp.mpf("5e-4")
ref["triangle"] = {"gap_normalized": f2(gap), "sdiv_0_r_over_eps": f2(s01)}
print(f"  gap {mp.nstr(gap, 25)}")

print("two_point")
rtp, mtp, etp = mp.mpf("0.8"), mp.mpf("0.3"), mp.mpf("0.7")
btp, M2tp, ptp, lam2tp, gtp = two_point_closed(rtp, mtp, etp)
# generic pipeline on {0, r} with mu = (m, 1-m), tangent (1, -1)
cost_tp = sq_cost([[0], [rtp]])
mu_tp = [mtp, 1 - mtp]
g_gen, (sup, f_tp, ms, H_tp, K_tp, M_tp, lam_tp, Q_tp, Hb_tp, x_tp) = \
    metric_tensor_generic(mu_tp, cost_tp, etp, [mp.mpf(1), mp.mpf(-1)])
check("two point tensor closed form", g_gen, gtp)
check("two point lambda2", lam_tp[0], lam2tp)
# p is the off-diagonal mass of the self plan
p_num = mp.e ** ((f_tp[0] + f_tp[1] - cost_tp[0, 1]) / etp) * mtp * (1 - mtp)
check("two point off-diagonal plan mass", p_num, ptp)
ref["two_point"] = {
    "r": f2(rtp), "m": f2(mtp), "epsilon": f2(etp),
    "b": f2(btp), "M_sq": f2(M2tp), "p": f2(ptp),
    "lambda2": f2(lam2tp), "g": f2(gtp),
}
print(f"  p {mp.nstr(ptp, 25)}  g {mp.nstr(gtp, 25)}")

print("gaussian")
ge = mp.mpf("0.9")
gv0, gv1 = mp.mpf("0.3"), mp.mpf("1.2")
gm0, gm1 = mp.mpf("0.0"), mp.mpf("0.4")
ot_g = gaussian_ot(gv0, gv1, ge)
sd_g = gaussian_sdiv(gm0, gv0, gm1, gv1, ge)
sd_gc = gaussian_sdiv(0, gv0, 0, gv1, ge)
met0 = gaussian_metric(gv0, ge)
met1 = gaussian_metric(gv1, ge)
# closed-form S and the closed-form tensor must be FD-consistent
h = mp.mpf("1e-12")
fd_met = (gaussian_sdiv(0, gv0, 0, gv0 + h, ge) + gaussian_sdiv(0, gv0, 0, gv0 - h, ge)) / (2 * h ** 2)
check("gaussian metric vs FD of S", fd_met, met0, mp.mpf("1e-18"))
x0, x1 = 4 * gv0 / ge, 4 * gv1 / ge
F0, F1 = F(x0), F(x1)
dhat = mp.sqrt(ge) / 4 * abs(F1 - F0)
vts, ts = [], [mp.mpf("0.25"), mp.mpf("0.5"), mp.mpf("0.75")]
for t in ts:
    vt = ge / 4 * F_inv((1 - t) * F0 + t * F1)
    vts.append(vt)
# re-integration: g(v_t) * (dv/dt)^2 is constant (eps/16)(F1-F0)^2, integral = dhat^2
for t in [mp.mpf("0.3"), mp.mpf("0.7")]:
    vt = ge / 4 * F_inv((1 - t) * F0 + t * F1)
    vdot = ge / 4 * (F1 - F0) * (1 + (4 * vt / ge) ** 2) ** mp.mpf("0.25")
    check(f"constant speed at t={t}", gaussian_metric(vt, ge) * vdot ** 2, ge / 16 * (F1 - F0) ** 2)
check("re-integration equals dhat^2", ge / 16 * (F1 - F0) ** 2, dhat ** 2)
ref["gaussian"] = {
    "epsilon": f2(ge), "v0": f2(gv0), "v1": f2(gv1), "m0": f2(gm0), "m1": f2(gm1),
    "ot_centered": f2(ot_g), "sdiv": f2(sd_g), "sdiv_centered": f2(sd_gc),
    "metric_v0": f2(met0), "metric_v1": f2(met1),
    "F": {"x": vec([x0, x1, mp.mpf("0.5"), mp.mpf(1), mp.mpf(2), mp.mpf(5)]),
          "values": vec([F0, F1, F(mp.mpf("0.5")), F(1), F(2), F(5)])},
    "d_hat": f2(dhat),
    "path": {"t": vec(ts), "v": vec(vts)},
}
print(f"  ot {mp.nstr(ot_g, 25)}  dhat {mp.nstr(dhat, 25)}")

print("nonconvexity")
en = mp.mpf(1)
cases_nc = []
for r in ["0.45", "0.55", "0.58", "0.65", "0.7071067811865476", "0.9", "1.2"]:
    r = mp.mpf(r)
    val = nonconvexity_value(r, en)
    # independent check: FD limit of the closed-form S(mu_r, mu_{r+t}) / t^2
    t = mp.mpf("1e-12")
    fd = (two_dirac_sdiv(r, r + t, en) + two_dirac_sdiv(r, r - t, en)) / (2 * t ** 2)
    check(f"nonconvexity FD r={r}", fd, val, mp.mpf("1e-20"))
    cases_nc.append({"r": f2(r), "value": f2(val)})
zstar = mp.findroot(lambda z: z - 1 - mp.e ** (-z), mp.mpf("1.3"))
rstar = mp.sqrt(zstar) / 2
assert nonconvexity_value(rstar * mp.mpf("0.999"), en) < 1 < nonconvexity_value(rstar * mp.mpf("1.001"), en)
assert nonconvexity_value(mp.sqrt(en / 2), en) > 1
ref["nonconvexity"] = {
    "epsilon": f2(en), "cases": cases_nc,
    "threshold_r_over_sqrt_eps": f2(rstar),
    "threshold_z": f2(zstar),
}
print(f"  sign change at r/sqrt(eps) {mp.nstr(rstar, 25)}")

print("large_eps")
pts_le = [[0.0], [0.4], [1.0]]
mu_le = [mp.mpf("0.5"), mp.mpf("0.3"), mp.mpf("0.2")]
v_le = [mp.mpf("1.0"), mp.mpf("-0.5"), mp.mpf("0.25")]
mean_sq = (sum(m * v for m, v in zip(mu_le, v_le))) ** 2
l2_sq = sum(m * v ** 2 for m, v in zip(mu_le, v_le))
ref["large_eps"] = {
    "points": pts_le, "mu": vec(mu_le), "velocities": vec(v_le),
    "limit": f2(mean_sq), "v_l2_sq": f2(l2_sq),
}

os.makedirs(os.path.dirname(OUT), exist_ok=True)
with open(OUT, "w") as fh:
    json.dump(ref, fh, indent=1)
    fh.write("\n")
print(f"wrote {os.path.normpath(OUT)}")
