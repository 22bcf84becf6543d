"""High-precision reference values for the default parameter set.

Independent of the C++ implementation: bisection on the calibration
objective, adaptive quadrature for the k-integral, direct 2x2 inversion.
Run: python3 tools/oracles/kyle_oracle.py
"""
import mpmath as mp

mp.mp.dps = 40


def calibrate(sigma, T, sxi, sbeta, eps, gamma):
    se = mp.sqrt(sxi**2 + eps**2 * gamma**2 * (sigma**2 * T + sbeta**2))
    c = (sxi**2 + eps**2 * gamma**2 * sbeta**2) / (sigma**2 * T)
    g = gamma * sigma**2 * T

    def F(x):
        return x**2 / (1 - g * x) - 2 * eps / (sigma**2 * T) * mp.log(1 - g * x) - c

    lo, hi = mp.mpf(0), (1 / g if g > 0 else mp.mpf(100))
    for _ in range(400):
        mid = (lo + hi) / 2
        if F(mid) > 0:
            hi = mid
        else:
            lo = mid
    lam = (lo + hi) / 2
    v = se / (lam + eps * gamma)
    return se, lam, v


def report(sigma, T, sxi, sbeta, eps, gamma, mxi=0, mbeta=0):
    sigma, T, sxi, sbeta, eps, gamma = map(mp.mpf, (sigma, T, sxi, sbeta, eps, gamma))
    se, lam, v = calibrate(sigma, T, sxi, sbeta, eps, gamma)
    a = v * eps * gamma / se

    def k(t):
        g = gamma * sigma**2 * lam * (T - t)
        return (1 - a * g) / (1 - g)

    k0 = k(0)
    qT_coef = (mxi - eps * gamma * mbeta)
    # m solves -m + (qc - se/v m)/lam (k0-1) = 0
    m = qT_coef * (k0 - 1) / lam / (1 + se / v * (k0 - 1) / lam)
    print("sigma_e", mp.nstr(se, 20))
    print("v", mp.nstr(v, 20))
    print("lambda", mp.nstr(lam, 20))
    print("m", mp.nstr(m, 20))
    print("k0", mp.nstr(k0, 20))
    ik = mp.quad(lambda s: k(s) ** 2, [0, T / 2])
    print("int_k2(T/2)", mp.nstr(ik, 20))
    ikT = mp.quad(lambda s: k(s) ** 2, [0, T])
    print("int_k2(T)", mp.nstr(ikT, 20), "v^2/sigma^2", mp.nstr(v**2 / sigma**2, 20))
    t = T / 2
    u = mp.matrix([eps * gamma * (sigma**2 * T + sbeta**2), sxi**2])
    D = mp.matrix([[sigma**2 * t + sbeta**2, 0], [0, sxi**2]])
    S = D - sigma**2 * ik / (se**2 * v**2) * (u * u.T)
    print("Sigma(T/2)", [mp.nstr(S[i, j], 20) for i in range(2) for j in range(2)])
    Si = S**-1
    print("SigmaInv(T/2)", [mp.nstr(Si[i, j], 20) for i in range(2) for j in range(2)])
    p = 1 / (1 / lam - gamma * sigma**2 * (T - t))
    print("p(T/2)", mp.nstr(p, 20))
    mm = eps / lam * (1 - eps * gamma * (sigma**2 * T + sbeta**2) / (se * v)) * mp.log(1 - gamma * lam * sigma**2 * T)
    print("mm_profit", mp.nstr(mm, 20))
    var = sigma**2 * T + sbeta**2
    mm_exact = eps * gamma / se**2 * (-eps * var * mp.log(1 - gamma * lam * sigma**2 * T) - sxi**2 * sigma**2 * T)
    print("mm_profit_exact", mp.nstr(mm_exact, 20))
    lim = (se / v) ** 2 - eps**2 * gamma**2
    print("one_minus_f_limit", mp.nstr(sigma**2 / se**2 * lim, 20))

    # u(t, chi) = p chi^2/2 + q chi + s with s from quadrature of s' = -sigma^2/2 (p + gamma q^2)
    qT = qT_coef - se / v * m
    sT = se * m**2 / (2 * v) - m * qT_coef

    def pp(t):
        return 1 / (1 / lam - gamma * sigma**2 * (T - t))

    def qq(t):
        return qT / (1 - gamma * sigma**2 * lam * (T - t))

    s_half = sT + mp.quad(lambda r: sigma**2 / 2 * (pp(r) + gamma * qq(r) ** 2), [T / 2, T])
    print("q(T/2)", mp.nstr(qq(T / 2), 20))
    print("s(T/2)", mp.nstr(s_half, 20))
    s0 = sT + mp.quad(lambda r: sigma**2 / 2 * (pp(r) + gamma * qq(r) ** 2), [0, T])
    print("s(0)", mp.nstr(s0, 20))


def flow_oracle(sigma, T, sxi, sbeta, eps, gamma, t_end, x0, n):
    """Plain RK4 in t for dx = -sigma^2 r (r - e1)' Sigma^-1 x dt, floats."""
    se, lam, v = (float(z) for z in calibrate(*map(mp.mpf, (sigma, T, sxi, sbeta, eps, gamma))))
    a = v * eps * gamma / se
    var = sigma**2 * T + sbeta**2
    u = (eps * gamma * var, sxi**2)

    def k(t):
        g = gamma * sigma**2 * lam * (T - t)
        return (1 - a * g) / (1 - g)

    # state (x1, x2, int_0^t k^2)
    def rhs(t, st):
        x0_, x1_, ik = st
        kt = k(t)
        r = (kt * u[0] / (se * v), kt * u[1] / (se * v))
        c = sigma**2 * ik / (se * v) ** 2
        s11 = sigma**2 * t + sbeta**2 - c * u[0] ** 2
        s12 = -c * u[0] * u[1]
        s22 = sxi**2 - c * u[1] ** 2
        det = s11 * s22 - s12 * s12
        y1 = (s22 * x0_ - s12 * x1_) / det
        y2 = (-s12 * x0_ + s11 * x1_) / det
        coef = -sigma**2 * ((r[0] - 1) * y1 + r[1] * y2)
        return (coef * r[0], coef * r[1], kt * kt)

    h = t_end / n
    st = (x0[0], x0[1], 0.0)
    for i in range(n):
        t = i * h
        k1 = rhs(t, st)
        k2 = rhs(t + h / 2, tuple(st[j] + h / 2 * k1[j] for j in range(3)))
        k3 = rhs(t + h / 2, tuple(st[j] + h / 2 * k2[j] for j in range(3)))
        k4 = rhs(t + h, tuple(st[j] + h * k3[j] for j in range(3)))
        st = tuple(st[j] + h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]) for j in range(3))
    return st[0], st[1]


if __name__ == "__main__":
    print("# default derived set")
    report(1, 1, 1, 0.5, 0.2, 0.5)
    print("# m_xi = 1")
    report(1, 1, 1, 0.5, 0.2, 0.5, mxi=1)
    print("# flow Phi_{0, T/2}(1, 1), default set")
    print("%.17g %.17g" % flow_oracle(1, 1, 1, 0.5, 0.2, 0.5, 0.5, (1.0, 1.0), 20000))
    print("# flow Phi_{0, 0.999T}(1, 1), default set")
    print("%.17g %.17g" % flow_oracle(1, 1, 1, 0.5, 0.2, 0.5, 0.999, (1.0, 1.0), 400000))
