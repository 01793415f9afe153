"""High-precision reference values frozen into the Rust test suites.

Run with `python3 scripts/reference_values.py`; every number printed here is
computed with mpmath at 40 significant digits, independently of the Rust code.
"""
import mpmath as mp

mp.mp.dps = 40


def ml(alpha, beta, z):
    alpha, beta, z = mp.mpf(alpha), mp.mpf(beta), mp.mpf(z)
    return mp.nsum(lambda k: z**k / mp.gamma(alpha * k + beta), [0, mp.inf])


def kernel(xi, tau, alpha):
    xi, tau, alpha = mp.mpf(xi), mp.mpf(tau), mp.mpf(alpha)
    f = lambda eta: eta**alpha / ((1 - eta) ** alpha * (tau + eta * (xi - tau)) ** alpha)
    return mp.quad(f, [0, mp.mpf(1) / 2, 1]) / tau ** (1 - alpha)


def show(name, value):
    print(f"{name} = {mp.nstr(value, 17)}")


show("ml(0.5,0.5,1)", ml(0.5, 0.5, 1))
show("ml(0.5,1,-1)", ml(0.5, 1, -1))
show("ml(0.5,1,1)", ml(0.5, 1, 1))
show("ml(0.3,0.3,0.7)", ml(0.3, 0.3, 0.7))
show("ml(0.7,1.2,-2)", ml(0.7, 1.2, -2))

for alpha, xi, tau in [(0.5, 1, 0.5), (0.5, 1, 0.01), (0.3, 2, 0.7), (0.7, 1, 0.999), (0.5, 1, 1e-6)]:
    show(f"K(a={alpha}, xi={xi}, tau={tau})", kernel(xi, tau, alpha))

alpha = mp.mpf("0.5")
c = (1 - alpha) * mp.sin(alpha * mp.pi) / mp.pi
show("R[1](1) a=0.5", c * mp.quad(lambda t: kernel(1, t, alpha), [0, mp.mpf(1) / 1000, mp.mpf(1) / 10, 1]))

a = mp.mpf("0.25")
hi = 2 / mp.gamma(a + 1)
mr = mp.sin(a * mp.pi) / (a * mp.pi)
show("H_I(0.25)", hi)
show("M_R(0.25)", mr)
show("H_J(0.25)", (1 + mr) * hi)
show("M_J(0.25)", 1 + mr)

a = mp.mpf("0.5")
mj = 1 + mp.sin(a * mp.pi) / (a * mp.pi)
hj = mj * 2 / mp.gamma(a + 1)
kappa = (2 * mj) ** (1 / a)
mf = mp.e ** kappa / (mp.gamma(a) * (1 - kappa ** (-a) * mj))
show("kappa A=1 a=0.5", kappa)
show("M_F A=1 a=0.5", mf)
show("H_F A=1 a=0.5", hj * mf * ml(a, 1, mj))

# History w(t) = t^a / Gamma(a+1) on [0, 1/2] (Caputo derivative 1), b = 0.
a = mp.mpf("0.5")
ts = mp.mpf("0.5")
w = lambda t: t**a / mp.gamma(a + 1)
for t in ["0.6", "0.8", "1.0"]:
    t = mp.mpf(t)
    integral = mp.quad(lambda tau: (w(tau) - w(0)) / (t - tau) ** (1 + a), [0, ts])
    bstar = a / mp.gamma(1 - a) * integral - (w(ts) - w(0)) / (mp.gamma(1 - a) * (t - ts) ** a)
    psi = mp.sin(a * mp.pi) / mp.pi * mp.quad(lambda tau: (ts - tau) ** a / (t - tau), [0, ts])
    show(f"b_star({t})", bstar)
    show(f"psi_star({t})", psi)
show("psi_star(0.5)", (w(ts) - w(0)) / mp.gamma(1 - a))

show("gamma(2.5)", mp.gamma(2.5))
show("gamma(0.1)", mp.gamma(0.1))
show("gamma(30)", mp.gamma(30))
show("gamma(7.3)", mp.gamma(7.3))
