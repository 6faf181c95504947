"""Independent reference values for the unit tests, computed with mpmath.

Run `python3 tests/oracles/reference_values.py` to regenerate; the printed
numbers are frozen as literals in the C++ suites.
"""
import mpmath as mp

mp.mp.dps = 30
pi, e = mp.pi, mp.e


def quad(f, a, b):
    return mp.quad(f, [a, 0, b] if a < 0 < b else [a, b])


def show(name, value):
    print(f"{name:<40} {mp.nstr(value, 17)}")


# q-Gaussian normalizations and moments.
show("Z(q=1.5,alpha=2,gamma=1)", quad(lambda x: (1 - 0.5 * x**2) ** 2, -mp.sqrt(2), mp.sqrt(2)))
show("Z(q=0.5,alpha=2,gamma=1)", quad(lambda x: (1 + 0.5 * x**2) ** -2, -mp.inf, mp.inf))
show("Z(q=2,alpha=3,gamma=1)", quad(lambda x: 1 - abs(x) ** 3, -1, 1))
show("moment(q=0.5,alpha=2,gamma=1)",
     quad(lambda x: x**2 * (1 + 0.5 * x**2) ** -2, -mp.inf, mp.inf)
     / quad(lambda x: (1 + 0.5 * x**2) ** -2, -mp.inf, mp.inf))

# Radial 3-D q-Gaussian, q=2 alpha=2 gamma=1: Z = 4 pi int r^2 (1-r^2) dr.
show("Z3(q=2,alpha=2,gamma=1)", 4 * pi * quad(lambda r: r**2 * (1 - r**2), 0, 1))

# Information generating function and entropies.
gauss = lambda x: mp.exp(-x**2 / 2) / mp.sqrt(2 * pi)
show("M_2[N(0,1)]", quad(lambda x: gauss(x) ** 2, -mp.inf, mp.inf))
show("H[N(0,1)]", mp.log(2 * pi * e) / 2)
show("N_1[N(0,1)]", 2 * pi * e)

G2 = lambda x: 0.75 * (1 - x**2) if abs(x) < 1 else mp.mpf(0)
dG2 = lambda x: -1.5 * x
M2 = quad(lambda x: G2(x) ** 2, -1, 1)
phi = quad(lambda x: G2(x) * dG2(x) ** 2, -1, 1)
show("M_2[G(q=2,alpha=2)]", M2)
show("phi_{2,2}[G(q=2,alpha=2)]", phi)
show("I_{2,2}[G(q=2,alpha=2)]", phi / M2**2)
show("Stam product G(q=2,beta=2)", mp.sqrt(phi / M2**2) * mp.sqrt(M2 ** -2))

# Two-Gaussian mixture, modes +-2, sigma 0.5.
s = mp.mpf("0.5")
mix = lambda x: (mp.exp(-(x - 2) ** 2 / (2 * s * s)) + mp.exp(-(x + 2) ** 2 / (2 * s * s))) / (2 * s * mp.sqrt(2 * pi))
dmix = lambda x: (-(x - 2) * mp.exp(-(x - 2) ** 2 / (2 * s * s)) - (x + 2) * mp.exp(-(x + 2) ** 2 / (2 * s * s))) / (
    2 * s**3 * mp.sqrt(2 * pi))
J = mp.quad(lambda x: dmix(x) ** 2 / mix(x), [-mp.inf, -2, 0, 2, mp.inf])
second = mp.quad(lambda x: x**2 * mix(x), [-mp.inf, -2, 0, 2, mp.inf])
H = -mp.quad(lambda x: mix(x) * mp.log(mix(x)), [-mp.inf, -2, 0, 2, mp.inf])
show("mixture Fisher", J)
show("mixture qcr product (q=1,alpha=2)", mp.sqrt(second) * mp.sqrt(J))
show("mixture Stam ratio (q=1,beta=2)", mp.sqrt(J) * mp.exp(H) / mp.sqrt(2 * pi * e))

# Gaussian location with alpha = 4 (beta = 4/3), sigma = 1.
abs_moment = lambda p: 2 ** (p / 2) * mp.gamma((p + 1) / 2) / mp.sqrt(pi)
show("CR alpha=4 lhs", (3) ** 0.25)
show("CR alpha=4 rhs", 1 / abs_moment(mp.mpf(4) / 3) ** (mp.mpf(3) / 4))

# Barenblatt constants.
k = mp.mpf(1) / 12
show("C(m=2,beta=2,n=1)", (3 * mp.sqrt(k) / 4) ** (mp.mpf(2) / 3))
show("heat kernel at x=0,t=1", 1 / mp.sqrt(4 * pi))
# m=1, beta=3 (q=1.5, alpha=1.5, delta=4): B = (C - k|xi|^1.5)_+^2 with k = 1/6.
k13 = mp.mpf(1) / 6
mass13 = lambda C: 2 * mp.quad(lambda x: (C - k13 * x ** 1.5) ** 2, [0, (C / k13) ** (mp.mpf(2) / 3)])
show("C(m=1,beta=3,n=1)", mp.findroot(lambda C: mass13(C) - 1, 0.3))
