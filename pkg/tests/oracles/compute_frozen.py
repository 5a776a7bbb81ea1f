"""Regenerate ``tests/frozen.py`` from independent 40-digit mpmath evaluations.

Run ``python3 tests/oracles/compute_frozen.py > tests/frozen.py``. Nothing
here imports the package.
"""

import mpmath as mp

mp.mp.dps = 40


def hyper(p):
    root = mp.sqrt(4 + 12 * (p - 1) - 3 * (p - 1) ** 2)
    return (3 - p + root) / (4 * (p - 1)), (3 - p - root) / (4 * (p - 1)), p / (p - 1)


def upsilon(p, x):
    a, b, c = hyper(p)
    return mp.hyp2f1(a, b, c, x), -(5 - p) / (4 * p) * mp.hyp2f1(a + 1, b + 1, c + 1, x)


def k_p(p):
    a, b, c = hyper(p)
    return mp.gamma(0.5) * mp.gamma(c) / (mp.gamma(a + 1.5) * mp.gamma(b + 1.5))


def c_b(p):
    a, b, c = hyper(p)
    return mp.gamma(0.5) * mp.gamma(c) / (mp.gamma(a + 1) * mp.gamma(b + 1))


def green_u(Lambda, p, r):
    q = 1 / (p - 1)
    R = mp.sqrt(3 / Lambda)
    # rho = R sin(theta) removes the inverse square root at the equator
    return mp.quad(lambda th: (R * mp.sin(th)) ** (-2 * q) * R, [mp.asin(r / R), mp.pi / 2])


def model_coefficients(Lambda, p, t):
    """alpha, mu, exp(lambda) on the de Sitter level w = t."""
    w = lambda r: -(p - 1) * mp.log(green_u(Lambda, p, r))
    R = mp.sqrt(3 / Lambda)
    r = mp.findroot(lambda s: w(s) - t, (R * mp.mpf("0.001"), R * mp.mpf("0.999")), solver="anderson")
    beta = (3 - p) / (p - 1)
    x = Lambda * r * r / 3
    alpha = green_u(Lambda, p, r) * mp.sqrt(1 - x) * r ** beta / (p - 1)
    ups, dups = upsilon(p, x)
    pref = r / (8 * mp.pi * (1 - x))
    Phi = pref * ups
    Psi = pref * (ups + 2 * (p - 1) / (5 - p) * x * dups)
    return r, alpha, alpha * Phi / Psi, alpha * Psi


def emit(name, value):
    print(f"{name} = {mp.nstr(value, 20)}")


print('"""Frozen oracle values; regenerate with tests/oracles/compute_frozen.py."""')
print()
a, b, c = hyper(mp.mpf(2))
emit("A_P2", a)
emit("B_P2", b)
emit("UPSILON_P2_HALF", upsilon(mp.mpf(2), mp.mpf("0.5"))[0])
emit("UPSILON_PRIME_P2_HALF", upsilon(mp.mpf(2), mp.mpf("0.5"))[1])
for p in ("1.5", "2", "2.5"):
    tag = p.replace(".", "_")
    emit(f"K_P{tag}", k_p(mp.mpf(p)))
    emit(f"C_B{tag}", c_b(mp.mpf(p)))
roots = sorted(r.real for r in mp.polyroots([1, 0, -1, mp.mpf("0.2")]) if r.real > 0)
emit("SDS_R_MINUS", roots[0])
emit("SDS_R_PLUS", roots[1])
emit("CLIFFORD_L3", mp.sqrt(3 * mp.pi / 24) * (1 - mp.pi / 2))
emit("U_L3_P1_5_R0_3", green_u(mp.mpf(3), mp.mpf("1.5"), mp.mpf("0.3")))
emit("U_L0_3_P2_5_R1", green_u(mp.mpf("0.3"), mp.mpf("2.5"), mp.mpf(1)))
for Lambda, p, t in (("3", "1.5", "0"), ("0.3", "2.5", "1"), ("3", "2", "-2")):
    tag = f"L{Lambda}_P{p}_T{t}".replace(".", "_").replace("-", "M")
    r, alpha, mu, el = model_coefficients(mp.mpf(Lambda), mp.mpf(p), mp.mpf(t))
    emit(f"R_{tag}", r)
    emit(f"ALPHA_{tag}", alpha)
    emit(f"MU_{tag}", mu)
    emit(f"EXP_LAMBDA_{tag}", el)
