#!/usr/bin/env python3
"""Regenerates the frozen reference values used by the C++ test suites.

Everything here is computed directly from the closed-form expressions for
shunt/line ABCD matrices, the Floquet modal admittances and the ABCD->S
conversion, independently of the C++ library. Output: table1_final_s21.csv
plus a block of scalar constants printed to stdout (pasted into the tests).
"""

import cmath
import math

C0 = 299792458.0
MU0 = 4.0 * math.pi * 1e-7
EPS0 = 1.0 / (MU0 * C0 * C0)
ETA0 = math.sqrt(MU0 / EPS0)

PERIOD = 18e-3


def modal_admittances(period, k, freq, eps_r=1.0):
    w = 2.0 * math.pi * freq
    k0 = w * math.sqrt(eps_r) / C0
    kt = 2.0 * math.pi * k / period
    q = math.sqrt(kt * kt - k0 * k0)
    y_te = complex(0.0, -q / (w * MU0))
    y_tm = complex(0.0, w * EPS0 * eps_r / q)
    return y_te, y_tm


def y_eq(params, period, freq, eps_r=1.0):
    l0, c0, alpha_l, alpha_c = params
    w = 2.0 * math.pi * freq
    y = complex(0.0, -1.0 / (w * l0)) + complex(0.0, w * c0)
    for k, a in enumerate(alpha_l, start=1):
        y += a * modal_admittances(period, k, freq, eps_r)[0]
    for k, a in enumerate(alpha_c, start=1):
        y += a * modal_admittances(period, k, freq, eps_r)[1]
    return y


def mat_mul(m, n):
    return (
        m[0] * n[0] + m[1] * n[2],
        m[0] * n[1] + m[1] * n[3],
        m[2] * n[0] + m[3] * n[2],
        m[2] * n[1] + m[3] * n[3],
    )


def abcd_shunt(y):
    return (1.0 + 0j, 0j, y, 1.0 + 0j)


def abcd_line(d, freq, eps_r=1.0):
    beta = 2.0 * math.pi * freq * math.sqrt(eps_r) / C0
    z = ETA0 / math.sqrt(eps_r)
    bd = beta * d
    return (
        complex(math.cos(bd), 0.0),
        complex(0.0, z * math.sin(bd)),
        complex(0.0, math.sin(bd) / z),
        complex(math.cos(bd), 0.0),
    )


def stack_s21(screens, dists, period, freq, eps_r=1.0):
    m = abcd_shunt(y_eq(screens[0], period, freq, eps_r))
    for i in range(1, len(screens)):
        m = mat_mul(m, abcd_line(dists[i - 1], freq, eps_r))
        m = mat_mul(m, abcd_shunt(y_eq(screens[i], period, freq, eps_r)))
    z0 = ETA0 / math.sqrt(eps_r)
    a, b, c, d = m
    delta = a + b / z0 + c * z0 + d
    return 2.0 / delta


def fmt(x):
    return repr(float(x))


# Four-screen circuit, final parameter column (single explicit harmonic).
SCREENS = [
    (1.8522e-09, 2.9064e-13, [2.4792e-07], [4.2703e-11]),
    (1.5292e-09, 3.5589e-13, [2.0562e-07], [4.9911e-11]),
    (1.4612e-09, 3.7264e-13, [2.0361e-07], [5.2064e-11]),
    (1.7276e-09, 3.4225e-13, [2.1389e-07], [4.8811e-11]),
]
DISTS = [10.2788e-3, 8.2938e-3, 9.9791e-3]

F_MIN, F_MAX, N_FREQ = 2e9, 16e9, 200


def main():
    print("eta0 =", fmt(ETA0))
    print("eps0 =", fmt(EPS0))
    print("cutoff_k1_hz =", fmt(C0 / PERIOD))

    f = 10e9
    yte, ytm = modal_admittances(PERIOD, 1, f)
    print("y_te(18mm,k=1,10GHz) =", fmt(yte.real), fmt(yte.imag))
    print("y_tm(18mm,k=1,10GHz) =", fmt(ytm.real), fmt(ytm.imag))

    y1 = y_eq(SCREENS[0], PERIOD, f)
    print("y_eq(screen1,10GHz) =", fmt(y1.real), fmt(y1.imag))

    line = abcd_line(10.3e-3, f)
    print("line(10.3mm,10GHz) a =", fmt(line[0].real), fmt(line[0].imag))
    print("line(10.3mm,10GHz) b =", fmt(line[1].real), fmt(line[1].imag))
    print("line(10.3mm,10GHz) c =", fmt(line[2].real), fmt(line[2].imag))
    print("line(10.3mm,10GHz) d =", fmt(line[3].real), fmt(line[3].imag))

    # Adam sanity: minimize (p-3)^2 from p=0, lr=0.1, 500 steps.
    p, m, v = 0.0, 0.0, 0.0
    lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
    for t in range(1, 501):
        g = 2.0 * (p - 3.0)
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        mh = m / (1.0 - b1**t)
        vh = v / (1.0 - b2**t)
        p -= lr * mh / (math.sqrt(vh) + eps)
    print("adam_quadratic_p500 =", fmt(p), "err =", fmt(abs(p - 3.0)))

    step = (F_MAX - F_MIN) / (N_FREQ - 1)
    rows = []
    for j in range(N_FREQ):
        fj = F_MAX if j == N_FREQ - 1 else F_MIN + j * step
        s = stack_s21(SCREENS, DISTS, PERIOD, fj)
        rows.append((fj, s))
    with open("table1_final_s21.csv", "w") as out:
        out.write("freq_hz,s21_re,s21_im\n")
        for fj, s in rows:
            out.write("%s,%s,%s\n" % (fmt(fj), fmt(s.real), fmt(s.imag)))
    mags = [abs(s) for _, s in rows]
    print("rows =", len(rows), "max|s21| =", fmt(max(mags)), "min|s21| =", fmt(min(mags)))


if __name__ == "__main__":
    main()
