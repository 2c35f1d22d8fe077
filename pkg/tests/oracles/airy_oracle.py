"""High-precision reference values for the scalar cubic integral.

F(y) = ∫ exp(x³/6 + y·x) dx along the upward vertical line Re x = a, with
a = sqrt(-2y) the decaying saddle.  Evaluated with mpmath at 40 digits, two
ways (direct quadrature and the Airy closed form 2πi·2^{1/3}·Ai(-2^{1/3}y)).
The first subleading coefficient of F̂ = F / F_[2] in 1/ζ, ζ = a³/2, is
obtained by Richardson extrapolation of ζ(F̂ - 1).

Run:  python3 tests/oracles/airy_oracle.py   (rewrites airy_values.json)
"""
import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40
HERE = Path(__file__).parent


def saddle(y):
    return mp.sqrt(-2 * mp.mpf(y))


def raw_quadrature(y):
    y = mp.mpf(y)
    a = saddle(y)
    fstar = y * a + a ** 3 / 6

    def g(t):
        x = a + 1j * t
        return mp.exp(x ** 3 / 6 + y * x - fstar)

    w = 1 / mp.sqrt(a)
    val = 1j * mp.quad(g, [-mp.inf, -4 * w, 0, 4 * w, mp.inf])
    return val * mp.exp(fstar)


def raw_closed_form(y):
    c = mp.cbrt(2)
    return 2j * mp.pi * c * mp.airyai(-c * mp.mpf(y))


def gaussian(y):
    a = saddle(y)
    fstar = mp.mpf(y) * a + a ** 3 / 6
    return 1j * mp.exp(fstar) * mp.sqrt(2 * mp.pi / a)


def normalized(y):
    return raw_closed_form(y) / gaussian(y)


def zeta(y):
    return saddle(y) ** 3 / 2


def richardson_c1(zetas=(1e4, 2e4, 4e4, 8e4, 1.6e5, 3.2e5)):
    """Extrapolate g(ζ) = ζ(F̂ − 1) = c1 + c2/ζ + ... to ζ → ∞."""
    mp.mp.dps = 60
    vals = []
    for z in zetas:
        a = mp.cbrt(2 * mp.mpf(z))
        y = -a ** 2 / 2
        fh = normalized(y)
        vals.append(mp.re(fh - 1) * z)
    # repeated Richardson with ratio 2 in the variable 1/ζ
    table = [vals]
    for k in range(1, len(vals)):
        prev = table[-1]
        table.append([(2 ** k * prev[i + 1] - prev[i]) / (2 ** k - 1) for i in range(len(prev) - 1)])
    mp.mp.dps = 40
    return table[-1][0], table[-2]


def main():
    ys = [-1, -2, -3, -5, -10, -20]
    out = {"ys": {}, "c1": None}
    for y in ys:
        q = raw_quadrature(y)
        c = raw_closed_form(y)
        assert abs(q - c) < mp.mpf(10) ** -25 * abs(c), (y, q, c)
        n = normalized(y)
        out["ys"][str(y)] = {
            "raw": [mp.nstr(mp.re(c), 25), mp.nstr(mp.im(c), 25)],
            "normalized": [mp.nstr(mp.re(n), 25), mp.nstr(mp.im(n), 25)],
            "gaussian": [mp.nstr(mp.re(gaussian(y)), 25), mp.nstr(mp.im(gaussian(y)), 25)],
        }
    c1, last = richardson_c1()
    out["c1"] = mp.nstr(c1, 20)
    out["c1_spread"] = mp.nstr(max(abs(v - c1) for v in last), 5)
    (HERE / "airy_values.json").write_text(json.dumps(out, indent=2) + "\n")
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
