"""Regenerate bessel.csv with mpmath at 40 digits.

    python3 gen_bessel.py > bessel.csv
"""
import mpmath as mp

mp.mp.dps = 40

REAL_X = [0.05, 0.5, 1.0, 3.0, 5.5, 7.9, 8.1, 12.0, 24.9, 25.1, 40.0, 75.5, 150.0, 600.0]
COMPLEX_Z = [(3, 0), (0.5, 0.5), (2, 1), (7.5, 3), (10, 0.25), (19, 2), (21, 2), (30, 10), (60, 0.01), (0.1, 25)]


def row(kind, n, x, y, v):
    v = mp.mpc(v)
    print(f"{kind},{n},{mp.nstr(x, 17)},{mp.nstr(y, 17)},{mp.nstr(v.real, 20)},{mp.nstr(v.imag, 20)}")


print("kind,n,x,y,re,im")
for x in REAL_X:
    for n in range(0, 6):
        row("J", n, x, 0, mp.besselj(n, x))
    row("Y", 0, x, 0, mp.bessely(0, x))
    row("Y", 1, x, 0, mp.bessely(1, x))
for x, y in COMPLEX_Z:
    z = mp.mpc(x, y)
    row("H1", 1, x, y, mp.besselj(1, z) + 1j * mp.bessely(1, z))
