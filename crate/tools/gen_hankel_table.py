"""Reference values of H_0^(1)(z) and H_1^(1)(z) computed with mpmath.

Values come from H_nu(z) = (2/pi) K_nu(-iz) / i^(nu+1), which avoids the J/Y
cancellation mpmath.hankel1 suffers for large Im z. A 250-digit hankel1
evaluation is used as a cross-check.

Writes one line per (order, z): order re(z) im(z) re(H) im(H).
"""
import mpmath as mp

mp.mp.dps = 40

magnitudes = ["0.001", "0.01", "0.3", "1", "1.9", "2.1", "3.7", "8", "12.5",
              "16.9", "17.1", "25", "60", "199"]
# phases as fractions of pi/2 on [0, pi] (upper half plane)
phases = ["0", "0.25", "0.5", "0.75", "1", "1.5", "1.9", "2"]

print("# order re_z im_z re_h im_h")
for r in magnitudes:
    for p in phases:
        z = mp.mpf(r) * mp.expjpi(mp.mpf(p) / 2)
        if abs(z.imag) < mp.mpf(10) ** -40:
            z = mp.mpc(z.real, 0)
        if abs(z.real) < mp.mpf(10) ** -40:
            z = mp.mpc(0, z.imag)
        for order in (0, 1):
            h = 2 / mp.pi * mp.besselk(order, -1j * z) / (1j) ** (order + 1)
            with mp.workdps(250):
                check = mp.hankel1(order, z)
            assert abs(h - check) <= mp.mpf(10) ** -30 * abs(h), (order, z)
            print(order, mp.nstr(z.real, 25), mp.nstr(z.imag, 25),
                  mp.nstr(h.real, 25), mp.nstr(h.imag, 25))
