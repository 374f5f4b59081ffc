"""Regenerate crates/core/tests/data/specfun_reference.in from mpmath at 50 digits."""
import random
import mpmath as mp

mp.mp.dps = 50
random.seed(20240601)


def f(v):
    return mp.nstr(v, 20, min_fixed=-1, max_fixed=-1) if v != 0 else "0.0"


def rows(name, args, values):
    out = [f"const {name}: &[({', '.join(['f64'] * (len(args[0]) + 1))})] = &["]
    for a, v in zip(args, values):
        out.append("    (" + ", ".join(repr(float(x)) for x in a) + ", " + f(v) + "),")
    out.append("];")
    return "\n".join(out)


ln_gamma_args = [(10 ** random.uniform(-3, 6),) for _ in range(60)]
bessel_i_args = [(random.uniform(0, 200), random.uniform(0, 700)) for _ in range(60)]
bessel_k_args = [(random.uniform(-200, 200), 10 ** random.uniform(-3, 2.845)) for _ in range(60)]
kummer_args = [(random.uniform(0.1, 30), random.uniform(0.1, 30), random.uniform(0, 200)) for _ in range(60)]
kummer_args.append((2.0, 3.0, 1.5))
tricomi_args = [(random.uniform(0.05, 40), random.uniform(0.05, 60), 10 ** random.uniform(-3, 2.5)) for _ in range(60)]
tricomi_args += [(random.uniform(0.05, 20), -random.uniform(0, 30), 10 ** random.uniform(-2, 2)) for _ in range(20)]
tricomi_args += [(0.5, 1.0, 2.0), (-1.0, 0.5, 2.0), (-3.0, -2.5, 0.7)]
inc_gamma_args = []
for _ in range(60):
    a = 10 ** random.uniform(-2, 3)
    inc_gamma_args.append((a, a * random.uniform(0, 3)))
inc_beta_args = [(random.uniform(0, 1), 10 ** random.uniform(-1.5, 2.5), 10 ** random.uniform(-1.5, 2.5)) for _ in range(60)]

parts = [
    "// Generated by tools/specfun_reference.py (mpmath, 50 digits). Do not edit.",
    "",
    rows("LN_GAMMA", ln_gamma_args, [mp.loggamma(a) for (a,) in ln_gamma_args]),
    rows("LN_BESSEL_I", bessel_i_args, [mp.log(mp.besseli(n, x)) if x > 0 or n == 0 else mp.mpf("-inf") for n, x in bessel_i_args]),
    rows("LN_BESSEL_K", bessel_k_args, [mp.log(mp.besselk(n, x)) for n, x in bessel_k_args]),
    rows("LN_KUMMER_M", kummer_args, [mp.log(mp.hyp1f1(a, b, x)) for a, b, x in kummer_args]),
    rows("TRICOMI_U", tricomi_args, [mp.hyperu(a, b, x) for a, b, x in tricomi_args]),
    rows("REG_LOWER_GAMMA", inc_gamma_args, [mp.gammainc(a, 0, x, regularized=True) for a, x in inc_gamma_args]),
    rows("REG_INC_BETA", inc_beta_args, [mp.betainc(a, b, 0, x, regularized=True) for x, a, b in inc_beta_args]),
]
print("\n\n".join(parts))
