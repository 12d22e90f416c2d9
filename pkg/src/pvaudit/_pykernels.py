"""Pure-Python hot kernels.

Mirrors ``_ckernels.pyx`` operation for operation so both backends return
bit-identical floats. Keep the two files in lockstep.
"""

import math

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_TWO_M52 = 2.220446049250313e-16

# Wichura AS241 (PPND16) coefficients.
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(c, x):
    return (((((((c[7] * x + c[6]) * x + c[5]) * x + c[4]) * x + c[3]) * x + c[2]) * x
             + c[1]) * x + c[0])


def mix64(x):
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def stream_key(seed, index):
    return mix64(seed ^ mix64(((index + 1) * _GOLDEN) & _MASK))


def uniform_at(key, counter):
    """Uniform in the open interval (0, 1) at position ``counter`` of stream ``key``."""
    x = mix64((key + (counter + 1) * _GOLDEN) & _MASK)
    return ((x >> 12) + 0.5) * _TWO_M52


def normal_quantile(p):
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _poly(_A, r) / _poly(_B, r)
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r = r - 1.6
        val = _poly(_C, r) / _poly(_D, r)
    else:
        r = r - 5.0
        val = _poly(_E, r) / _poly(_F, r)
    return -val if q < 0.0 else val


def altman_bland_p(z):
    return math.exp(-0.717 * z - 0.416 * z * z)


def altman_bland_batch(rr, lcl, ucl, z_crit):
    out = []
    for r, lo, hi in zip(rr, lcl, ucl):
        se = (math.log(hi) - math.log(lo)) / (2.0 * z_crit)
        z = abs(math.log(r)) / se
        out.append(math.exp(-0.717 * z - 0.416 * z * z))
    return out


def ks_statistic(sorted_values):
    n = len(sorted_values)
    d = 0.0
    for i in range(n):
        x = sorted_values[i]
        hi = (i + 1) / n - x
        lo = x - i / n
        if hi > d:
            d = hi
        if lo > d:
            d = lo
    return d


def simulate_studies(seed, start, count, m_tests, n_hacked, delta, se_lo, se_hi):
    """Draw (estimate, se) for studies ``start .. start+count-1``.

    Studies with index below ``n_hacked`` report the largest-|z| estimate among
    ``m_tests`` null draws; the rest report one draw centred on ``delta``.
    """
    ests = []
    ses = []
    width = se_hi - se_lo
    for i in range(start, start + count):
        key = stream_key(seed, i)
        se = se_lo + width * uniform_at(key, 0)
        if i < n_hacked:
            best = 0.0
            best_abs = -1.0
            for j in range(1, m_tests + 1):
                e = se * normal_quantile(uniform_at(key, j))
                if abs(e) > best_abs:
                    best_abs = abs(e)
                    best = e
            ests.append(best)
        else:
            ests.append(delta + se * normal_quantile(uniform_at(key, 1)))
        ses.append(se)
    return ests, ses
