"""Direct-loop reference evaluation of every bound, used as an independent oracle.

Nothing here is shared with :mod:`innerbounds.bounds`: no compensated sums, no
log-space evaluation, no formula tables.  Arithmetic is done in mpmath at 40
digits so that powers like ``|a|**(alpha*p)`` with ``alpha*p ~ 10^4`` stay
representable.
"""

from __future__ import annotations

from typing import Dict, Optional, Sequence

import mpmath

_DPS = 40


def _conj_exp(t):
    return t / (t - 1)


def naive_values(g: Sequence[Sequence[complex]], proj: Sequence[complex], norm_x_sq: float,
                 c: Optional[Sequence[complex]], p: float, alpha: Optional[float] = None,
                 gamma: Optional[float] = None) -> Dict[str, float]:
    """Every left-hand side and bound, keyed like :class:`innerbounds.bounds.Ladder` names."""
    with mpmath.workdps(_DPS):
        return _values(g, proj, norm_x_sq, c, p, alpha, gamma)


def _values(g, proj, norm_x_sq, c, p, alpha, gamma):
    mpf, mpc = mpmath.mpf, mpmath.mpc
    n = len(g)
    G = [[mpc(complex(g[i][j])) for j in range(n)] for i in range(n)]
    absG = [[abs(G[i][j]) for j in range(n)] for i in range(n)]
    r = []
    for i in range(n):
        s = mpf(0)
        for j in range(n):
            s += absG[i][j]
        r.append(s)
    S = mpf(0)
    for v in r:
        S += v
    R = max(r)
    p = mpf(p)
    q = _conj_exp(p)
    have_ab = alpha is not None
    have_gd = gamma is not None
    if have_ab:
        al = mpf(alpha)
        be = _conj_exp(al)
    if have_gd:
        ga = mpf(gamma)
        de = _conj_exp(ga)
    nx2 = mpf(norm_x_sq)
    nx = mpmath.sqrt(nx2)

    def psum(a, t):
        s = mpf(0)
        for v in a:
            if v != 0:
                s += v ** t
        return s

    def rsum(t):
        s = mpf(0)
        for v in r:
            if v != 0:
                s += v ** t
        return s

    def wsum(a, t):
        s = mpf(0)
        for i in range(n):
            if a[i] != 0:
                s += a[i] ** t * r[i]
        return s

    def rt(x, e):
        return mpf(0) if x == 0 else x ** e

    def lemma_branches(a):
        amax = max(a)
        out = {}
        out[1] = amax ** 2 * S
        out[3] = amax * rt(psum(a, q), 1 / q) * rt(S, 1 / p) * rt(R, 1 / q)
        out[7] = rt(psum(a, p), 1 / p) * rt(R, 1 / p) * amax * rt(S, 1 / q)
        out[9] = rt(psum(a, p), 1 / p) * rt(psum(a, q), 1 / q) * R
        if have_gd:
            out[2] = amax * rt(psum(a, ga * q), 1 / (ga * q)) * rt(S, 1 / p) * rt(rsum(de), 1 / (de * q))
            out[8] = rt(psum(a, p), 1 / p) * rt(R, 1 / p) * rt(psum(a, ga * q), 1 / (ga * q)) * rt(rsum(de), 1 / (de * q))
        if have_ab:
            fp = rt(psum(a, al * p), 1 / (al * p)) * rt(rsum(be), 1 / (be * p))
            out[4] = fp * amax * rt(S, 1 / q)
            out[6] = fp * rt(psum(a, q), 1 / q) * rt(R, 1 / q)
        if have_ab and have_gd:
            out[5] = (rt(psum(a, al * p), 1 / (al * p)) * rt(rsum(be), 1 / (be * p))
                      * rt(psum(a, ga * q), 1 / (ga * q)) * rt(rsum(de), 1 / (de * q)))
        return out

    vals = {}
    u = [abs(mpc(complex(z))) for z in proj]
    if c is not None:
        cc = [mpc(complex(z)) for z in c]
        alphas = [mpmath.conj(z) for z in cc]
        a = [abs(z) for z in alphas]
        quad = mpc(0)
        M = mpf(0)
        for i in range(n):
            for j in range(n):
                quad += alphas[i] * mpmath.conj(alphas[j]) * G[i][j]
                M += a[i] * a[j] * absG[i][j]
        vals["lemma21_lhs"] = quad.real
        vals["double_sum_M"] = M
        s = mpc(0)
        for i in range(n):
            s += cc[i] * mpc(complex(proj[i]))
        vals["thm31_lhs"] = abs(s) ** 2
        holder = rt(wsum(a, p), 1 / p) * rt(wsum(a, q), 1 / q)
        vals["lemma21_first"] = holder
        vals["thm31_middle"] = nx2 * holder
        lb = lemma_branches(a)
        for k, v in lb.items():
            vals[f"lemma21_branch{k}"] = v
            vals[f"thm31_branch{k}"] = nx2 * v
            vals[f"thm31_branch{k}_printed"] = nx2 * v
            vals[f"lemma21_branch{k}_printed"] = v
        if have_ab:
            # the typeset case 4 carries 1/(beta*q) on the row-power sum
            vals["lemma21_branch4_printed"] = (max(a) * rt(psum(a, al * p), 1 / (al * p)) * rt(S, 1 / q)
                                               * rt(rsum(be), 1 / (be * q)))
        sa = mpf(0)
        sw = mpf(0)
        for i in range(n):
            sa += a[i] ** 2
            sw += a[i] ** 2 * r[i]
        vals["pecaric_11a"] = nx2 * sw
        vals["pecaric_11b"] = nx2 * sa * R

    s2 = mpf(0)
    s2w = mpf(0)
    for i in range(n):
        s2 += u[i] ** 2
        s2w += u[i] ** 2 * r[i]
    vals["pecaric_12_lhs"] = s2 ** 2
    vals["pecaric_12a"] = nx2 * s2w
    vals["pecaric_12b"] = nx2 * s2 * R
    vals["thm41_lhs"] = s2
    vals["bombieri_13"] = nx2 * R
    orth = all(abs(G[i][j] - (1 if i == j else 0)) <= mpf("1e-10") for i in range(n) for j in range(n))
    if orth:
        vals["bessel_14"] = nx2

    vals["thm41_middle"] = nx * rt(wsum(u, p), 1 / (2 * p)) * rt(wsum(u, q), 1 / (2 * q))
    for k, v in lemma_branches(u).items():
        vals[f"thm41_branch{k}"] = mpmath.sqrt(nx2 * v)
    umax = max(u)
    h = mpf(1) / 2
    pr = {
        1: nx * umax * rt(S, h),
        3: nx * rt(umax, h) * rt(psum(u, q), 1 / (2 * q)) * rt(S, 1 / (2 * p)) * rt(R, 1 / (2 * q)),
        7: nx * rt(umax, h) * rt(psum(u, p), 1 / (2 * p)) * rt(R, 1 / (2 * p)) * rt(S, 1 / (2 * q)),
        9: nx * rt(psum(u, p), 1 / (2 * p)) * rt(psum(u, q), 1 / (2 * q)) * rt(R, h),
    }
    if have_gd:
        pr[2] = (nx * rt(umax, h) * rt(psum(u, ga * q), 1 / (2 * ga * q)) * rt(S, 1 / (2 * p))
                 * rt(rsum(de), 1 / (2 * de * q)))
        pr[8] = (nx * rt(psum(u, p), 1 / (2 * p)) * rt(psum(u, ga * q), 1 / (2 * ga * q)) * rt(R, 1 / (2 * p))
                 * rt(rsum(de), 1 / (2 * de * q)))
    if have_ab:
        # typeset exponents: 1/(2 alpha beta) and 1/(p beta) in case 4, 1/(2p) on max r in case 6
        pr[4] = (nx * rt(umax, h) * rt(psum(u, al * p), 1 / (2 * al * be)) * rt(S, 1 / (2 * q))
                 * rt(rsum(be), 1 / (p * be)))
        pr[6] = (nx * rt(psum(u, q), 1 / (2 * q)) * rt(psum(u, al * p), 1 / (2 * al * p)) * rt(R, 1 / (2 * p))
                 * rt(rsum(be), 1 / (2 * p * be)))
    if have_ab and have_gd:
        pr[5] = (nx * rt(psum(u, al * p), 1 / (2 * al * p)) * rt(psum(u, ga * q), 1 / (2 * ga * q))
                 * rt(rsum(be), 1 / (2 * p * be)) * rt(rsum(de), 1 / (2 * de * q)))
    for k, v in pr.items():
        vals[f"thm41_branch{k}_printed"] = v

    up = psum(u, p)
    if up == 0:
        vals["remark_lhs"] = mpf(0)
    else:
        vals["remark_lhs"] = s2 ** 2 / (up ** (1 / p) * psum(u, q) ** (1 / q))
    vals["remark_bound"] = nx2 * R
    return {k: float(v) for k, v in vals.items()}
