# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for the augmented radial integrator.

Mirrors `_radial_py` operation for operation — same expressions, same
evaluation order — so both kernels produce bit-identical trajectories
on one platform.  Edit them in lockstep.  See `_radial_py` for the
derivation of the augmented system and the reporting protocol.
"""

from libc.math cimport atan, fabs, isfinite, log, sqrt

# status codes shared with the pure-Python kernel
OK = 0
SLOPE_BOUND = 1
CURVATURE_BOUND = 2
NON_FINITE = 3

# branch kind codes shared with the pure-Python kernel
KIND_SLAG = 0
KIND_RECIP = 1
KIND_ATAN2 = 2
KIND_LOG = 3

cdef int C_OK = 0
cdef int C_SLOPE_BOUND = 1
cdef int C_CURVATURE_BOUND = 2
cdef int C_NON_FINITE = 3

cdef int C_KIND_SLAG = 0
cdef int C_KIND_RECIP = 1
cdef int C_KIND_ATAN2 = 2


cdef inline double _g(int kind, double a, double b, double lam) noexcept nogil:
    if kind == C_KIND_SLAG:
        return atan(lam)
    if kind == C_KIND_RECIP:
        return -sqrt(2.0) / (1.0 + lam)
    if kind == C_KIND_ATAN2:
        return (sqrt(a * a + 1.0) / b) * atan(
            (lam + a - b) / (lam + a + b)
        )
    return (sqrt(a * a + 1.0) / (2.0 * b)) * log(
        (lam + a - b) / (lam + a + b)
    )


cdef inline double _g_prime(int kind, double a, double b, double lam) noexcept nogil:
    cdef double s, lo, hi
    if kind == C_KIND_SLAG:
        return 1.0 / (1.0 + lam * lam)
    if kind == C_KIND_RECIP:
        s = 1.0 + lam
        return sqrt(2.0) / (s * s)
    if kind == C_KIND_ATAN2:
        lo = lam + a - b
        hi = lam + a + b
        return 2.0 * sqrt(a * a + 1.0) / (hi * hi + lo * lo)
    s = lam + a
    return sqrt(a * a + 1.0) / (s * s - b * b)


cdef inline int _dw(int kind, double a, double b, bint bounded, double lower,
                    double nm1, double r, double p, double w,
                    double* val, double* out) noexcept nogil:
    cdef double lam, gpr, gpw, num, den
    lam = p / r
    if bounded and lam <= lower:
        val[0] = lam
        return C_SLOPE_BOUND
    if bounded and w <= lower:
        val[0] = w
        return C_CURVATURE_BOUND
    gpr = _g_prime(kind, a, b, lam)
    gpw = _g_prime(kind, a, b, w)
    num = nm1 * gpr * (w * r - p)
    den = r * (r * gpw)
    out[0] = -num / den
    return C_OK


cdef inline int _conservation(int kind, double a, double b, bint bounded,
                              double lower, double nm1, double theta,
                              double r, double p, double w,
                              double* val, double* out) noexcept nogil:
    cdef double lam, res
    lam = p / r
    if bounded and lam <= lower:
        val[0] = lam
        return C_SLOPE_BOUND
    if bounded and w <= lower:
        val[0] = w
        return C_CURVATURE_BOUND
    res = _g(kind, a, b, w) + nm1 * _g(kind, a, b, lam) - theta
    out[0] = fabs(res)
    return C_OK


def run_kernel(int kind, double a, double b, int n, double theta,
               double u1, double p1, double w1,
               double h, long n_steps, long stride):
    """Integrate the augmented radial state from r = 1 by classic RK4.

    Same contract as `_radial_py.run_kernel`: returns
    (rs, us, ps, ws, cons, status, fail_radius, fail_value) where each
    recorded conservation value is the block maximum since the previous
    record and failures are reported through the status code.
    """
    cdef bint bounded
    cdef double lower
    if kind == C_KIND_SLAG:
        bounded = False
        lower = 0.0
    elif kind == C_KIND_RECIP:
        bounded = True
        lower = -1.0
    elif kind == C_KIND_ATAN2:
        bounded = True
        lower = -(a + b)
    else:
        bounded = True
        lower = b - a

    cdef double nm1 = <double>(n - 1)
    rs = []
    us = []
    ps = []
    ws = []
    cons = []
    cdef double u = u1
    cdef double p = p1
    cdef double w = w1
    cdef double val = 0.0
    cdef double c0 = 0.0
    cdef int st

    st = _conservation(kind, a, b, bounded, lower, nm1, theta, 1.0, p, w,
                       &val, &c0)
    if st != C_OK:
        return rs, us, ps, ws, cons, st, 1.0, val
    rs.append(1.0)
    us.append(u)
    ps.append(p)
    ws.append(w)
    cons.append(c0)

    cdef double h_half = 0.5 * h
    cdef double h_sixth = h / 6.0
    cdef double block = 0.0
    # compensated-summation carries; see _radial_py for why the state
    # accumulators need Kahan compensation
    cdef double cu = 0.0
    cdef double cp = 0.0
    cdef double cw = 0.0
    cdef double inc, t
    cdef double r0, rm, r1
    cdef double du1, dp1, dw1, du2, dp2, dw2
    cdef double du3, dp3, dw3, du4, dp4, dw4
    cdef double p2, w2, p3, w3, p4, w4, c
    cdef long k = 0
    while k < n_steps:
        r0 = 1.0 + k * h
        rm = r0 + h_half
        r1 = 1.0 + (k + 1) * h

        st = _dw(kind, a, b, bounded, lower, nm1, r0, p, w, &val, &dw1)
        if st != C_OK:
            return rs, us, ps, ws, cons, st, r0, val
        du1 = p
        dp1 = w

        p2 = p + h_half * dp1
        w2 = w + h_half * dw1
        st = _dw(kind, a, b, bounded, lower, nm1, rm, p2, w2, &val, &dw2)
        if st != C_OK:
            return rs, us, ps, ws, cons, st, rm, val
        du2 = p2
        dp2 = w2

        p3 = p + h_half * dp2
        w3 = w + h_half * dw2
        st = _dw(kind, a, b, bounded, lower, nm1, rm, p3, w3, &val, &dw3)
        if st != C_OK:
            return rs, us, ps, ws, cons, st, rm, val
        du3 = p3
        dp3 = w3

        p4 = p + h * dp3
        w4 = w + h * dw3
        st = _dw(kind, a, b, bounded, lower, nm1, r1, p4, w4, &val, &dw4)
        if st != C_OK:
            return rs, us, ps, ws, cons, st, r1, val
        du4 = p4
        dp4 = w4

        inc = h_sixth * (du1 + 2.0 * du2 + 2.0 * du3 + du4) - cu
        t = u + inc
        cu = (t - u) - inc
        u = t
        inc = h_sixth * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4) - cp
        t = p + inc
        cp = (t - p) - inc
        p = t
        inc = h_sixth * (dw1 + 2.0 * dw2 + 2.0 * dw3 + dw4) - cw
        t = w + inc
        cw = (t - w) - inc
        w = t

        if not (isfinite(u) and isfinite(p) and isfinite(w)):
            return rs, us, ps, ws, cons, C_NON_FINITE, r1, w

        st = _conservation(kind, a, b, bounded, lower, nm1, theta, r1, p, w,
                           &val, &c)
        if st != C_OK:
            return rs, us, ps, ws, cons, st, r1, val
        if c > block:
            block = c

        k += 1
        if k % stride == 0 or k == n_steps:
            rs.append(r1)
            us.append(u)
            ps.append(p)
            ws.append(w)
            cons.append(block)
            block = 0.0

    return rs, us, ps, ws, cons, C_OK, 0.0, 0.0
