"""Pure-Python kernel for the augmented radial integrator.

The compiled kernel in `_radial_rk4.pyx` mirrors this module operation
for operation — same expressions, same evaluation order — so the two
produce bit-identical trajectories on one platform.  Edit them in
lockstep.

The integrated state is (u, p, w) = (value, first derivative, second
derivative).  Evolving w as a state variable instead of re-solving the
scalar equation g(w) = theta - (n-1) g(p/r) at every stage turns that
equation into a conserved quantity of the flow, so its residual is a
genuine measure of integrator drift (fourth order in the step) rather
than of a root-finder tolerance.  Differentiating the constraint gives

    w' = -(n-1) g'(p/r) (w r - p) / (r^2 g'(w)),

which uses only g' — a rational function for every branch — so the two
kernels need no transcendental calls to agree bitwise on the state;
the conservation column alone evaluates g itself.

`run_kernel` never raises: domain violations and non-finite states are
reported through the returned status code, and the caller attaches the
partial trajectory and failure context.
"""

import math

# status codes shared with the compiled kernel
OK = 0
SLOPE_BOUND = 1
CURVATURE_BOUND = 2
NON_FINITE = 3

# branch kind codes shared with the compiled kernel
KIND_SLAG = 0
KIND_RECIP = 1
KIND_ATAN2 = 2
KIND_LOG = 3


def _g(kind, a, b, lam):
    if kind == KIND_SLAG:
        return math.atan(lam)
    if kind == KIND_RECIP:
        return -math.sqrt(2.0) / (1.0 + lam)
    if kind == KIND_ATAN2:
        return (math.sqrt(a * a + 1.0) / b) * math.atan(
            (lam + a - b) / (lam + a + b)
        )
    return (math.sqrt(a * a + 1.0) / (2.0 * b)) * math.log(
        (lam + a - b) / (lam + a + b)
    )


def _g_prime(kind, a, b, lam):
    if kind == KIND_SLAG:
        return 1.0 / (1.0 + lam * lam)
    if kind == KIND_RECIP:
        s = 1.0 + lam
        return math.sqrt(2.0) / (s * s)
    if kind == KIND_ATAN2:
        lo = lam + a - b
        hi = lam + a + b
        return 2.0 * math.sqrt(a * a + 1.0) / (hi * hi + lo * lo)
    s = lam + a
    return math.sqrt(a * a + 1.0) / (s * s - b * b)


def _bound(kind, a, b):
    """(bounded, lower): open lower eigenvalue bound of the kind."""
    if kind == KIND_SLAG:
        return False, 0.0
    if kind == KIND_RECIP:
        return True, -1.0
    if kind == KIND_ATAN2:
        return True, -(a + b)
    return True, b - a


def _dw(kind, a, b, bounded, lower, nm1, r, p, w):
    """(status, offending value, w') at one integration stage."""
    lam = p / r
    if bounded and lam <= lower:
        return SLOPE_BOUND, lam, 0.0
    if bounded and w <= lower:
        return CURVATURE_BOUND, w, 0.0
    gpr = _g_prime(kind, a, b, lam)
    gpw = _g_prime(kind, a, b, w)
    num = nm1 * gpr * (w * r - p)
    den = r * (r * gpw)
    return OK, 0.0, -num / den


def _conservation(kind, a, b, bounded, lower, nm1, theta, r, p, w):
    """(status, offending value, |g(w) + (n-1) g(p/r) - theta|)."""
    lam = p / r
    if bounded and lam <= lower:
        return SLOPE_BOUND, lam, 0.0
    if bounded and w <= lower:
        return CURVATURE_BOUND, w, 0.0
    res = _g(kind, a, b, w) + nm1 * _g(kind, a, b, lam) - theta
    return OK, 0.0, abs(res)


def run_kernel(kind, a, b, n, theta, u1, p1, w1, h, n_steps, stride):
    """Integrate the augmented radial state from r = 1 by classic RK4.

    Records node 0 and every stride-th node (always including the final
    one).  Each recorded conservation value is the maximum residual over
    the block of steps since the previous record, so a coarse stride
    cannot hide drift between output rows.

    Returns (rs, us, ps, ws, cons, status, fail_radius, fail_value);
    status OK means completion, SLOPE_BOUND / CURVATURE_BOUND flag p/r
    or w reaching the branch bound, NON_FINITE a state overflow, with
    fail_radius and fail_value locating the first offending stage.  The
    lists hold whatever nodes were recorded before the failure.
    """
    bounded, lower = _bound(kind, a, b)
    nm1 = float(n - 1)
    rs = []
    us = []
    ps = []
    ws = []
    cons = []
    u = u1
    p = p1
    w = w1

    st, val, c0 = _conservation(kind, a, b, bounded, lower, nm1, theta, 1.0, p, w)
    if st != OK:
        return rs, us, ps, ws, cons, st, 1.0, val
    rs.append(1.0)
    us.append(u)
    ps.append(p)
    ws.append(w)
    cons.append(c0)

    h_half = 0.5 * h
    h_sixth = h / 6.0
    block = 0.0
    # compensated-summation carries: increments are ~h while the state
    # grows like r^2, so over millions of steps naive accumulation
    # builds a biased rounding drift large enough to pollute the decay
    # of u - quadratic; Kahan compensation removes it deterministically
    cu = 0.0
    cp = 0.0
    cw = 0.0
    k = 0
    while k < n_steps:
        r0 = 1.0 + k * h
        rm = r0 + h_half
        r1 = 1.0 + (k + 1) * h

        st, val, dw1 = _dw(kind, a, b, bounded, lower, nm1, r0, p, w)
        if st != OK:
            return rs, us, ps, ws, cons, st, r0, val
        du1 = p
        dp1 = w

        p2 = p + h_half * dp1
        w2 = w + h_half * dw1
        st, val, dw2 = _dw(kind, a, b, bounded, lower, nm1, rm, p2, w2)
        if st != OK:
            return rs, us, ps, ws, cons, st, rm, val
        du2 = p2
        dp2 = w2

        p3 = p + h_half * dp2
        w3 = w + h_half * dw2
        st, val, dw3 = _dw(kind, a, b, bounded, lower, nm1, rm, p3, w3)
        if st != OK:
            return rs, us, ps, ws, cons, st, rm, val
        du3 = p3
        dp3 = w3

        p4 = p + h * dp3
        w4 = w + h * dw3
        st, val, dw4 = _dw(kind, a, b, bounded, lower, nm1, r1, p4, w4)
        if st != OK:
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

        if not (math.isfinite(u) and math.isfinite(p) and math.isfinite(w)):
            return rs, us, ps, ws, cons, NON_FINITE, r1, w

        st, val, c = _conservation(
            kind, a, b, bounded, lower, nm1, theta, r1, p, w
        )
        if st != OK:
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

    return rs, us, ps, ws, cons, OK, 0.0, 0.0
