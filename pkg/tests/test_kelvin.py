"""Branch maps, inversion frames, and the exterior Hessian identity.

The M/N/K/L assembly is validated three independent ways: pinned closed
forms, an analytically differentiated exterior solution, and central finite
differences of the full transform."""

import json
import math
from random import Random

import numpy as np
import pytest

from kelvinasym.exactalg import MultiPoly
from kelvinasym.kelvin import (
    AdmissibilityError,
    DomainError,
    HessianReport,
    Jet2,
    KelvinFrame,
    PhaseBranch,
    ZeroPointError,
    hessian_identity_check,
    kelvin_map,
    matrices_MNKL,
    poly_jet,
    scaling_matrix,
    trace_identity_defect,
    u_from_v,
)

THETA3 = 3 * math.pi / 4

ALL_BRANCHES = [
    PhaseBranch.slag(THETA3),
    PhaseBranch.recip(-1.5),
    PhaseBranch.make("ATAN2", 1.0, tau=1.1),
    PhaseBranch.make("LOG", -2.0, tau=0.5),
]


# ── branch scalar maps ───────────────────────────────────────────────────


def test_branch_construction_and_tau_defaults():
    b = PhaseBranch.slag(THETA3)
    assert (b.kind, b.tau, b.a, b.b) == ("SLAG", math.pi / 2, 0.0, 1.0)
    r = PhaseBranch.recip(0.3)
    assert (r.kind, r.a, r.b) == ("RECIP", 1.0, 0.0)
    at = PhaseBranch.make("ATAN2", 1.0, tau=1.2)
    assert 0.0 < at.a < 1.0 and abs(at.b - math.sqrt(1 - at.a**2)) < 1e-15
    lg = PhaseBranch.make("LOG", -1.0, tau=0.4)
    assert lg.a > 1.0 and abs(lg.b - math.sqrt(lg.a**2 - 1)) < 1e-15


def test_branch_validation():
    with pytest.raises(ValueError):
        PhaseBranch.make("ATAN2", 1.0)  # tau required
    with pytest.raises(ValueError):
        PhaseBranch.make("ATAN2", 1.0, tau=0.5)  # wrong interval
    with pytest.raises(ValueError):
        PhaseBranch.make("LOG", 1.0, tau=1.0)
    with pytest.raises(ValueError):
        PhaseBranch.make("NOPE", 1.0)
    with pytest.raises(ValueError):
        PhaseBranch(kind="SLAG", tau=math.pi / 2, theta=1.0, a=0.5, b=1.0)


@pytest.mark.parametrize("branch", ALL_BRANCHES, ids=lambda b: b.kind)
def test_g_inverse_roundtrip_and_monotonicity(branch):
    lower = branch.admissible_lower()
    start = -5.0 if lower is None else lower + 1e-3
    grid = [start + k * (5.0 - start) / 40 for k in range(41)]
    prev = None
    for lam in grid:
        t = branch.g(lam)
        assert abs(branch.g_inverse(t) - lam) < 1e-9 * max(1.0, abs(lam))
        if prev is not None:
            assert t > prev
        prev = t


@pytest.mark.parametrize("branch", ALL_BRANCHES, ids=lambda b: b.kind)
def test_g_prime_matches_finite_difference(branch):
    lower = branch.admissible_lower()
    points = [0.3, 1.7, 4.0] if lower is None else [lower + d for d in (0.2, 1.0, 3.0)]
    h = 1e-6
    for lam in points:
        fd = (branch.g(lam + h) - branch.g(lam - h)) / (2 * h)
        assert abs(fd - branch.g_prime(lam)) < 1e-7 * max(1.0, abs(fd))


def test_admissible_lower_values():
    slag, recip, at, lg = ALL_BRANCHES
    assert slag.admissible_lower() is None
    assert recip.admissible_lower() == -1.0
    assert abs(at.admissible_lower() + (at.a + at.b)) < 1e-15
    assert abs(lg.admissible_lower() - (lg.b - lg.a)) < 1e-15


def test_domain_errors():
    _, recip, at, lg = ALL_BRANCHES
    with pytest.raises(DomainError):
        recip.g(-1.5)
    with pytest.raises(DomainError):
        lg.g(lg.b - lg.a)
    with pytest.raises(DomainError):
        at.g_prime(at.admissible_lower() - 0.1)
    with pytest.raises(DomainError):
        PhaseBranch.slag(THETA3).g_inverse(2.0)
    with pytest.raises(DomainError):
        recip.g_inverse(0.1)
    with pytest.raises(DomainError):
        lg.g_inverse(0.0)
    with pytest.raises(DomainError):
        at.g_inverse(100.0)


def test_phase_and_quadratic_fixed_point():
    branch = PhaseBranch.slag(THETA3)
    lam = [1.0, 2.0, 0.5]
    assert abs(branch.phase(lam) - sum(math.atan(v) for v in lam)) < 1e-15
    # the radial quadratic profile has n g(alpha) = theta
    for b in ALL_BRANCHES:
        n = 3
        target = b.theta
        if b.kind in ("RECIP", "LOG") and target >= 0:
            target = -1.0
        alpha = b.g_inverse(target / n)
        assert abs(n * b.g(alpha) - target) < 1e-12


def test_branch_json_roundtrip():
    slag = PhaseBranch.slag(2.3562)
    blob = slag.to_json()
    assert blob == {"kind": "SLAG", "theta": 2.3562}
    assert PhaseBranch.from_json(blob) == slag
    at = PhaseBranch.make("ATAN2", 0.9, tau=1.3)
    blob2 = json.loads(json.dumps(at.to_json()))
    back = PhaseBranch.from_json(blob2)
    assert back.kind == "ATAN2" and abs(back.tau - 1.3) < 1e-15
    with pytest.raises(ValueError):
        PhaseBranch.from_json({"kind": "SLAG"})


# ── scaling matrix ───────────────────────────────────────────────────────


def test_scaling_matrix_pinned():
    slag = PhaseBranch.slag(THETA3)
    assert np.allclose(scaling_matrix(slag, [1, 1, 1]), [math.sqrt(2)] * 3)
    recip = PhaseBranch.recip(-1.0)
    assert np.allclose(scaling_matrix(recip, [0, 0]), [2 ** (-1 / 4)] * 2)


@pytest.mark.parametrize("branch", ALL_BRANCHES, ids=lambda b: b.kind)
def test_scaling_matrix_is_inverse_root_slope(branch):
    lower = branch.admissible_lower()
    lams = [0.5, 1.0, 2.5] if lower is None else [lower + d for d in (0.3, 1.1, 2.0)]
    R = scaling_matrix(branch, lams)
    for r, lam in zip(R, lams):
        assert r > 0
        assert abs(r * r * branch.g_prime(lam) - 1.0) < 1e-12


def test_scaling_matrix_admissibility():
    recip = PhaseBranch.recip(-1.0)
    with pytest.raises(AdmissibilityError):
        scaling_matrix(recip, [0.5, -1.0])
    lg = PhaseBranch.make("LOG", -1.0, tau=0.5)
    with pytest.raises(AdmissibilityError):
        scaling_matrix(lg, [lg.b - lg.a - 0.5, 1.0])


# ── point maps ───────────────────────────────────────────────────────────


def test_kelvin_map_classic_inversion():
    y = kelvin_map([2.0, 0.0, 0.0], [1.0, 1.0, 1.0])
    assert np.allclose(y, [0.5, 0.0, 0.0])
    assert abs(np.linalg.norm(y) - 1 / 2.0) < 1e-15


def test_kelvin_map_roundtrips():
    rng = Random(4)
    for _ in range(20):
        n = rng.randint(2, 5)
        x = np.array([rng.uniform(-3, 3) for _ in range(n)])
        if np.linalg.norm(x) < 1e-3:
            continue
        R = [rng.uniform(0.5, 2.0) for _ in range(n)]
        y = kelvin_map(x, R, "forward")
        back = kelvin_map(y, R, "backward")
        assert np.allclose(back, x, atol=1e-12)
        assert np.allclose(kelvin_map(back, R, "forward"), y, atol=1e-12)


def test_kelvin_map_errors():
    with pytest.raises(ZeroPointError):
        kelvin_map([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        kelvin_map([1.0, 0.0], [1.0, 1.0], "sideways")
    with pytest.raises(ValueError):
        kelvin_map([1.0, 0.0], [1.0, -1.0])
    with pytest.raises(ValueError):
        kelvin_map([1.0, 0.0], [1.0, 1.0, 1.0])


# ── frames ───────────────────────────────────────────────────────────────


def test_frame_construction_and_json():
    branch = PhaseBranch.slag(2.3562)
    frame = KelvinFrame(branch, [1.0, 2.0, -0.5], linear=[0.1, 0.0, -0.2], constant=3.0)
    assert frame.n == 3
    assert np.allclose(frame.R, scaling_matrix(branch, frame.spectrum))
    blob = frame.to_json()
    assert set(blob) == {"n", "branch", "lambda", "b", "c"}
    assert blob["n"] == 3 and blob["c"] == 3.0
    back = KelvinFrame.from_json(json.loads(json.dumps(blob)))
    assert back.spectrum == frame.spectrum and back.linear == frame.linear


def test_frame_validation():
    branch = PhaseBranch.slag(2.0)
    with pytest.raises(ValueError):
        KelvinFrame(branch, [1.0])
    with pytest.raises(ValueError):
        KelvinFrame(branch, [1.0, 2.0], linear=[0.0])
    with pytest.raises(AdmissibilityError):
        KelvinFrame(PhaseBranch.recip(-1.0), [-2.0, 0.0])
    with pytest.raises(ValueError):
        KelvinFrame.from_json({"n": 3, "branch": {"kind": "SLAG", "theta": 1.0}, "lambda": [1.0, 2.0]})


def test_u_from_v_pinned_radial_solution():
    # v constant sqrt(2) with unit spectrum reproduces u = |x|^2/2 + 1/|x|
    frame = KelvinFrame(PhaseBranch.slag(THETA3), [1.0, 1.0, 1.0])
    for x in ([2.0, 0.0, 0.0], [1.0, -1.0, 0.5], [0.3, 2.2, -1.7]):
        r = float(np.linalg.norm(x))
        got = u_from_v(frame, lambda y: math.sqrt(2.0), x)
        assert abs(got - (0.5 * r * r + 1.0 / r)) < 1e-12


def test_u_from_v_with_affine_tail():
    frame = KelvinFrame(
        PhaseBranch.slag(THETA3), [1.0, 2.0, 0.5], linear=[1.0, 0.0, -2.0], constant=4.0
    )
    x = np.array([1.4, -0.6, 2.0])
    got = u_from_v(frame, lambda y: 0.0, x)
    want = 0.5 * (1.4**2 + 2 * 0.6**2 + 0.5 * 4.0) + (1.4 - 4.0) + 4.0
    assert abs(got - want) < 1e-12


# ── jets ─────────────────────────────────────────────────────────────────


def test_poly_jet_pinned():
    y1 = MultiPoly.variable(3, 0)
    y2 = MultiPoly.variable(3, 1)
    v = y1**2 * y2
    jet = poly_jet(v, [0.2, 0.3, 0.1])
    assert abs(jet.value - 0.012) < 1e-15
    assert np.allclose(jet.grad, [0.12, 0.04, 0.0])
    assert np.allclose(jet.hess, [[0.6, 0.4, 0.0], [0.4, 0.0, 0.0], [0.0, 0.0, 0.0]])
    assert jet.n == 3


def test_jet_validation():
    with pytest.raises(ValueError):
        Jet2(y=np.zeros(3), value=0.0, grad=np.zeros(3), hess=np.zeros((3, 3)))
    with pytest.raises(ValueError):
        Jet2(y=np.array([1.5, 0, 0]), value=0.0, grad=np.zeros(3), hess=np.zeros((3, 3)))
    bad = np.zeros((3, 3))
    bad[0, 1] = 1e-6
    with pytest.raises(ValueError):
        Jet2(y=np.array([0.5, 0, 0]), value=0.0, grad=np.zeros(3), hess=bad)
    with pytest.raises(ValueError):
        Jet2(y=np.array([0.5, 0, 0]), value=0.0, grad=np.zeros(2), hess=np.zeros((3, 3)))


# ── the Hessian identity matrices ────────────────────────────────────────


def unit_frame(n=3):
    return KelvinFrame(PhaseBranch.slag(THETA3), [0.0] * n)


def test_mnkl_pinned_constant_profile():
    frame = unit_frame()
    jet = poly_jet(MultiPoly.const(3, 1), [0.5, 0.0, 0.0])
    M, N, K, L = matrices_MNKL(jet, frame)
    assert np.allclose(M, np.diag([2.0, -1.0, -1.0]))
    assert np.allclose(K, -np.eye(3))
    assert abs(L - 3.0) < 1e-15
    assert np.allclose(N, M)  # R is the identity for a flat spectrum


def test_mnkl_reproduces_analytic_hessian_of_linear_profile():
    # with flat spectrum and v(y) = y_1 the exterior solution is x_1/|x|^3,
    # whose Hessian is -3(d_1j x_k + d_1k x_j + d_jk x_1)/|x|^5
    #                   + 15 x_1 x_j x_k/|x|^7
    frame = unit_frame()
    v = MultiPoly.variable(3, 0)
    for x in ([1.3, 0.4, -0.8], [2.0, 1.0, 0.5]):
        x = np.array(x)
        r = float(np.linalg.norm(x))
        y = kelvin_map(x, frame.R)
        jet = poly_jet(v, y)
        _, N, _, _ = matrices_MNKL(jet, frame)
        got = float(np.dot(y, y)) ** 1.5 * N
        want = np.zeros((3, 3))
        for j in range(3):
            for k in range(3):
                want[j, k] = 15 * x[0] * x[j] * x[k] / r**7
                want[j, k] -= 3 * x[0] * (1 if j == k else 0) / r**5
                if j == 0:
                    want[j, k] -= 3 * x[k] / r**5
                if k == 0:
                    want[j, k] -= 3 * x[j] / r**5
        assert np.allclose(got, want, atol=1e-12)


def test_mnkl_trace_identity_numeric():
    rng = Random(12)
    for _ in range(20):
        n = rng.randint(2, 5)
        frame = KelvinFrame(PhaseBranch.slag(THETA3), [rng.uniform(-1, 2) for _ in range(n)])
        y = np.array([rng.uniform(-0.4, 0.4) for _ in range(n)])
        if np.linalg.norm(y) < 0.05:
            y[0] += 0.3
        hess = np.array([[rng.uniform(-2, 2) for _ in range(n)] for _ in range(n)])
        hess = (hess + hess.T) / 2
        jet = Jet2(
            y=y,
            value=rng.uniform(-2, 2),
            grad=np.array([rng.uniform(-2, 2) for _ in range(n)]),
            hess=hess,
        )
        M, _, _, _ = matrices_MNKL(jet, frame)
        lhs = float(np.trace(M))
        rhs = float(np.dot(y, y)) * float(np.trace(hess))
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


def test_mnkl_dimension_mismatch():
    frame = unit_frame(3)
    jet = poly_jet(MultiPoly.const(4, 1), [0.3, 0.0, 0.0, 0.1])
    with pytest.raises(ValueError):
        matrices_MNKL(jet, frame)


# ── finite-difference verification ───────────────────────────────────────


def random_profile(rng, n, max_deg=3):
    terms = {}
    for _ in range(6):
        exp = [0] * n
        for _ in range(rng.randint(0, max_deg)):
            exp[rng.randrange(n)] += 1
        terms[tuple(exp)] = terms.get(tuple(exp), 0) + rng.randint(-3, 3)
    from fractions import Fraction

    return MultiPoly(n, {e: Fraction(c) for e, c in terms.items() if c})


def test_hessian_identity_check_slag():
    rng = Random(5)
    frame = KelvinFrame(PhaseBranch.slag(THETA3), [1.0, -0.3, 0.7])
    v = random_profile(rng, 3)
    report = hessian_identity_check(frame, v, samples=25, fd_step=1e-4, seed=1)
    assert isinstance(report, HessianReport)
    assert report.samples == 25 and report.fd_step == 1e-4
    assert report.max_rel_deviation < 1e-5


@pytest.mark.parametrize(
    "branch,lams",
    [
        (PhaseBranch.recip(-2.0), [0.4, -0.2, 1.1]),
        (PhaseBranch.make("ATAN2", 1.2, tau=1.2), [0.5, 0.0, 2.0]),
        (PhaseBranch.make("LOG", -3.0, tau=0.6), [1.5, 2.0, 1.1]),
    ],
    ids=["RECIP", "ATAN2", "LOG"],
)
def test_hessian_identity_check_other_branches(branch, lams):
    rng = Random(8)
    frame = KelvinFrame(branch, lams)
    v = random_profile(rng, 3)
    report = hessian_identity_check(frame, v, samples=15, fd_step=1e-4, seed=2)
    assert report.max_rel_deviation < 1e-5


# ── symbolic trace identity ──────────────────────────────────────────────


@pytest.mark.parametrize("n", [2, 3, 4])
def test_trace_identity_defect_vanishes(n):
    assert trace_identity_defect(n).is_zero


def test_trace_identity_defect_validates():
    with pytest.raises(ValueError):
        trace_identity_defect(1)
