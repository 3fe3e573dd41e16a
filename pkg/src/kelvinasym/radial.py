"""Radial exterior solutions by fourth-order integration.

For a radial function u(|x|) the Hessian spectrum is u''(r) once and
u'(r)/r with multiplicity n - 1, so the fully nonlinear equation
sum_j g(lambda_j) = theta reduces to the scalar relation

    g(u'') + (n - 1) g(u'/r) = theta.

`radial_rhs` solves that relation for u'' through the branch's monotone
scalar map; `integrate_exterior` advances (u, u', u'') from r = 1 by
classic fixed-step RK4, treating the relation itself as a conserved
quantity whose residual is recorded at every node.  Because the scheme
is deterministic and fixed-step, trajectories and their CSV renderings
are reproducible byte for byte.

The integration loop lives in a compiled extension when the build
produced one, with a pure-Python fallback selected automatically at
import time; the two kernels share their arithmetic line for line, so
they agree bitwise and `kernel_name` only reports which one is active.
The environment variable KELVINASYM_KERNEL=python forces the fallback.

Trajectories convert to full-dimensional scattered samples with
`trajectory_samples`, feeding the quadratic-fit and decay experiments.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._branches import DomainError
from .kelvin import PhaseBranch

__all__ = [
    "DomainError",
    "RadialState",
    "integrate_exterior",
    "kernel_name",
    "radial_rhs",
    "read_trajectory",
    "trajectory_samples",
    "write_trajectory",
]

from . import _radial_py

if os.environ.get("KELVINASYM_KERNEL", "").strip().lower() == "python":
    _kernel = _radial_py
    _KERNEL_NAME = "python"
else:
    try:
        from . import _radial_rk4 as _kernel  # type: ignore[attr-defined]

        _KERNEL_NAME = "compiled"
    except ImportError:
        _kernel = _radial_py
        _KERNEL_NAME = "python"

_KIND_CODES = {
    "SLAG": _radial_py.KIND_SLAG,
    "RECIP": _radial_py.KIND_RECIP,
    "ATAN2": _radial_py.KIND_ATAN2,
    "LOG": _radial_py.KIND_LOG,
}

_TRAJECTORY_HEADER = ["r", "u", "du", "conservation_residual"]


def kernel_name() -> str:
    """Which integration kernel is active: "compiled" or "python"."""
    return _KERNEL_NAME


@dataclass(frozen=True)
class RadialState:
    """One recorded node of a radial trajectory.

    `r` is the radius, `u` the value, `p` the first derivative u'(r),
    `w` the second derivative u''(r), and `conservation` the largest
    residual |g(w) + (n-1) g(p/r) - theta| seen over the integration
    steps since the previous recorded node (so coarse output strides
    cannot hide drift between rows).
    """

    r: float
    u: float
    p: float
    w: float
    conservation: float


def radial_rhs(branch: PhaseBranch, n: int, theta: float, r: float, p: float) -> float:
    """Solve g(u'') = theta - (n-1) g(p/r) for the admissible root u''.

    The branch's scalar map g is strictly increasing on its admissible
    ray, so the root is unique; DomainError (with the offending
    quantity in the message) if p/r leaves the ray or the right-hand
    side leaves the range of g.
    """
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"dimension n must be an integer >= 2, got {n!r}")
    r = float(r)
    if not r > 0.0:
        raise ValueError(f"radius must be positive, got {r}")
    t = float(theta) - (n - 1) * branch.g(float(p) / r)
    return branch.g_inverse(t)


def _failure_message(branch: PhaseBranch, status: int, radius: float, value: float) -> str:
    if status == _radial_py.SLOPE_BOUND:
        return (
            f"radial slope u'/r = {value!r} fell to the {branch.kind} "
            f"eigenvalue bound {branch.admissible_lower()!r} near r = {radius!r}"
        )
    if status == _radial_py.CURVATURE_BOUND:
        return (
            f"second derivative u'' = {value!r} fell to the {branch.kind} "
            f"eigenvalue bound {branch.admissible_lower()!r} near r = {radius!r}"
        )
    return f"trajectory state became non-finite near r = {radius!r}"


def integrate_exterior(
    branch: PhaseBranch,
    n: int,
    theta: float,
    u1: float,
    p1: float,
    r_max: float,
    step: float,
    stride: int = 1,
) -> list[RadialState]:
    """Integrate (u, u', u'') from r = 1 to r_max with fixed step.

    The starting curvature u''(1) is solved from the scalar relation,
    after which the whole state advances by classic RK4; the relation's
    residual is folded into each recorded node's `conservation`.  Node
    0 (r = 1) and every stride-th node are recorded, the final node
    always included.

    DomainError if p1 or any later stage leaves the branch's admissible
    ray (or the state overflows); the exception carries the failure
    radius as `radius` and the nodes recorded before it as `trajectory`.
    """
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"dimension n must be an integer >= 2, got {n!r}")
    step = float(step)
    if not step > 0.0:
        raise ValueError(f"step must be positive, got {step}")
    r_max = float(r_max)
    if not r_max > 1.0:
        raise ValueError(f"r_max must exceed the unit starting radius, got {r_max}")
    stride = int(stride)
    if stride < 1:
        raise ValueError(f"stride must be a positive integer, got {stride}")

    theta = float(theta)
    u1 = float(u1)
    p1 = float(p1)
    w1 = radial_rhs(branch, n, theta, 1.0, p1)
    n_steps = max(1, int(round((r_max - 1.0) / step)))

    rs, us, ps, ws, cons, status, fail_radius, fail_value = _kernel.run_kernel(
        _KIND_CODES[branch.kind],
        branch.a,
        branch.b,
        n,
        theta,
        u1,
        p1,
        w1,
        step,
        n_steps,
        stride,
    )
    states = [
        RadialState(r=rs[i], u=us[i], p=ps[i], w=ws[i], conservation=cons[i])
        for i in range(len(rs))
    ]
    if status != _radial_py.OK:
        raise DomainError(
            _failure_message(branch, status, fail_radius, fail_value),
            radius=fail_radius,
            trajectory=states,
        )
    return states


def write_trajectory(path, states: Sequence[RadialState]) -> None:
    """Write recorded nodes as CSV: r,u,du,conservation_residual.

    Floats are rendered with repr so equal trajectories give byte-equal
    files and `read_trajectory` restores the exact values.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_TRAJECTORY_HEADER)
        for state in states:
            writer.writerow(
                [repr(state.r), repr(state.u), repr(state.p), repr(state.conservation)]
            )


def read_trajectory(path) -> list[tuple[float, float, float, float]]:
    """Read a trajectory CSV back as (r, u, du, conservation) tuples.

    The CSV stores no second-derivative column, so the result is plain
    tuples rather than RadialState records.  ValueError on a malformed
    header or row.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _TRAJECTORY_HEADER:
            raise ValueError(
                f"expected trajectory header {','.join(_TRAJECTORY_HEADER)!r}, "
                f"got {header!r}"
            )
        rows: list[tuple[float, float, float, float]] = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise ValueError(f"trajectory row {line_no} has {len(row)} fields, expected 4")
            try:
                rows.append((float(row[0]), float(row[1]), float(row[2]), float(row[3])))
            except ValueError as exc:
                raise ValueError(f"trajectory row {line_no} is not numeric: {exc}") from exc
    return rows


def trajectory_samples(
    states: Sequence[RadialState],
    n: int,
    per_radius: int,
    seed: int = 0,
    r_min: float | None = None,
    r_max: float | None = None,
) -> list[tuple[tuple[float, ...], float]]:
    """Scatter a radial trajectory into full-dimensional samples.

    For each recorded node with r_min <= r <= r_max (inclusive bounds;
    None means unbounded), draws `per_radius` directions uniformly on
    the unit sphere with the seeded generator and emits (x, u(|x|))
    pairs at x = r * direction — exact values at the recorded radii, no
    interpolation.  The output feeds the quadratic-fit machinery.
    """
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"dimension n must be an integer >= 2, got {n!r}")
    per_radius = int(per_radius)
    if per_radius < 1:
        raise ValueError(f"per_radius must be a positive integer, got {per_radius}")
    rng = np.random.default_rng(seed)
    samples: list[tuple[tuple[float, ...], float]] = []
    for state in states:
        if r_min is not None and state.r < r_min:
            continue
        if r_max is not None and state.r > r_max:
            continue
        directions = rng.normal(size=(per_radius, n))
        norms = np.linalg.norm(directions, axis=1)
        while np.any(norms < 1e-12):
            bad = norms < 1e-12
            directions[bad] = rng.normal(size=(int(np.count_nonzero(bad)), n))
            norms = np.linalg.norm(directions, axis=1)
        points = directions * (state.r / norms)[:, None]
        for row in points:
            samples.append((tuple(float(v) for v in row), state.u))
    if not samples:
        raise ValueError("no trajectory nodes fall inside the requested radius window")
    return samples
