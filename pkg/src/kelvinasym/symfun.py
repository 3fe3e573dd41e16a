"""Elementary symmetric functions over exact rationals, deleted and
two-sided-shifted variants, and exact verification of the determinant
identities behind the linearized transform.

Everything here is Fraction arithmetic; floats are rejected on input so a
verification can never silently lose exactness.

Identity ids
------------
The short ids used throughout the tool chain (reports, command line):

L31  the t-coefficient of sigma_k(diag(lambda) + t B) equals
     sum_i sigma_{k-1}(spectrum with i removed) * B_ii; checked by
     `linear_coefficient_sigma` / `verify_linear_coefficient`.
L32  with E = sum_j (-1)^j sigma_{2j} and O = sum_j (-1)^j sigma_{2j+1},
     and hatted sums taken over the spectrum with index i removed:
     E*E_i + O*O_i = prod_{j != i} (1 + lambda_j^2).
L33  expansion of the shifted function sigma_bar_k (parameters a, b) in the
     ordinary sigma_m with double-binomial weights.
L34  the shifted analogue of L32:
     Ebar*(Ehat_i + Ohat_i) - Obar*(Ehat_i - Ohat_i)
       = 2^n b prod_{j != i} ((lambda_j + a)^2 + b^2),
     where the barred/hatted sums alternate sigma_bar over the full and
     deleted spectra.

`verify_identity` addresses L32, L33 and L34; spectrum indices are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Iterable, Sequence, Union


class ArityError(ValueError):
    """A verification was called with missing or unusable arguments."""


class MismatchError(ArithmeticError):
    """Two supposedly identical exact routes disagreed."""


ExactScalar = Union[int, str, Fraction]


def _exact(value: ExactScalar) -> Fraction:
    if isinstance(value, float):
        raise TypeError("exact routines take rationals, not floats")
    return Fraction(value)


class Spectrum:
    """An ordered tuple of exact eigenvalues.  Entry indices are 1-based."""

    __slots__ = ("values",)

    def __init__(self, values: Iterable[ExactScalar]):
        self.values = tuple(_exact(v) for v in values)

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Spectrum):
            return NotImplemented
        return self.values == other.values

    def __hash__(self) -> int:
        return hash(self.values)

    def __repr__(self) -> str:
        return f"Spectrum({', '.join(str(v) for v in self.values)})"

    def deleted(self, i: int) -> "Spectrum":
        """The spectrum with entry ``i`` (1-based) removed."""
        self._check_index(i)
        return Spectrum(self.values[: i - 1] + self.values[i:])

    def replaced(self, i: int, value: ExactScalar) -> "Spectrum":
        """The spectrum with entry ``i`` (1-based) replaced by ``value``."""
        self._check_index(i)
        return Spectrum(self.values[: i - 1] + (_exact(value),) + self.values[i:])

    def _check_index(self, i: int) -> None:
        if not 1 <= i <= len(self.values):
            raise IndexError(f"index {i} out of range for spectrum of size {len(self.values)}")

    def to_json(self) -> dict:
        return {"n": self.n, "lambda": [str(v) for v in self.values]}

    @classmethod
    def from_json(cls, data) -> "Spectrum":
        try:
            values = [Fraction(v) for v in data["lambda"]]
            n = int(data["n"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed spectrum record: {exc}") from exc
        if n != len(values):
            raise ValueError(f"spectrum record claims n={n} but lists {len(values)} values")
        return cls(values)


@dataclass(frozen=True)
class BranchParams:
    """Exact shift parameters (a, b) of the two-sided product function."""

    a: Fraction
    b: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _exact(self.a))
        object.__setattr__(self, "b", _exact(self.b))


@dataclass(frozen=True)
class ExactReport:
    """Outcome of one exact identity check."""

    lemma: str
    lhs: Fraction
    rhs: Fraction
    equal: bool

    def to_json(self) -> dict:
        return {
            "lemma": self.lemma,
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "equal": self.equal,
        }


SpectrumLike = Union[Spectrum, Sequence[ExactScalar]]
MatrixLike = Sequence[Sequence[ExactScalar]]


def _values(s: SpectrumLike) -> list[Fraction]:
    if isinstance(s, Spectrum):
        return list(s.values)
    return [_exact(v) for v in s]


def _symmetric_matrix(mat: MatrixLike, n: int) -> list[list[Fraction]]:
    rows = [[_exact(v) for v in row] for row in mat]
    if len(rows) != n or any(len(row) != n for row in rows):
        raise ArityError(f"matrix must be {n} x {n} to match the spectrum")
    for r in range(n):
        for c in range(r):
            if rows[r][c] != rows[c][r]:
                raise ArityError("matrix must be symmetric")
    return rows


# ── the symmetric-function kernels ───────────────────────────────────────


def sigma_all(s: SpectrumLike) -> list[Fraction]:
    """All elementary symmetric functions sigma_0 .. sigma_n."""
    out = [Fraction(1)]
    for v in _values(s):
        out = [out[0]] + [out[c] + v * out[c - 1] for c in range(1, len(out))] + [v * out[-1]]
    return out


def sigma(k: int, s: SpectrumLike) -> Fraction:
    """sigma_k of the spectrum (0 outside 0 <= k <= n)."""
    vals = _values(s)
    if k < 0 or k > len(vals):
        return Fraction(0)
    return sigma_all(vals)[k]


def sigma_hat(k: int, i: int, s: SpectrumLike) -> Fraction:
    """sigma_k of the spectrum with entry ``i`` (1-based) removed."""
    vals = _values(s)
    if not 1 <= i <= len(vals):
        raise IndexError(f"index {i} out of range for spectrum of size {len(vals)}")
    return sigma(k, vals[: i - 1] + vals[i:])


def sigma_bar_all(s: SpectrumLike, params: BranchParams) -> list[Fraction]:
    """All shifted functions: coefficients of
    prod_j ((lambda_j + a + b) + t (lambda_j + a - b)) in powers of t."""
    plus_shift = params.a + params.b
    minus_shift = params.a - params.b
    out = [Fraction(1)]
    for v in _values(s):
        plus = v + plus_shift
        minus = v + minus_shift
        out = (
            [out[0] * plus]
            + [out[c] * plus + out[c - 1] * minus for c in range(1, len(out))]
            + [out[-1] * minus]
        )
    return out


def sigma_bar(k: int, s: SpectrumLike, params: BranchParams) -> Fraction:
    """The k-th two-sided-shifted symmetric function (0 outside range)."""
    vals = _values(s)
    if k < 0 or k > len(vals):
        return Fraction(0)
    return sigma_bar_all(vals, params)[k]


def alternating_sums(s: SpectrumLike) -> tuple[Fraction, Fraction]:
    """(E, O) with E = sum (-1)^j sigma_2j, O = sum (-1)^j sigma_{2j+1};
    these are the real and imaginary parts of prod (1 + i lambda_j)."""
    e = Fraction(0)
    o = Fraction(0)
    for k, val in enumerate(sigma_all(s)):
        sign = -1 if (k // 2) % 2 else 1
        if k % 2 == 0:
            e += sign * val
        else:
            o += sign * val
    return e, o


def alternating_sums_bar(s: SpectrumLike, params: BranchParams) -> tuple[Fraction, Fraction]:
    """Shifted alternating sums: real and imaginary parts of
    prod ((lambda_j + a + b) + i (lambda_j + a - b))."""
    e = Fraction(0)
    o = Fraction(0)
    for k, val in enumerate(sigma_bar_all(s, params)):
        sign = -1 if (k // 2) % 2 else 1
        if k % 2 == 0:
            e += sign * val
        else:
            o += sign * val
    return e, o


# ── sigma_k of an exact matrix ───────────────────────────────────────────


def char_sigmas(mat: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """sigma_0 .. sigma_n of a square matrix over exact rationals, via the
    Faddeev-LeVerrier recursion (valid for any square matrix, so diagonal
    similarity transforms may be applied freely before calling this)."""
    n = len(mat)
    if any(len(row) != n for row in mat):
        raise ArityError("matrix must be square")
    sigmas = [Fraction(1)]
    work = [row[:] for row in mat]
    c = Fraction(0)
    for k in range(1, n + 1):
        if k > 1:
            for d in range(n):
                work[d][d] += c
            work = [
                [sum(mat[r][m] * work[m][col] for m in range(n)) for col in range(n)]
                for r in range(n)
            ]
        trace = sum(work[d][d] for d in range(n))
        c = -trace / k
        sigmas.append((-1) ** k * c)
    return sigmas


# ── the linear coefficient along a matrix direction ──────────────────────


def _interp_coefficients(xs: list[Fraction], ys: list[Fraction]) -> list[Fraction]:
    """Exact coefficients (ascending) of the unique degree < len(xs)
    polynomial through the given points, by Lagrange accumulation."""
    size = len(xs)
    coeffs = [Fraction(0)] * size
    for i in range(size):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j in range(size):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for c in range(len(basis) - 1):
                basis[c] -= xs[j] * basis[c + 1]
            denom *= xs[i] - xs[j]
        w = ys[i] / denom
        for c, b in enumerate(basis):
            coeffs[c] += w * b
    return coeffs


def _linear_coefficient_by_interpolation(values, mat, k) -> Fraction:
    if k <= 0:
        return Fraction(0)
    n = len(values)
    xs = [Fraction(t) for t in range(k + 1)]
    ys = []
    for t in xs:
        shifted = [[t * mat[r][c] for c in range(n)] for r in range(n)]
        for d in range(n):
            shifted[d][d] += values[d]
        ys.append(char_sigmas(shifted)[k] if k <= n else Fraction(0))
    return _interp_coefficients(xs, ys)[1]


def _linear_coefficient_by_deleted_sum(values, mat, k) -> Fraction:
    total = Fraction(0)
    for i in range(len(values)):
        total += sigma_hat(k - 1, i + 1, values) * mat[i][i]
    return total


def linear_coefficient_sigma(k: int, s: SpectrumLike, B: MatrixLike) -> Fraction:
    """The t-coefficient of sigma_k(diag(lambda) + t B) for a symmetric
    matrix B of exact rationals.

    Computed by exact polynomial interpolation at k + 1 nodes (sigma_k of a
    matrix pencil has degree at most k in t) and cross-checked against the
    deleted-spectrum diagonal sum; MismatchError if the routes disagree
    (they cannot, unless one of them is miscoded -- this is a self-checking
    operation)."""
    values = _values(s)
    if not values:
        raise ArityError("need at least one eigenvalue")
    mat = _symmetric_matrix(B, len(values))
    via_interp = _linear_coefficient_by_interpolation(values, mat, k)
    via_deleted = _linear_coefficient_by_deleted_sum(values, mat, k)
    if via_interp != via_deleted:
        raise MismatchError(
            f"linear coefficient routes disagree: {via_interp} vs {via_deleted}"
        )
    return via_interp


def verify_linear_coefficient(k: int, s: SpectrumLike, B: MatrixLike) -> ExactReport:
    """Both routes of the linear-coefficient identity as a report (id L31),
    without raising on disagreement."""
    values = _values(s)
    if not values:
        raise ArityError("need at least one eigenvalue")
    mat = _symmetric_matrix(B, len(values))
    lhs = _linear_coefficient_by_interpolation(values, mat, k)
    rhs = _linear_coefficient_by_deleted_sum(values, mat, k)
    return ExactReport(lemma="L31", lhs=lhs, rhs=rhs, equal=lhs == rhs)


# ── identity verification ────────────────────────────────────────────────


def verify_identity(
    lemma: str,
    s: SpectrumLike,
    p: BranchParams | None = None,
    i: int | None = None,
    k: int | None = None,
) -> ExactReport:
    """Evaluate both sides of one of the L32/L33/L34 identities exactly.

    Which arguments are required depends on the identity: L32 takes ``i``,
    L33 takes ``p`` and ``k``, L34 takes ``p`` and ``i``.  Indices are
    1-based.  Missing or unusable auxiliary arguments raise ArityError;
    an out-of-range index raises IndexError.  L32 and L34 need a spectrum
    of size at least 3.
    """
    lemma = lemma.upper()
    values = _values(s)
    n = len(values)

    if lemma == "L32":
        if i is None:
            raise ArityError("L32 needs an index i")
        if n < 3:
            raise ArityError("L32 needs a spectrum of size at least 3")
        _check_index(i, n)
        deleted = values[: i - 1] + values[i:]
        e_full, o_full = alternating_sums(values)
        e_hat, o_hat = alternating_sums(deleted)
        lhs = e_full * e_hat + o_full * o_hat
        rhs = math.prod((1 + v * v for v in deleted), start=Fraction(1))

    elif lemma == "L33":
        if p is None or k is None:
            raise ArityError("L33 needs branch parameters and k")
        if not 0 <= k <= n:
            raise ArityError(f"k={k} out of range for spectrum of size {n}")
        lhs = sigma_bar(k, values, p)
        a, b = p.a, p.b
        rhs = Fraction(0)
        sig = sigma_all(values)
        for m in range(n + 1):
            for j in range(max(0, k - (n - m)), min(m, k) + 1):
                rhs += (
                    math.comb(m, j)
                    * math.comb(n - m, k - j)
                    * (a - b) ** (k - j)
                    * (a + b) ** (n - m - k + j)
                    * sig[m]
                )

    elif lemma == "L34":
        if p is None or i is None:
            raise ArityError("L34 needs branch parameters and an index i")
        if n < 3:
            raise ArityError("L34 needs a spectrum of size at least 3")
        _check_index(i, n)
        deleted = values[: i - 1] + values[i:]
        e_bar, o_bar = alternating_sums_bar(values, p)
        e_hat, o_hat = alternating_sums_bar(deleted, p)
        lhs = e_bar * (e_hat + o_hat) - o_bar * (e_hat - o_hat)
        a, b = p.a, p.b
        rhs = (
            Fraction(2) ** n
            * b
            * math.prod(((v + a) ** 2 + b * b for v in deleted), start=Fraction(1))
        )

    else:
        raise ValueError(f"unknown identity id {lemma!r}")

    return ExactReport(lemma=lemma, lhs=lhs, rhs=rhs, equal=lhs == rhs)


def _check_index(i: int, n: int) -> None:
    if not 1 <= i <= n:
        raise IndexError(f"index {i} out of range for spectrum of size {n}")


# ── random exact inputs ──────────────────────────────────────────────────


def random_rational(rng: Random, max_numerator: int = 5, max_denominator: int = 7) -> Fraction:
    return Fraction(rng.randint(-max_numerator, max_numerator), rng.randint(1, max_denominator))


def random_spectrum(
    rng: Random,
    n: int,
    lower: ExactScalar | None = None,
    max_numerator: int = 5,
    max_denominator: int = 7,
) -> Spectrum:
    """Random exact spectrum; with ``lower`` given, every eigenvalue sits
    strictly above it (useful for branch admissibility)."""
    if n < 1:
        raise ArityError("need n >= 1")
    values = []
    for _ in range(n):
        if lower is None:
            values.append(random_rational(rng, max_numerator, max_denominator))
        else:
            bump = Fraction(rng.randint(1, max_numerator), rng.randint(1, max_denominator))
            values.append(_exact(lower) + bump)
    return Spectrum(values)


def random_symmetric_matrix(
    rng: Random, n: int, max_numerator: int = 5, max_denominator: int = 7
) -> list[list[Fraction]]:
    """Random symmetric matrix of exact rationals."""
    mat = [[Fraction(0)] * n for _ in range(n)]
    for r in range(n):
        for c in range(r, n):
            v = random_rational(rng, max_numerator, max_denominator)
            mat[r][c] = v
            mat[c][r] = v
    return mat


def random_branch_params(rng: Random, nonzero_b: bool = False) -> BranchParams:
    a = random_rational(rng)
    b = random_rational(rng)
    while nonzero_b and b == 0:
        b = random_rational(rng)
    return BranchParams(a, b)
