"""Exact sparse polynomial arithmetic over the rationals, with radical
(|y|-power) extensions.

Representation
--------------
A polynomial in ``n_vars`` variables is a sparse mapping from exponent
tuples to nonzero rational coefficients::

    3/2 * y1^2 * y3   <->   {(2, 0, 1): Fraction(3, 2)}

``RadPoly`` extends this with integer powers of ``r = |y|``: a finite sum
``sum_k r^k * p_k`` stored as a mapping from the integer exponent ``k`` to
the polynomial ``p_k``.  Because ``r^2`` is itself a polynomial, such sums
have many representations; ``RadPoly`` keeps a canonical one (per-parity
collection at the minimal exponent, followed by maximal extraction of whole
``r^2`` factors) so that two representations of the same function always
compare equal and "the coefficient of ``r^k``" is well defined.

All arithmetic here is exact.  Floats only appear through ``evaluate`` when
called with float coordinates.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math
from typing import Iterable, Iterator, Mapping, Union

Exponent = tuple[int, ...]
Scalar = Union[int, Fraction, str]


class DimensionError(ValueError):
    """Operands live in different variable counts, or the dimension is
    outside the domain of an operation."""


class SolveError(ArithmeticError):
    """An exact linear solve failed or a requested exact form does not
    exist."""


def _as_fraction(value: Scalar | Fraction) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"expected an exact scalar, got {type(value).__name__}")


def _check_same_dims(a: "MultiPoly | RadPoly", b: "MultiPoly | RadPoly") -> None:
    if a.n_vars != b.n_vars:
        raise DimensionError(f"operands have {a.n_vars} and {b.n_vars} variables")


# ── polynomials ──────────────────────────────────────────────────────────


class MultiPoly:
    """Sparse multivariate polynomial with Fraction coefficients."""

    __slots__ = ("n_vars", "terms")

    def __init__(self, n_vars: int, terms: Mapping[Exponent, Scalar] | None = None):
        if n_vars < 1:
            raise DimensionError("need at least one variable")
        clean: dict[Exponent, Fraction] = {}
        for exp, coef in (terms or {}).items():
            exp = tuple(exp)
            if len(exp) != n_vars or any(e < 0 for e in exp):
                raise DimensionError(f"bad exponent {exp} for {n_vars} variables")
            c = _as_fraction(coef)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        self.n_vars = n_vars
        self.terms = clean

    # construction ---------------------------------------------------------

    @classmethod
    def zero(cls, n_vars: int) -> "MultiPoly":
        return cls(n_vars, {})

    @classmethod
    def const(cls, n_vars: int, value: Scalar) -> "MultiPoly":
        return cls(n_vars, {(0,) * n_vars: _as_fraction(value)})

    @classmethod
    def variable(cls, n_vars: int, i: int) -> "MultiPoly":
        """The coordinate ``y_i`` (0-based index)."""
        if not 0 <= i < n_vars:
            raise DimensionError(f"variable index {i} out of range for {n_vars}")
        exp = tuple(1 if j == i else 0 for j in range(n_vars))
        return cls(n_vars, {exp: Fraction(1)})

    @classmethod
    def r_squared(cls, n_vars: int) -> "MultiPoly":
        """``|y|^2 = y_1^2 + ... + y_n^2``."""
        terms = {}
        for i in range(n_vars):
            exp = tuple(2 if j == i else 0 for j in range(n_vars))
            terms[exp] = Fraction(1)
        return cls(n_vars, terms)

    # arithmetic -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.n_vars == other.n_vars and self.terms == other.terms

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.n_vars, {e: -c for e, c in self.terms.items()})

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return NotImplemented
        _check_same_dims(self, other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, Fraction(0)) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        p = MultiPoly.__new__(MultiPoly)
        p.n_vars, p.terms = self.n_vars, out
        return p

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly | Scalar") -> "MultiPoly":
        if isinstance(other, MultiPoly):
            _check_same_dims(self, other)
            out: dict[Exponent, Fraction] = defaultdict(Fraction)
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    out[tuple(a + b for a, b in zip(e1, e2))] += c1 * c2
            return MultiPoly(self.n_vars, out)
        c = _as_fraction(other)
        if not c:
            return MultiPoly.zero(self.n_vars)
        p = MultiPoly.__new__(MultiPoly)
        p.n_vars = self.n_vars
        p.terms = {e: v * c for e, v in self.terms.items()}
        return p

    def __rmul__(self, other: Scalar) -> "MultiPoly":
        return self * other

    def __pow__(self, k: int) -> "MultiPoly":
        if k < 0:
            raise ValueError("negative polynomial power")
        out = MultiPoly.const(self.n_vars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # calculus -------------------------------------------------------------

    def partial(self, i: int) -> "MultiPoly":
        """Partial derivative with respect to the 0-based coordinate ``i``."""
        out: dict[Exponent, Fraction] = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = e[:i] + (e[i] - 1,) + e[i + 1 :]
                out[e2] = out.get(e2, Fraction(0)) + c * e[i]
        return MultiPoly(self.n_vars, out)

    def laplacian(self) -> "MultiPoly":
        out: dict[Exponent, Fraction] = defaultdict(Fraction)
        for e, c in self.terms.items():
            for i, ei in enumerate(e):
                if ei >= 2:
                    e2 = e[:i] + (ei - 2,) + e[i + 1 :]
                    out[e2] += c * ei * (ei - 1)
        return MultiPoly(self.n_vars, out)

    def euler(self) -> "MultiPoly":
        """``sum_i y_i * d/dy_i`` applied to the polynomial."""
        out = {e: c * sum(e) for e, c in self.terms.items()}
        return MultiPoly(self.n_vars, out)

    # structure ------------------------------------------------------------

    def total_degree(self) -> int:
        """Largest total degree among terms (0 for the zero polynomial)."""
        return max((sum(e) for e in self.terms), default=0)

    def homogeneous_components(self) -> dict[int, "MultiPoly"]:
        buckets: dict[int, dict[Exponent, Fraction]] = defaultdict(dict)
        for e, c in self.terms.items():
            buckets[sum(e)][e] = c
        return {d: MultiPoly(self.n_vars, t) for d, t in sorted(buckets.items())}

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degrees = {sum(e) for e in self.terms}
        if not degrees:
            return True
        if len(degrees) > 1:
            return False
        return degree is None or degrees == {degree}

    def evaluate(self, point: Iterable) -> Fraction | float:
        pt = list(point)
        if len(pt) != self.n_vars:
            raise DimensionError(f"point has {len(pt)} coordinates, expected {self.n_vars}")
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for x, k in zip(pt, e):
                if k:
                    term = term * x**k
            total = total + term
        return total

    def try_divide_r2(self) -> "MultiPoly | None":
        """Exact quotient by ``|y|^2`` if it divides this polynomial, else None.

        Long division in the first variable: the divisor is monic of degree 2
        in ``y_1`` over the ring of polynomials in the remaining variables,
        so quotient and remainder are unique and divisibility is equivalent
        to a vanishing remainder.
        """
        if self.is_zero:
            return MultiPoly.zero(self.n_vars)
        by_deg: dict[int, dict[Exponent, Fraction]] = defaultdict(dict)
        for e, c in self.terms.items():
            by_deg[e[0]][e] = c
        quot: dict[Exponent, Fraction] = {}
        for d in range(max(by_deg), 1, -1):
            for e, c in by_deg.pop(d, {}).items():
                if not c:
                    continue
                qe = (e[0] - 2,) + e[1:]
                quot[qe] = quot.get(qe, Fraction(0)) + c
                for j in range(1, self.n_vars):
                    e2 = (e[0] - 2,) + e[1:j] + (e[j] + 2,) + e[j + 1 :]
                    blk = by_deg[d - 2]
                    blk[e2] = blk.get(e2, Fraction(0)) - c
        for d in (0, 1):
            if any(by_deg.get(d, {}).values()):
                return None
        return MultiPoly(self.n_vars, quot)

    # serialization --------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "n_vars": self.n_vars,
            "terms": [
                {"coef": str(c), "exp": list(e)} for e, c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MultiPoly":
        try:
            n_vars = int(data["n_vars"])
            terms = {tuple(t["exp"]): Fraction(t["coef"]) for t in data["terms"]}
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed polynomial record: {exc}") from exc
        return cls(n_vars, terms)

    def __repr__(self) -> str:
        if self.is_zero:
            return "0"
        bits = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(
                f"y{i + 1}" if k == 1 else f"y{i + 1}^{k}" for i, k in enumerate(e) if k
            )
            bits.append(f"{c}" if not mono else f"{c}*{mono}")
        return " + ".join(bits)


@dataclass(frozen=True)
class HomoPoly:
    """A polynomial certified homogeneous of a fixed total degree."""

    base: MultiPoly
    degree: int

    def __post_init__(self) -> None:
        if not self.base.is_homogeneous(self.degree):
            raise ValueError(f"polynomial is not homogeneous of degree {self.degree}")


def poly_laplacian(p: MultiPoly, n_vars: int) -> MultiPoly:
    """Laplacian of a polynomial in ``n_vars`` variables."""
    if p.n_vars != n_vars:
        raise DimensionError(f"polynomial has {p.n_vars} variables, expected {n_vars}")
    return p.laplacian()


# ── radical polynomials ──────────────────────────────────────────────────


class RadPoly:
    """Finite sum ``sum_k |y|^k p_k`` with integer ``k`` and polynomial
    ``p_k``, kept in canonical form.

    Canonical form: the slots of each parity of ``k`` are merged down to the
    minimal exponent of that parity (multiplying by whole ``|y|^2`` factors),
    then ``|y|^2`` is factored back out while the merged polynomial remains
    exactly divisible.  At most one slot per parity survives, and the form is
    unique, so ``==`` decides equality of the represented functions.
    """

    __slots__ = ("n_vars", "_slots")

    def __init__(self, n_vars: int, slots: Mapping[int, MultiPoly] | None = None):
        if n_vars < 1:
            raise DimensionError("need at least one variable")
        by_parity: dict[int, list[tuple[int, MultiPoly]]] = {0: [], 1: []}
        for k, p in (slots or {}).items():
            if p.n_vars != n_vars:
                raise DimensionError(f"slot polynomial has {p.n_vars} variables, expected {n_vars}")
            if not p.is_zero:
                by_parity[k & 1].append((int(k), p))
        r2 = MultiPoly.r_squared(n_vars)
        normal: dict[int, MultiPoly] = {}
        for items in by_parity.values():
            if not items:
                continue
            k_min = min(k for k, _ in items)
            merged = MultiPoly.zero(n_vars)
            for k, p in items:
                merged = merged + p * r2 ** ((k - k_min) // 2)
            if merged.is_zero:
                continue
            while True:
                q = merged.try_divide_r2()
                if q is None:
                    break
                merged, k_min = q, k_min + 2
            normal[k_min] = merged
        self.n_vars = n_vars
        self._slots = normal

    @classmethod
    def from_poly(cls, p: MultiPoly, k: int = 0) -> "RadPoly":
        return cls(p.n_vars, {k: p})

    @classmethod
    def zero(cls, n_vars: int) -> "RadPoly":
        return cls(n_vars, {})

    # structure ------------------------------------------------------------

    @property
    def slots(self) -> dict[int, MultiPoly]:
        return dict(self._slots)

    def slot(self, k: int) -> MultiPoly:
        """Canonical-form coefficient of ``|y|^k`` (zero if absent)."""
        return self._slots.get(k, MultiPoly.zero(self.n_vars))

    @property
    def is_zero(self) -> bool:
        return not self._slots

    def min_slot(self) -> int | None:
        return min(self._slots) if self._slots else None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RadPoly):
            return NotImplemented
        return self.n_vars == other.n_vars and self._slots == other._slots

    # arithmetic -----------------------------------------------------------

    def __neg__(self) -> "RadPoly":
        return RadPoly(self.n_vars, {k: -p for k, p in self._slots.items()})

    def __add__(self, other: "RadPoly") -> "RadPoly":
        if not isinstance(other, RadPoly):
            return NotImplemented
        _check_same_dims(self, other)
        out: dict[int, MultiPoly] = dict(self._slots)
        for k, p in other._slots.items():
            out[k] = out[k] + p if k in out else p
        return RadPoly(self.n_vars, out)

    def __sub__(self, other: "RadPoly") -> "RadPoly":
        return self + (-other)

    def __mul__(self, other: "RadPoly | MultiPoly | Scalar") -> "RadPoly":
        if isinstance(other, RadPoly):
            _check_same_dims(self, other)
            out: dict[int, MultiPoly] = {}
            for k1, p1 in self._slots.items():
                for k2, p2 in other._slots.items():
                    k = k1 + k2
                    prod = p1 * p2
                    out[k] = out[k] + prod if k in out else prod
            return RadPoly(self.n_vars, out)
        if isinstance(other, MultiPoly):
            _check_same_dims(self, other)
            return RadPoly(self.n_vars, {k: p * other for k, p in self._slots.items()})
        return RadPoly(self.n_vars, {k: p * other for k, p in self._slots.items()})

    def __rmul__(self, other: Scalar) -> "RadPoly":
        return self * other

    def shift(self, k: int) -> "RadPoly":
        """Multiply by ``|y|^k``."""
        return RadPoly(self.n_vars, {j + k: p for j, p in self._slots.items()})

    # calculus -------------------------------------------------------------

    def partial(self, i: int) -> "RadPoly":
        out: dict[int, MultiPoly] = defaultdict(lambda: MultiPoly.zero(self.n_vars))
        yi = MultiPoly.variable(self.n_vars, i)
        for k, p in self._slots.items():
            if k:
                out[k - 2] = out[k - 2] + k * yi * p
            out[k] = out[k] + p.partial(i)
        return RadPoly(self.n_vars, out)

    def laplacian(self) -> "RadPoly":
        """Exact Laplacian: ``lap(|y|^k p) = |y|^(k-2) (k (k+n-2) p
        + 2 k y.grad p) + |y|^k lap p`` with ``n`` the variable count."""
        n = self.n_vars
        out: dict[int, MultiPoly] = defaultdict(lambda: MultiPoly.zero(n))
        for k, p in self._slots.items():
            if k:
                out[k - 2] = out[k - 2] + k * (k + n - 2) * p + 2 * k * p.euler()
            out[k] = out[k] + p.laplacian()
        return RadPoly(n, out)

    # extraction -----------------------------------------------------------

    def collect_odd(self, base: int = -1) -> MultiPoly:
        """The odd-exponent sector as a single polynomial ``W`` with
        odd part equal to ``|y|^base * W`` (``base`` must be odd)."""
        if base % 2 == 0:
            raise ValueError("base exponent must be odd")
        odd = [(k, p) for k, p in self._slots.items() if k % 2]
        if not odd:
            return MultiPoly.zero(self.n_vars)
        (k, p), = odd
        if k < base:
            raise SolveError(f"odd sector sits at |y|^{k}, below requested base {base}")
        return p * MultiPoly.r_squared(self.n_vars) ** ((k - base) // 2)

    def evaluate(self, point: Iterable) -> Fraction | float:
        pt = list(point)
        if len(pt) != self.n_vars:
            raise DimensionError(f"point has {len(pt)} coordinates, expected {self.n_vars}")
        r2 = sum(x * x for x in pt)
        total = None
        for k, p in self._slots.items():
            if k % 2 == 0:
                rk = r2 ** (k // 2)
            else:
                rk = math.sqrt(r2) ** k
            val = rk * p.evaluate(pt)
            total = val if total is None else total + val
        if total is None:
            return Fraction(0)
        return total

    # serialization --------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "n_vars": self.n_vars,
            "slots": [
                {"k": k, "poly": p.to_json()} for k, p in sorted(self._slots.items())
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "RadPoly":
        try:
            n_vars = int(data["n_vars"])
            slots = {int(s["k"]): MultiPoly.from_json(s["poly"]) for s in data["slots"]}
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed radical polynomial record: {exc}") from exc
        return cls(n_vars, slots)

    def __repr__(self) -> str:
        if self.is_zero:
            return "0"
        return " + ".join(f"|y|^{k}*({p!r})" for k, p in sorted(self._slots.items()))


def radpoly_laplacian(e: RadPoly, n: int) -> RadPoly:
    """Laplacian of a radical polynomial in ``n >= 2`` ambient variables."""
    if n < 2:
        raise DimensionError("the radical Laplacian needs n >= 2")
    if e.n_vars != n:
        raise DimensionError(f"radical polynomial lives in {e.n_vars} variables, expected {n}")
    return e.laplacian()


# ── the radial-weight Poisson equation ───────────────────────────────────
#
# For homogeneous h of degree m in n >= 3 variables, the unique homogeneous
# polynomial solution u of
#
#     lap(|y|^(n-2) u) = |y|^(n-4) h
#
# satisfies  c_m u + |y|^2 lap u = h  with  c_m = (n-2)(2n-4+2m).  The
# operator on the left preserves the parity class of every exponent tuple,
# so it block-diagonalizes over the monomial basis; each block is inverted
# once by exact Gaussian elimination and cached.


def _monomials(n_vars: int, degree: int) -> Iterator[Exponent]:
    if n_vars == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in _monomials(n_vars - 1, degree - first):
            yield (first,) + rest


def _apply_shifted(alpha: Exponent, c_m: int) -> dict[Exponent, int]:
    """Coefficients of (c_m + |y|^2 lap) applied to the monomial alpha."""
    out: dict[Exponent, int] = defaultdict(int)
    out[alpha] += c_m
    n = len(alpha)
    for i, ai in enumerate(alpha):
        if ai >= 2:
            w = ai * (ai - 1)
            dropped = alpha[:i] + (ai - 2,) + alpha[i + 1 :]
            for j in range(n):
                beta = dropped[:j] + (dropped[j] + 2,) + dropped[j + 1 :]
                out[beta] += w
    return out


def _lu_solve(lu, perm, rhs: list[Fraction]) -> list[Fraction]:
    s = len(rhs)
    y = [Fraction(0)] * s
    for i in range(s):
        acc = rhs[perm[i]]
        row = lu[i]
        for j in range(i):
            acc -= row[j] * y[j]
        y[i] = acc
    x = [Fraction(0)] * s
    for i in range(s - 1, -1, -1):
        acc = y[i]
        row = lu[i]
        for j in range(i + 1, s):
            acc -= row[j] * x[j]
        x[i] = acc / row[i]
    return x


@lru_cache(maxsize=None)
def _poisson_block(n_vars: int, degree: int, parity: Exponent):
    """Monomial basis and exact LU factorization of one parity block of
    ``c_m + |y|^2 lap`` on homogeneous polynomials."""
    c_m = (n_vars - 2) * (2 * n_vars - 4 + 2 * degree)
    basis = sorted(
        e for e in _monomials(n_vars, degree) if tuple(x & 1 for x in e) == parity
    )
    index = {e: i for i, e in enumerate(basis)}
    s = len(basis)
    mat = [[Fraction(0)] * s for _ in range(s)]
    for j, alpha in enumerate(basis):
        for beta, w in _apply_shifted(alpha, c_m).items():
            mat[index[beta]][j] += w
    # LU with partial pivoting, exact over Fraction
    perm = list(range(s))
    lu = [row[:] for row in mat]
    for col in range(s):
        piv = next((r for r in range(col, s) if lu[r][col]), None)
        if piv is None:
            raise SolveError("singular block in the radial-weight Poisson operator")
        if piv != col:
            lu[col], lu[piv] = lu[piv], lu[col]
            perm[col], perm[piv] = perm[piv], perm[col]
        inv_piv = lu[col][col]
        for r in range(col + 1, s):
            if lu[r][col]:
                f = lu[r][col] / inv_piv
                lu[r][col] = f
                row_r, row_c = lu[r], lu[col]
                for c2 in range(col + 1, s):
                    if row_c[c2]:
                        row_r[c2] -= f * row_c[c2]
    return basis, index, tuple(tuple(row) for row in lu), tuple(perm)


def solve_radical_poisson(h: HomoPoly | MultiPoly, n: int) -> HomoPoly:
    """Solve ``lap(|y|^(n-2) u) = |y|^(n-4) h`` exactly for homogeneous
    polynomial ``h`` in ``n >= 3`` variables; returns the unique homogeneous
    polynomial ``u`` of the same degree.

    Raises DimensionError when n <= 2 or the variable counts disagree, and
    ValueError for an inhomogeneous right-hand side.  Before returning, the
    solution is re-verified in radical-polynomial form:
    ``radpoly_laplacian(|y|^(n-2) u) - |y|^(n-4) h`` must be identically zero.
    """
    p = h.base if isinstance(h, HomoPoly) else h
    if n < 3:
        raise DimensionError("the radial-weight Poisson solve needs n >= 3")
    if p.n_vars != n:
        raise DimensionError(f"right-hand side has {p.n_vars} variables, expected {n}")
    if p.is_zero:
        return HomoPoly(MultiPoly.zero(n), h.degree if isinstance(h, HomoPoly) else 0)
    if not p.is_homogeneous():
        raise ValueError("right-hand side must be homogeneous")
    m = p.total_degree()

    groups: dict[Exponent, dict[Exponent, Fraction]] = defaultdict(dict)
    for e, c in p.terms.items():
        groups[tuple(x & 1 for x in e)][e] = c

    u_terms: dict[Exponent, Fraction] = {}
    for parity, part in groups.items():
        basis, index, lu, perm = _poisson_block(n, m, parity)
        rhs = [Fraction(0)] * len(basis)
        for e, c in part.items():
            rhs[index[e]] = c
        x = _lu_solve(lu, perm, rhs)
        for e, c in zip(basis, x):
            if c:
                u_terms[e] = c
    u = MultiPoly(n, u_terms)

    residual = radpoly_laplacian(RadPoly(n, {n - 2: u}), n) - RadPoly(n, {n - 4: p})
    if not residual.is_zero:
        raise SolveError("exact solve failed verification")
    return HomoPoly(u, m)


def harmonic_decomposition(p: HomoPoly | MultiPoly) -> dict[int, MultiPoly]:
    """Decompose a homogeneous polynomial as ``p = sum_j |y|^(2j) h_j`` with
    each ``h_j`` harmonic; returns ``{j: h_j}`` (nonzero components only).

    Recursive: the Laplacian of the sum determines every ``h_j`` with
    ``j >= 1`` through the exact ladder constants ``2j(2m - 2j + n - 2)``,
    and the harmonic top is whatever remains.
    """
    poly = p.base if isinstance(p, HomoPoly) else p
    n = poly.n_vars
    if n < 2:
        raise DimensionError("harmonic decomposition needs n >= 2")
    if poly.is_zero:
        return {}
    if not poly.is_homogeneous():
        raise ValueError("input must be homogeneous")
    m = poly.total_degree()
    if m <= 1:
        return {0: poly}
    sub = harmonic_decomposition(poly.laplacian())
    comps: dict[int, MultiPoly] = {}
    r2 = MultiPoly.r_squared(n)
    tail = MultiPoly.zero(n)
    for i, g in sub.items():
        j = i + 1
        mu = 2 * j * (2 * m - 2 * j + n - 2)
        comps[j] = g * Fraction(1, mu)
        tail = tail + r2**j * comps[j]
    top = poly - tail
    if not top.laplacian().is_zero:
        raise SolveError("harmonic decomposition failed verification")
    if not top.is_zero:
        comps[0] = top
    return dict(sorted(comps.items()))
