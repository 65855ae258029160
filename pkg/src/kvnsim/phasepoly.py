"""Exact multivariate polynomial arithmetic over phase-space coordinates.

Polynomials carry rational coefficients throughout; floating point enters
only at evaluation time. Variables are indexed 0..num_vars-1 and, for a
system with n degrees of freedom, follow the fixed ordering
(x1..xn, x{n+1}..x{2n}): positions first, conjugate momenta second.

Terms are stored sparsely as a map from exponent multi-indices to
nonzero ``Fraction`` coefficients. The canonical term order used for
printing and serialization is graded lexicographic (total degree first,
then lexicographic on the exponent vector), descending.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np

Monomial = tuple[int, ...]

_Coeff = int | Fraction | str


def _as_fraction(value: _Coeff) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")


class PhasePolynomial:
    """Sparse polynomial with exact rational coefficients.

    Supports ``+``, ``-``, ``*`` (polynomial or scalar) and ``**`` with the
    usual meanings. Instances are treated as immutable values.
    """

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars: int, terms: Mapping[Monomial, _Coeff] | None = None):
        if num_vars < 1:
            raise ValueError(f"num_vars must be positive, got {num_vars}")
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for expo, coeff in terms.items():
                expo = tuple(int(e) for e in expo)
                if len(expo) != num_vars:
                    raise ValueError(
                        f"multi-index {expo} has length {len(expo)}, expected {num_vars}"
                    )
                if any(e < 0 for e in expo):
                    raise ValueError(f"negative exponent in multi-index {expo}")
                c = _as_fraction(coeff)
                if c:
                    acc = clean.get(expo)
                    c = c if acc is None else acc + c
                    if c:
                        clean[expo] = c
                    else:
                        clean.pop(expo, None)
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("PhasePolynomial is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, num_vars: int) -> "PhasePolynomial":
        return cls(num_vars)

    @classmethod
    def constant(cls, num_vars: int, value: _Coeff) -> "PhasePolynomial":
        return cls(num_vars, {(0,) * num_vars: value})

    @classmethod
    def variable(cls, num_vars: int, index: int) -> "PhasePolynomial":
        if not 0 <= index < num_vars:
            raise ValueError(f"variable index {index} out of range for {num_vars} variables")
        expo = tuple(1 if i == index else 0 for i in range(num_vars))
        return cls(num_vars, {expo: 1})

    @classmethod
    def monomial(cls, num_vars: int, exponents: Sequence[int], coeff: _Coeff = 1) -> "PhasePolynomial":
        return cls(num_vars, {tuple(exponents): coeff})

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; the zero polynomial has degree -1 by convention."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def support(self) -> set[int]:
        """Indices of variables that appear with a nonzero exponent."""
        out: set[int] = set()
        for expo in self.terms:
            out.update(i for i, e in enumerate(expo) if e)
        return out

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in canonical (graded lexicographic, descending) order."""
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def monomials(self) -> Iterator["PhasePolynomial"]:
        """Yield each term as a single-term polynomial, canonical order."""
        for expo, coeff in self.sorted_terms():
            yield PhasePolynomial(self.num_vars, {expo: coeff})

    def coefficient(self, exponents: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exponents), Fraction(0))

    # -- arithmetic --------------------------------------------------------

    def _check_compatible(self, other: "PhasePolynomial") -> None:
        if self.num_vars != other.num_vars:
            raise ValueError(
                f"dimension mismatch: {self.num_vars} vs {other.num_vars} variables"
            )

    def __add__(self, other: "PhasePolynomial") -> "PhasePolynomial":
        if not isinstance(other, PhasePolynomial):
            return NotImplemented
        self._check_compatible(other)
        terms = dict(self.terms)
        for expo, coeff in other.terms.items():
            acc = terms.get(expo)
            val = coeff if acc is None else acc + coeff
            if val:
                terms[expo] = val
            else:
                terms.pop(expo, None)
        return PhasePolynomial(self.num_vars, terms)

    def __neg__(self) -> "PhasePolynomial":
        return PhasePolynomial(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "PhasePolynomial") -> "PhasePolynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PhasePolynomial):
            self._check_compatible(other)
            terms: dict[Monomial, Fraction] = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    expo = tuple(a + b for a, b in zip(e1, e2))
                    val = terms.get(expo, Fraction(0)) + c1 * c2
                    if val:
                        terms[expo] = val
                    else:
                        terms.pop(expo, None)
            return PhasePolynomial(self.num_vars, terms)
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            return PhasePolynomial(self.num_vars, {e: c * v for e, v in self.terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "PhasePolynomial":
        if exponent < 0:
            raise ValueError("negative powers are not defined for polynomials")
        out = PhasePolynomial.constant(self.num_vars, 1)
        for _ in range(exponent):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhasePolynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.terms.items())))

    # -- calculus ----------------------------------------------------------

    def partial_derivative(self, var: int) -> "PhasePolynomial":
        """Formal partial derivative with respect to variable ``var``."""
        if not 0 <= var < self.num_vars:
            raise ValueError(f"variable index {var} out of range for {self.num_vars} variables")
        terms: dict[Monomial, Fraction] = {}
        for expo, coeff in self.terms.items():
            e = expo[var]
            if e == 0:
                continue
            lowered = expo[:var] + (e - 1,) + expo[var + 1:]
            terms[lowered] = terms.get(lowered, Fraction(0)) + coeff * e
        return PhasePolynomial(self.num_vars, terms)

    # -- evaluation --------------------------------------------------------

    def evaluate(self, point: Sequence[float]) -> float:
        """Evaluate at a real point, with per-variable power caching."""
        if len(point) != self.num_vars:
            raise ValueError(
                f"dimension mismatch: point has length {len(point)}, expected {self.num_vars}"
            )
        if not self.terms:
            return 0.0
        max_exp = [0] * self.num_vars
        for expo in self.terms:
            for i, e in enumerate(expo):
                if e > max_exp[i]:
                    max_exp[i] = e
        powers = []
        for i, m in enumerate(max_exp):
            row = [1.0] * (m + 1)
            for k in range(1, m + 1):
                row[k] = row[k - 1] * float(point[i])
            powers.append(row)
        total = 0.0
        for expo, coeff in self.terms.items():
            prod = float(coeff)
            for i, e in enumerate(expo):
                if e:
                    prod *= powers[i][e]
            total += prod
        return total

    def evaluate_array(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on an array of shape (..., num_vars)."""
        points = np.asarray(points)
        if points.shape[-1] != self.num_vars:
            raise ValueError(
                f"dimension mismatch: points have last axis {points.shape[-1]}, "
                f"expected {self.num_vars}"
            )
        out = np.zeros(points.shape[:-1], dtype=points.dtype)
        for expo, coeff in self.terms.items():
            term = np.full(points.shape[:-1], float(coeff), dtype=points.dtype)
            for i, e in enumerate(expo):
                if e:
                    term = term * points[..., i] ** e
            out = out + term
        return out

    # -- printing ----------------------------------------------------------

    def __repr__(self) -> str:
        return f"PhasePolynomial({self.num_vars}, {format_polynomial(self)!r})"

    def __str__(self) -> str:
        return format_polynomial(self)


def poisson_bracket(p: PhasePolynomial, q: PhasePolynomial) -> PhasePolynomial:
    """Canonical Poisson bracket {p, q} on a 2n-dimensional phase space.

    {p, q} = sum_j (dp/dx_j dq/dx_{n+j} - dp/dx_{n+j} dq/dx_j), with the
    first n variables positions and the last n momenta.
    """
    if isinstance(q, PhasePolynomial):
        p._check_compatible(q)
    if p.num_vars % 2:
        raise ValueError("Poisson bracket requires an even number of variables")
    n = p.num_vars // 2
    out = PhasePolynomial.zero(p.num_vars)
    for j in range(n):
        out = out + p.partial_derivative(j) * q.partial_derivative(n + j)
        out = out - p.partial_derivative(n + j) * q.partial_derivative(j)
    return out


@dataclass(frozen=True)
class SymplecticStructure:
    """The canonical symplectic matrix J = [[0, I], [-I, 0]] for n degrees
    of freedom; satisfies J^2 = -I and J^T = -J exactly."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")

    def matrix(self) -> np.ndarray:
        """Return J as an exact integer array of shape (2n, 2n)."""
        n = self.n
        j = np.zeros((2 * n, 2 * n), dtype=np.int64)
        j[:n, n:] = np.eye(n, dtype=np.int64)
        j[n:, :n] = -np.eye(n, dtype=np.int64)
        return j


# -- literal format ---------------------------------------------------------
#
# A polynomial literal is a sum of terms ``c * x1^a1 * ... * xk^ak`` with
# rational coefficient c, e.g. ``1/2 * x2^2 + 1/2 * x1^2``. Variables are
# named x1..x{num_vars} (1-based in the text form only). The formatter
# emits canonical (graded lexicographic) order and ``parse_polynomial``
# round-trips it bit-exactly.

_TERM_RE = re.compile(
    r"^\s*(?P<coeff>\d+(?:/\d+|\.\d+)?)?\s*\*?\s*(?P<vars>(?:\s*\*?\s*x\d+(?:\^\d+)?)*)\s*$"
)
_VAR_RE = re.compile(r"x(\d+)(?:\^(\d+))?")


def _format_coeff(c: Fraction) -> str:
    return str(c)


def format_polynomial(p: PhasePolynomial) -> str:
    """Render a polynomial in the canonical literal format."""
    if p.is_zero:
        return "0"
    pieces: list[str] = []
    for expo, coeff in p.sorted_terms():
        factors = []
        for i, e in enumerate(expo):
            if e == 0:
                continue
            factors.append(f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}")
        mag = abs(coeff)
        if factors:
            body = " * ".join(factors)
            if mag != 1:
                body = f"{_format_coeff(mag)} * {body}"
        else:
            body = _format_coeff(mag)
        if not pieces:
            pieces.append(body if coeff > 0 else f"-{body}")
        else:
            pieces.append(f"{'+' if coeff > 0 else '-'} {body}")
    return " ".join(pieces)


def parse_polynomial(text: str, num_vars: int) -> PhasePolynomial:
    """Parse the literal format into a polynomial over ``num_vars`` variables.

    Accepts integer, fraction (``3/4``) and decimal (``0.25``) coefficients;
    decimals are converted exactly.
    """
    stripped = text.strip()
    if not stripped:
        raise ValueError("empty polynomial literal")
    if stripped == "0":
        return PhasePolynomial.zero(num_vars)
    normalized = stripped.replace("-", "+-")
    terms: dict[Monomial, Fraction] = {}
    for chunk in normalized.split("+"):
        chunk = chunk.strip()
        if not chunk:
            continue
        sign = Fraction(1)
        if chunk.startswith("-"):
            sign = Fraction(-1)
            chunk = chunk[1:].strip()
        m = _TERM_RE.match(chunk)
        if not m or (not m.group("coeff") and not m.group("vars").strip()):
            raise ValueError(f"cannot parse polynomial term {chunk!r}")
        coeff = sign * (Fraction(m.group("coeff")) if m.group("coeff") else Fraction(1))
        expo = [0] * num_vars
        for vm in _VAR_RE.finditer(m.group("vars")):
            idx = int(vm.group(1)) - 1
            if not 0 <= idx < num_vars:
                raise ValueError(
                    f"variable x{vm.group(1)} out of range for {num_vars} variables"
                )
            expo[idx] += int(vm.group(2)) if vm.group(2) else 1
        key = tuple(expo)
        val = terms.get(key, Fraction(0)) + coeff
        if val:
            terms[key] = val
        else:
            terms.pop(key, None)
    return PhasePolynomial(num_vars, terms)
