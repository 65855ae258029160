"""Exact symbolic algebra of quadrature operators under [X_j, P_k] = i d_jk.

Operators are stored in normal order: within each mode, every X factor
stands to the left of every P factor. A term is a map from per-mode
exponent pairs (a_X, a_P) to a Gaussian-rational coefficient, so all
reordering moves produced by the canonical commutation relation stay
exact. Products of operators on different modes always commute.

The module also proves, at the generator level, the controlled-shift
conjugation identity used by the gate synthesizer:

    exp(i h X_c P_t) X_t^a exp(-i h X_c P_t) = (X_t + h X_c)^a

whose commutator cascade terminates after the a-th step, and the product
rule of the Liouville operator used to transport Born densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .expansion import expansion_coefficients
from .phasepoly import PhasePolynomial, poisson_bracket

ModeExponents = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class ComplexRational:
    """Gaussian rational a + b i with exact Fraction parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @classmethod
    def coerce(cls, value) -> "ComplexRational":
        if isinstance(value, ComplexRational):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(Fraction(value), Fraction(0))
        raise TypeError(f"cannot use {type(value).__name__} as a Gaussian rational")

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __add__(self, other: "ComplexRational") -> "ComplexRational":
        return ComplexRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ComplexRational") -> "ComplexRational":
        return ComplexRational(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "ComplexRational":
        return ComplexRational(-self.re, -self.im)

    def __mul__(self, other) -> "ComplexRational":
        other = ComplexRational.coerce(other)
        return ComplexRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, k) -> "ComplexRational":
        k = Fraction(k)
        return ComplexRational(self.re / k, self.im / k)

    def conjugate(self) -> "ComplexRational":
        return ComplexRational(self.re, -self.im)

    def __str__(self) -> str:
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re} {sign} {abs(self.im)}i"


ONE = ComplexRational(Fraction(1))
I = ComplexRational(Fraction(0), Fraction(1))

# (-i)^k for k mod 4, used by the reordering rule below.
_MINUS_I_POW = (ONE, -I, -ONE, I)


def _reorder_px(a: int, b: int) -> list[tuple[tuple[int, int], ComplexRational]]:
    """Normal order P^b X^a on one mode.

    P^b X^a = sum_k k! C(a,k) C(b,k) (-i)^k X^(a-k) P^(b-k), a direct
    consequence of [X, P] = i applied recursively.
    """
    out = []
    for k in range(min(a, b) + 1):
        c = math.comb(a, k) * math.comb(b, k) * math.factorial(k)
        out.append(((a - k, b - k), _MINUS_I_POW[k % 4] * c))
    return out


class WeylPolynomial:
    """Normal-ordered polynomial in quadrature operators X_j, P_j.

    ``*`` is the (noncommutative) operator product with the result
    re-normal-ordered exactly; ``+`` and scalar multiples behave as usual.
    """

    __slots__ = ("num_modes", "terms")

    def __init__(self, num_modes: int, terms=None):
        if num_modes < 1:
            raise ValueError(f"num_modes must be positive, got {num_modes}")
        clean: dict[ModeExponents, ComplexRational] = {}
        if terms:
            for expo, coeff in terms.items():
                expo = tuple((int(ax), int(ap)) for ax, ap in expo)
                if len(expo) != num_modes:
                    raise ValueError(
                        f"term spans {len(expo)} modes, expected {num_modes}"
                    )
                if any(ax < 0 or ap < 0 for ax, ap in expo):
                    raise ValueError(f"negative exponent in term {expo}")
                c = ComplexRational.coerce(coeff)
                if c:
                    acc = clean.get(expo)
                    c = c if acc is None else acc + c
                    if c:
                        clean[expo] = c
                    else:
                        clean.pop(expo, None)
        object.__setattr__(self, "num_modes", num_modes)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("WeylPolynomial is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, num_modes: int) -> "WeylPolynomial":
        return cls(num_modes)

    @classmethod
    def scalar(cls, num_modes: int, value) -> "WeylPolynomial":
        return cls(num_modes, {((0, 0),) * num_modes: ComplexRational.coerce(value)})

    @classmethod
    def x(cls, num_modes: int, mode: int) -> "WeylPolynomial":
        return cls._single(num_modes, mode, (1, 0))

    @classmethod
    def p(cls, num_modes: int, mode: int) -> "WeylPolynomial":
        return cls._single(num_modes, mode, (0, 1))

    @classmethod
    def _single(cls, num_modes: int, mode: int, pair: tuple[int, int]) -> "WeylPolynomial":
        if not 0 <= mode < num_modes:
            raise ValueError(f"mode {mode} out of range for {num_modes} modes")
        expo = tuple(pair if j == mode else (0, 0) for j in range(num_modes))
        return cls(num_modes, {expo: ONE})

    @classmethod
    def from_position_polynomial(cls, poly: PhasePolynomial, num_modes: int | None = None) -> "WeylPolynomial":
        """Promote a commuting polynomial to operators, variable i -> X_i."""
        m = poly.num_vars if num_modes is None else num_modes
        if m < poly.num_vars:
            raise ValueError("num_modes smaller than the polynomial's variable count")
        terms = {}
        for expo, coeff in poly.terms.items():
            key = tuple((expo[i] if i < len(expo) else 0, 0) for i in range(m))
            terms[key] = ComplexRational(coeff)
        return cls(m, terms)

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(ax + ap for ax, ap in expo) for expo in self.terms)

    def max_single_mode_degree(self) -> int:
        if not self.terms:
            return 0
        return max(max(ax + ap for ax, ap in expo) for expo in self.terms)

    def _check_compatible(self, other: "WeylPolynomial") -> None:
        if self.num_modes != other.num_modes:
            raise ValueError(
                f"mode-count mismatch: {self.num_modes} vs {other.num_modes}"
            )

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "WeylPolynomial") -> "WeylPolynomial":
        if not isinstance(other, WeylPolynomial):
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
        return WeylPolynomial(self.num_modes, terms)

    def __neg__(self) -> "WeylPolynomial":
        return WeylPolynomial(self.num_modes, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "WeylPolynomial") -> "WeylPolynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, WeylPolynomial):
            return weyl_mul(self, other)
        if isinstance(other, (int, Fraction, ComplexRational)):
            c = ComplexRational.coerce(other)
            if not c:
                return WeylPolynomial.zero(self.num_modes)
            return WeylPolynomial(
                self.num_modes, {e: c * v for e, v in self.terms.items()}
            )
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, ComplexRational)):
            return self.__mul__(other)
        return NotImplemented

    def __pow__(self, exponent: int) -> "WeylPolynomial":
        if exponent < 0:
            raise ValueError("negative operator powers are not defined")
        out = WeylPolynomial.scalar(self.num_modes, 1)
        for _ in range(exponent):
            out = weyl_mul(out, self)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeylPolynomial):
            return NotImplemented
        return self.num_modes == other.num_modes and self.terms == other.terms

    def __hash__(self):
        return hash((self.num_modes, frozenset(self.terms.items())))

    def adjoint(self) -> "WeylPolynomial":
        """Hermitian adjoint: conjugate coefficients, reverse operator order,
        then re-normal-order (X and P are self-adjoint)."""
        out = WeylPolynomial.zero(self.num_modes)
        for expo, coeff in self.terms.items():
            term = WeylPolynomial.scalar(self.num_modes, coeff.conjugate())
            for mode, (ax, ap) in enumerate(expo):
                if ap:
                    term = weyl_mul(term, WeylPolynomial.p(self.num_modes, mode) ** ap)
                if ax:
                    term = weyl_mul(term, WeylPolynomial.x(self.num_modes, mode) ** ax)
            out = out + term
        return out

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for expo, coeff in sorted(
            self.terms.items(), key=lambda kv: (sum(a + b for a, b in kv[0]), kv[0]), reverse=True
        ):
            factors = []
            for mode, (ax, ap) in enumerate(expo):
                if ax:
                    factors.append(f"X{mode}" + (f"^{ax}" if ax > 1 else ""))
                if ap:
                    factors.append(f"P{mode}" + (f"^{ap}" if ap > 1 else ""))
            body = " ".join(factors) if factors else "1"
            pieces.append(f"({coeff}) {body}")
        return " + ".join(pieces)


def weyl_mul(a: WeylPolynomial, b: WeylPolynomial) -> WeylPolynomial:
    """Normal-ordered operator product of two Weyl polynomials."""
    a._check_compatible(b)
    result: dict[ModeExponents, ComplexRational] = {}
    for e1, c1 in a.terms.items():
        for e2, c2 in b.terms.items():
            partial: list[tuple[list[tuple[int, int]], ComplexRational]] = [([], c1 * c2)]
            for (ax1, ap1), (ax2, ap2) in zip(e1, e2):
                options = _reorder_px(ax2, ap1)
                extended = []
                for prefix, coeff in partial:
                    for (xm, pm), factor in options:
                        extended.append(
                            (prefix + [(ax1 + xm, pm + ap2)], coeff * factor)
                        )
                partial = extended
            for expo_list, coeff in partial:
                if not coeff:
                    continue
                key = tuple(expo_list)
                acc = result.get(key)
                val = coeff if acc is None else acc + coeff
                if val:
                    result[key] = val
                else:
                    result.pop(key, None)
    return WeylPolynomial(a.num_modes, result)


def commutator(a: WeylPolynomial, b: WeylPolynomial) -> WeylPolynomial:
    """[a, b] = ab - ba, normal-ordered."""
    return weyl_mul(a, b) - weyl_mul(b, a)


class NonTerminatingAdjointError(RuntimeError):
    """The iterated commutator series did not vanish within max_depth."""


def adjoint_series(
    a: WeylPolynomial, b: WeylPolynomial, max_depth: int | None = None
) -> tuple[WeylPolynomial, int]:
    """Exact conjugation e^a b e^(-a) via the terminating commutator series.

    Returns (result, depth) where depth is the index of the last nonzero
    iterated commutator. Raises NonTerminatingAdjointError if the series
    has not vanished after max_depth commutators; nothing is silently
    truncated. The default depth bound covers every cascade in which the
    repeated commutator strictly lowers the degree of b.
    """
    a._check_compatible(b)
    if max_depth is None:
        max_depth = max(b.degree(), 0) * max(a.max_single_mode_degree(), 1) + 2
    result = b
    nested = b
    factorial = 1
    depth = 0
    for k in range(1, max_depth + 1):
        nested = commutator(a, nested)
        if nested.is_zero:
            return result, depth
        factorial *= k
        result = result + nested * Fraction(1, factorial)
        depth = k
    raise NonTerminatingAdjointError(
        f"commutator series still nonzero after {max_depth} iterations"
    )


# -- decomposition proofs ----------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    """Outcome of one generator-level conjugation identity."""

    v: tuple[int, int, int]
    weights: tuple[int, int, int, int]
    depth: int
    passed: bool


@dataclass
class DecompositionProof:
    """Proof report for lowering exp(-i s P_1 X_2^a2 X_3^a3 X_4^a4).

    Each check conjugates C(v) X_1^a by the controlled-shift unitaries with
    weights h and confirms the result is C(v) (sum_i h_i X_i)^a; the final
    flag records that the expansion terms sum back to the target monomial.
    """

    exponents: tuple[int, int, int]
    checks: list[IdentityCheck] = field(default_factory=list)
    sum_matches_target: bool = False

    @property
    def passed(self) -> bool:
        return self.sum_matches_target and all(c.passed for c in self.checks)

    def to_text(self) -> str:
        a = 1 + sum(self.exponents)
        lines = [
            f"generator exponents (a2,a3,a4)={self.exponents} degree a={a}: "
            f"{len(self.checks)} expansion terms"
        ]
        for c in self.checks:
            lines.append(
                f"  v={c.v} h={c.weights} depth={c.depth} "
                f"{'PASS' if c.passed else 'FAIL'}"
            )
        lines.append(
            f"  sum over v reproduces X1 X2^{self.exponents[0]} "
            f"X3^{self.exponents[1]} X4^{self.exponents[2]}: "
            f"{'PASS' if self.sum_matches_target else 'FAIL'}"
        )
        return "\n".join(lines)


def verify_key_decomposition(a2: int, a3: int, a4: int) -> DecompositionProof:
    """Prove the controlled-shift lowering of one generator, exactly.

    Works at the generator (Lie-algebra) level: conjugating a Hermitian
    generator inside an exponential equals exponentiating the conjugated
    generator, so the unitary identity reduces to a polynomial operator
    identity decidable in rational arithmetic.
    """
    a = 1 + a2 + a3 + a4
    if not 2 <= a <= 4:
        raise ValueError(f"generator degree {a} outside the supported range 2..4")
    if min(a2, a3, a4) < 0:
        raise ValueError("exponents must be nonnegative")
    m = 4
    proof = DecompositionProof(exponents=(a2, a3, a4))
    x = [WeylPolynomial.x(m, j) for j in range(m)]
    p0 = WeylPolynomial.p(m, 0)
    total = WeylPolynomial.zero(m)
    for term in expansion_coefficients(a2, a3, a4):
        h = term.weights
        weighted = WeylPolynomial.zero(m)
        for i, hi in enumerate(h):
            if hi:
                weighted = weighted + x[i] * Fraction(hi)
        target = (weighted ** a) * term.coefficient
        conjugated = (x[0] ** a) * term.coefficient
        depth = 0
        for i in (1, 2, 3):
            if h[i] == 0:
                continue
            generator = (x[i] * p0) * (I * Fraction(h[i]))
            conjugated, d = adjoint_series(generator, conjugated)
            depth = max(depth, d)
        proof.checks.append(
            IdentityCheck(
                v=term.v, weights=h, depth=depth, passed=conjugated == target
            )
        )
        total = total + target
    monomial = x[0]
    for i, e in zip((1, 2, 3), (a2, a3, a4)):
        monomial = monomial * (x[i] ** e)
    proof.sum_matches_target = total == monomial
    return proof


def verify_liouvillian_product_rule(
    h: PhasePolynomial, f: PhasePolynomial, g: PhasePolynomial
) -> bool:
    """Check L[f g] = L[f] g + f L[g] exactly, with L f = {h, f}.

    This is the derivation property that lets the squared modulus of a
    transported wave function solve the Liouville equation.
    """
    lhs = poisson_bracket(h, f * g)
    rhs = poisson_bracket(h, f) * g + f * poisson_bracket(h, g)
    return lhs == rhs
