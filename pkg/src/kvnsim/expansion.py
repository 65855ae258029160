"""Monomial expansion of X_1 X_2^a2 X_3^a3 X_4^a4 into powers of linear forms.

The identity

    x1 x2^a2 x3^a3 x4^a4
        = sum_{v2=0..a2} sum_{v3=0..a3} sum_{v4=0..a4}
              C(v) (x1 + h2 x2 + h3 x3 + h4 x4)^a

with a = 1 + a2 + a3 + a4, h_i = a_i - 2 v_i and

    C(v) = (-1)^(v2+v3+v4) / (2^(a-1) a!) * binom(a2,v2) binom(a3,v3) binom(a4,v4)

turns a mixed controlled-shift generator into a sum of commuting powers,
each of which lowers to a single-mode phase gate conjugated by
controlled-X gates. Both the symbolic prover and the circuit synthesizer
consume this enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class ExpansionTerm:
    """One summand: coefficient C(v) and integer weights (h1, h2, h3, h4)."""

    v: tuple[int, int, int]
    coefficient: Fraction
    weights: tuple[int, int, int, int]

    def __post_init__(self):
        if self.weights[0] != 1:
            raise ValueError("the first weight is 1 by construction")


def expansion_coefficients(a2: int, a3: int, a4: int) -> list[ExpansionTerm]:
    """Enumerate the expansion terms for exponents (a2, a3, a4), in
    lexicographic order of v. The generator degree a = 1 + a2 + a3 + a4
    must lie in 2..4."""
    if min(a2, a3, a4) < 0:
        raise ValueError("exponents must be nonnegative")
    a = 1 + a2 + a3 + a4
    if not 2 <= a <= 4:
        raise ValueError(f"generator degree {a} outside the supported range 2..4")
    base = Fraction(1, 2 ** (a - 1) * math.factorial(a))
    out: list[ExpansionTerm] = []
    for v2 in range(a2 + 1):
        for v3 in range(a3 + 1):
            for v4 in range(a4 + 1):
                sign = -1 if (v2 + v3 + v4) % 2 else 1
                coeff = (
                    base
                    * sign
                    * math.comb(a2, v2)
                    * math.comb(a3, v3)
                    * math.comb(a4, v4)
                )
                out.append(
                    ExpansionTerm(
                        v=(v2, v3, v4),
                        coefficient=coeff,
                        weights=(1, a2 - 2 * v2, a3 - 2 * v3, a4 - 2 * v4),
                    )
                )
    return out


def admissible_exponent_triples() -> list[tuple[int, int, int]]:
    """Canonical (nonincreasing) exponent triples for generator degrees
    2 through 4; permutations are equivalent up to mode relabeling."""
    return [
        (1, 0, 0),
        (2, 0, 0),
        (1, 1, 0),
        (3, 0, 0),
        (2, 1, 0),
        (1, 1, 1),
    ]
