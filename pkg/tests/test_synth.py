import math
from fractions import Fraction

import pytest

from kvnsim.expansion import (
    ExpansionTerm,
    admissible_exponent_triples,
    expansion_coefficients,
)
from kvnsim.kvn import KvNTerm, build_kvn, validate_separation
from kvnsim.phasepoly import PhasePolynomial, parse_polynomial
from kvnsim.synth import (
    Gate,
    GateKind,
    GateSequence,
    cx_via_cz,
    gate_count_bound,
    parse_gates,
    serialize_gates,
    synthesize_term,
    trotter_circuit,
)


def expansion_sum(a2, a3, a4):
    """Polynomial-expansion oracle: sum C(v) (sum_i h_i x_i)^a exactly."""
    a = 1 + a2 + a3 + a4
    x = [PhasePolynomial.variable(4, i) for i in range(4)]
    total = PhasePolynomial.zero(4)
    for term in expansion_coefficients(a2, a3, a4):
        linear = PhasePolynomial.zero(4)
        for i, h in enumerate(term.weights):
            if h:
                linear = linear + Fraction(h) * x[i]
        total = total + term.coefficient * linear ** a
    return total


class TestExpansionCoefficients:
    def test_bilinear_case(self):
        terms = expansion_coefficients(1, 0, 0)
        assert [(t.coefficient, t.weights[:2]) for t in terms] == [
            (Fraction(1, 4), (1, 1)),
            (Fraction(-1, 4), (1, -1)),
        ]
        x1, x2 = (PhasePolynomial.variable(4, i) for i in (0, 1))
        assert expansion_sum(1, 0, 0) == x1 * x2

    def test_squared_control_case(self):
        terms = expansion_coefficients(2, 0, 0)
        assert [(t.coefficient, t.weights[1]) for t in terms] == [
            (Fraction(1, 24), 2),
            (Fraction(-1, 12), 0),
            (Fraction(1, 24), -2),
        ]

    def test_two_control_cubic_case(self):
        terms = expansion_coefficients(1, 1, 0)
        assert len(terms) == 4
        assert all(abs(t.coefficient) == Fraction(1, 24) for t in terms)
        x1, x2, x3 = (PhasePolynomial.variable(4, i) for i in (0, 1, 2))
        assert expansion_sum(1, 1, 0) == x1 * x2 * x3

    @pytest.mark.parametrize("triple", admissible_exponent_triples())
    def test_identity_exact_for_all_catalog_triples(self, triple):
        a2, a3, a4 = triple
        x = [PhasePolynomial.variable(4, i) for i in range(4)]
        target = x[0] * x[1] ** a2 * x[2] ** a3 * x[3] ** a4
        assert expansion_sum(a2, a3, a4) == target

    def test_coefficient_formula(self):
        # C(v) = (-1)^sum(v) / (2^(a-1) a!) * prod binom(a_i, v_i)
        for t in expansion_coefficients(2, 1, 0):
            v2, v3, v4 = t.v
            a = 4
            expected = (
                Fraction(1, 2 ** (a - 1) * math.factorial(a))
                * (-1) ** (v2 + v3 + v4)
                * math.comb(2, v2)
                * math.comb(1, v3)
                * math.comb(0, v4)
            )
            assert t.coefficient == expected
            assert t.weights == (1, 2 - 2 * v2, 1 - 2 * v3, -2 * v4)

    def test_out_of_range_degree(self):
        with pytest.raises(ValueError, match="degree"):
            expansion_coefficients(4, 0, 0)
        with pytest.raises(ValueError, match="degree"):
            expansion_coefficients(0, 0, 0)

    def test_lexicographic_order(self):
        vs = [t.v for t in expansion_coefficients(1, 1, 1)]
        assert vs == sorted(vs)

    def test_weights_require_leading_one(self):
        with pytest.raises(ValueError):
            ExpansionTerm(v=(0, 0, 0), coefficient=Fraction(1), weights=(2, 0, 0, 0))


class TestGateValidation:
    def test_controlled_gate_needs_distinct_modes(self):
        with pytest.raises(ValueError, match="distinct"):
            Gate(GateKind.CONTROLLED_Z, (1, 1), 0.5)

    def test_fourier_takes_no_param(self):
        with pytest.raises(ValueError, match="no parameter"):
            Gate(GateKind.FOURIER, (0,), 1.0)

    def test_param_must_be_finite(self):
        with pytest.raises(ValueError, match="finite"):
            Gate(GateKind.CONTROLLED_X, (0, 1), float("inf"))

    def test_sequence_mode_bound(self):
        with pytest.raises(ValueError, match="exceeds"):
            GateSequence(2, (Gate(GateKind.MOMENTUM_DISPLACEMENT, (2,), 1.0),))

    def test_inverse_negates_params_and_swaps_fourier(self):
        g = Gate(GateKind.CUBIC_PHASE, (0,), 0.3)
        assert g.inverse().param == -0.3
        assert Gate(GateKind.FOURIER, (0,)).inverse().kind is GateKind.FOURIER_INVERSE
        seq = GateSequence(
            1, (Gate(GateKind.FOURIER, (0,)), Gate(GateKind.MOMENTUM_DISPLACEMENT, (0,), 1.0))
        )
        inv = seq.inverse()
        assert [g.kind for g in inv] == [
            GateKind.MOMENTUM_DISPLACEMENT,
            GateKind.FOURIER_INVERSE,
        ]


class TestSynthesizeTerm:
    def test_harmonic_term_is_single_cx(self):
        term = KvNTerm(factor=PhasePolynomial.variable(2, 1), mode=0, sign=1)
        seq = synthesize_term(term, 0.25)
        assert len(seq) == 1
        (gate,) = seq
        assert gate.kind is GateKind.CONTROLLED_X
        assert gate.modes == (1, 0)
        assert gate.param == 0.25

    def test_sign_and_coefficient_fold_into_strength(self):
        term = KvNTerm(
            factor=PhasePolynomial(2, {(1, 0): Fraction(3, 2)}), mode=1, sign=-1
        )
        (gate,) = synthesize_term(term, 0.4)
        assert gate.param == pytest.approx(-0.6)

    def test_zero_strength_gives_empty_sequence(self):
        term = KvNTerm(factor=PhasePolynomial.variable(2, 1), mode=0, sign=1)
        assert len(synthesize_term(term, 0.0)) == 0

    def test_constant_factor_uses_fourier_conjugated_displacement(self):
        term = KvNTerm(factor=PhasePolynomial.constant(2, 1), mode=0, sign=1)
        seq = synthesize_term(term, 0.7)
        kinds = [g.kind for g in seq]
        assert kinds == [
            GateKind.FOURIER,
            GateKind.MOMENTUM_DISPLACEMENT,
            GateKind.FOURIER_INVERSE,
        ]
        assert seq.gates[1].param == 0.7

    def test_cubic_factor_structure(self):
        # X^3 factor: Fourier pair, four expansion blocks, quartic inner gates
        term = KvNTerm(factor=PhasePolynomial(2, {(3, 0): 1}), mode=1, sign=1)
        seq = synthesize_term(term, 0.1)
        kinds = [g.kind for g in seq]
        assert kinds[0] is GateKind.FOURIER
        assert kinds[-1] is GateKind.FOURIER_INVERSE
        assert kinds.count(GateKind.QUARTIC_PHASE) == 4
        assert kinds.count(GateKind.CONTROLLED_X) == 8
        assert len(seq) == 14

    def test_squared_factor_skips_zero_weight_conjugation(self):
        # X^2 factor: middle expansion term has h2 = 0, no CX around it
        term = KvNTerm(factor=PhasePolynomial(2, {(2, 0): 1}), mode=1, sign=1)
        seq = synthesize_term(term, 0.2)
        kinds = [g.kind for g in seq]
        assert kinds.count(GateKind.CUBIC_PHASE) == 3
        assert kinds.count(GateKind.CONTROLLED_X) == 4
        assert len(seq) == 9

    def test_inner_gate_strength_normalizations(self):
        # quadratic inner gate: P(s) = exp(i s X^2/2) needs s = 2 u C(v)
        term = KvNTerm(factor=PhasePolynomial.variable(2, 0), mode=1, sign=1)
        # degree-1 goes straight to CX; use a two-control quadratic instead
        term = KvNTerm(
            factor=PhasePolynomial(4, {(1, 1, 0, 0): 1}), mode=3, sign=1
        )
        seq = synthesize_term(term, 1.0)
        quad = [g for g in seq if g.kind is GateKind.QUADRATIC_PHASE]
        # a = 3 for x*y factor? no: degree 2 factor -> a = 3 (cubic inner)
        assert not quad
        cubic = [g for g in seq if g.kind is GateKind.CUBIC_PHASE]
        assert cubic and all(
            g.param == pytest.approx(3.0 * float(Fraction(1, 24)) * s)
            for g, s in zip(cubic, (1.0, -1.0, -1.0, 1.0))
        )

    def test_multi_monomial_factor_concatenates(self):
        # factor x1 + (1/10) x1^3 on mode 1: one CX plus the cubic block
        h = validate_separation(
            parse_polynomial("1/2 * x2^2 + 1/2 * x1^2 + 1/40 * x1^4", 2), 1
        )
        term = next(t for t in build_kvn(h).terms if t.mode == 1 and t.factor.degree() == 1)
        assert len(synthesize_term(term, 0.3)) == 1

    def test_gate_count_bound_holds(self):
        cases = [
            PhasePolynomial(2, {(0, 1): 1}),
            PhasePolynomial(2, {(0, 2): 1}),
            PhasePolynomial(2, {(0, 3): 1}),
            PhasePolynomial(4, {(0, 0, 1, 1): 1}),
            PhasePolynomial(4, {(0, 0, 2, 1): 1}),
            PhasePolynomial(4, {(0, 1, 1, 1): 1}),
        ]
        for factor in cases:
            term = KvNTerm(factor=factor, mode=0, sign=1)
            assert len(synthesize_term(term, 0.37)) <= gate_count_bound(term)


class TestCxViaCz:
    def test_same_mode_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            cx_via_cz(1, 1, 0.5, 2)

    def test_uses_only_cz_and_fourier(self):
        seq = cx_via_cz(0, 1, 0.8, 2)
        assert {g.kind for g in seq} == {
            GateKind.FOURIER,
            GateKind.CONTROLLED_Z,
            GateKind.FOURIER_INVERSE,
        }
        assert all(g.modes[-1] == 1 for g in seq)


class TestTrotterCircuit:
    def ho_kvn(self):
        return build_kvn(
            validate_separation(parse_polynomial("1/2 * x2^2 + 1/2 * x1^2", 2), 1)
        )

    def test_zero_time_empty(self):
        assert len(trotter_circuit(self.ho_kvn(), 0.0, 10, 1)) == 0

    def test_first_order_step_count(self):
        k = self.ho_kvn()
        circ = trotter_circuit(k, 1.0, 5, 1)
        assert len(circ) == 10  # two CX per step
        params = {g.param for g in circ}
        assert params == {0.2, -0.2}

    def test_second_order_palindrome(self):
        k = self.ho_kvn()
        circ = trotter_circuit(k, 1.0, 1, 2)
        kinds_modes = [(g.kind, g.modes) for g in circ]
        assert kinds_modes == list(reversed(kinds_modes))
        assert all(abs(g.param) == pytest.approx(0.5, rel=1e-12) for g in circ)

    def test_invalid_arguments(self):
        k = self.ho_kvn()
        with pytest.raises(ValueError, match="finite"):
            trotter_circuit(k, float("nan"), 5, 1)
        with pytest.raises(ValueError, match="n_steps"):
            trotter_circuit(k, 1.0, 0, 1)
        with pytest.raises(ValueError, match="order"):
            trotter_circuit(k, 1.0, 5, 3)


class TestSerialization:
    def round_trip(self, seq):
        text = serialize_gates(seq)
        back = parse_gates(text, seq.num_modes)
        assert back == seq
        assert serialize_gates(back) == text

    def test_round_trip_mixed_sequence(self):
        seq = GateSequence(
            3,
            (
                Gate(GateKind.FOURIER, (2,)),
                Gate(GateKind.CONTROLLED_X, (0, 2), 0.1 + 0.2),  # non-representable sum
                Gate(GateKind.QUARTIC_PHASE, (2,), -1.0 / 3.0),
                Gate(GateKind.FOURIER_INVERSE, (2,)),
            ),
        )
        self.round_trip(seq)

    def test_round_trip_synthesized_circuit(self):
        h = validate_separation(
            parse_polynomial("1/2 * x2^2 + 1/2 * x1^2 + 1/40 * x1^4", 2), 1
        )
        self.round_trip(trotter_circuit(build_kvn(h), 0.7, 3, 2))

    def test_format_shape(self):
        text = serialize_gates(
            GateSequence(2, (Gate(GateKind.CONTROLLED_X, (0, 1), 0.5),))
        )
        assert text == "CX 0,1 0.5"
        assert serialize_gates(GateSequence(1, (Gate(GateKind.FOURIER, (0,)),))) == "F 0"

    def test_parse_infers_mode_count(self):
        seq = parse_gates("CX 0,3 1.0")
        assert seq.num_modes == 4

    def test_parse_rejects_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown gate kind"):
            parse_gates("XX 0 1.0")

    def test_parse_rejects_malformed_line(self):
        with pytest.raises(ValueError, match="malformed"):
            parse_gates("CX 0,1 1.0 extra")
