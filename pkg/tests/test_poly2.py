import numpy as np
import pytest

from newtonplane.errors import DegeneratePencil, ParseError
from newtonplane.poly2 import (
    AffineMap2,
    PlanarMap,
    Poly2,
    format_poly,
    parse_map,
    parse_poly,
    pencil_type,
)


def P(text):
    return parse_poly(text)


def random_poly(rng, max_deg=3):
    terms = {}
    for _ in range(rng.integers(1, 6)):
        i = int(rng.integers(0, max_deg + 1))
        j = int(rng.integers(0, max_deg + 1 - i))
        terms[(i, j)] = float(rng.uniform(-3, 3))
    return Poly2(terms)


def random_affine(rng, invertible=True):
    while True:
        a = rng.uniform(-2, 2, size=(2, 2))
        if not invertible or abs(np.linalg.det(a)) > 0.2:
            break
    return AffineMap2(a, rng.uniform(-2, 2, size=2))


class TestEval:
    def test_root_of_first_parabolic_component(self):
        assert P("y - x^2").eval_at((1.0, 1.0)) == 0.0

    def test_hyperbola_point(self):
        assert P("xy - 1").eval_at((2.0, 0.5)) == 0.0

    def test_quartic_component_root(self):
        # x^4 - 3x^2 + xy + 2 vanishes at (1, 0)
        assert P("x^4 - 3x^2 + xy + 2").eval_at((1.0, 0.0)) == 0.0

    def test_array_broadcast(self):
        p = P("x^2 + y")
        x = np.array([0.0, 1.0, 2.0])
        np.testing.assert_allclose(p(x, 1.0), [1.0, 2.0, 5.0])

    def test_nan_propagates(self):
        assert np.isnan(P("x+y").eval_at((np.nan, 0.0)))


class TestPartial:
    def test_parabola(self):
        assert P("y - x^2").partial("x") == P("-2x")

    def test_hyperbola(self):
        assert P("xy - 1").partial("y") == P("x")

    def test_cubic_denominator(self):
        # symbolic differentiation oracle, expanded by hand
        assert P("x^3 + 3xy - x").partial("x") == P("3x^2 + 3y - 1")

    def test_mixed_partials_commute_exactly(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            terms = {(int(rng.integers(0, 4)), int(rng.integers(0, 4))):
                     float(rng.integers(-5, 6)) for _ in range(5)}
            p = Poly2(terms)
            assert p.partial("x").partial("y") == p.partial("y").partial("x")


class TestComposeAffine:
    def test_identity(self):
        p = P("y - x^2")
        assert p.compose_affine(AffineMap2.identity()) == p

    def test_translation(self):
        psi = AffineMap2.translation((3.0, 0.0))
        assert P("x").compose_affine(psi) == P("x + 3")

    def test_axis_swap(self):
        assert P("y - x^2").compose_affine(AffineMap2.swap_axes()) == P("x - y^2")

    def test_degree_preserved_under_invertible_change(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            p = random_poly(rng)
            psi = random_affine(rng)
            assert p.compose_affine(psi).degree() == p.degree()

    def test_composition_associates_with_map_composition(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            p = random_poly(rng)
            psi1, psi2 = random_affine(rng), random_affine(rng)
            lhs = p.compose_affine(psi1).compose_affine(psi2)
            rhs = p.compose_affine(psi1.compose(psi2))
            assert lhs.allclose(rhs, tol=1e-10)


class TestArithmeticProperties:
    def test_product_evaluation(self):
        rng = np.random.default_rng(19)
        for _ in range(100):
            p, q = random_poly(rng), random_poly(rng)
            x, y = rng.uniform(-2, 2, size=2)
            lhs = (p * q)(x, y)
            rhs = p(x, y) * q(x, y)
            assert abs(lhs - rhs) <= 1e-9 * (1.0 + abs(rhs))

    def test_sum_evaluation_near_machine(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            p, q = random_poly(rng), random_poly(rng)
            x, y = rng.uniform(-1, 1, size=2)
            lhs = (p + q)(x, y)
            rhs = p(x, y) + q(x, y)
            assert abs(lhs - rhs) <= 8 * np.finfo(float).eps * (1.0 + abs(rhs))

    def test_canonical_no_zero_terms(self):
        p = Poly2({(1, 0): 1.0, (0, 0): 0.0})
        assert (0, 0) not in p.terms
        q = p - p
        assert q.is_zero() and q.degree() == -1


class TestAffineMap:
    def test_group_laws(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            a, b, c = (random_affine(rng) for _ in range(3))
            z = rng.uniform(-2, 2, size=2)
            lhs = a.compose(b).compose(c)(z)
            rhs = a.compose(b.compose(c))(z)
            np.testing.assert_allclose(lhs, rhs, atol=1e-12, rtol=1e-12)
            np.testing.assert_allclose(a.compose(a.inverse())(z), z,
                                       atol=1e-12)

    def test_non_invertible_rejected(self):
        m = AffineMap2(np.array([[1.0, 2.0], [2.0, 4.0]]), np.zeros(2))
        assert not m.is_invertible()
        with pytest.raises(ValueError):
            m.inverse()


class TestPencilType:
    def test_cubic_with_linear_component(self):
        f = parse_map("x^3 + 3xy - x; y")
        assert pencil_type(f) == (3, 1)

    def test_two_parabolic_components(self):
        f = parse_map("y - x^2; x - y^2")
        assert pencil_type(f) == (2, 2)

    def test_dependent_components(self):
        with pytest.raises(DegeneratePencil):
            pencil_type(parse_map("x^2; 2x^2"))

    def test_hidden_degree_drop(self):
        # q - p has degree 1
        f = parse_map("x^2 + y; x^2 - y")
        assert pencil_type(f) == (2, 1)

    def test_drop_to_constant(self):
        f = parse_map("x^2 + 1; x^2")
        assert pencil_type(f) == (2, 0)

    def test_hi_is_max_degree(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            f = PlanarMap(random_poly(rng), random_poly(rng))
            try:
                t = pencil_type(f)
            except DegeneratePencil:
                continue
            assert t.hi == max(f.p.degree(), f.q.degree())
            assert t.hi >= t.lo >= 0


class TestTextForm:
    def test_round_trip(self):
        rng = np.random.default_rng(41)
        for _ in range(30):
            p = random_poly(rng)
            assert parse_poly(format_poly(p)).allclose(p, tol=1e-12)

    def test_variable_order_and_caret(self):
        assert parse_poly("2x^2y") == parse_poly("2yx^2")
        assert parse_poly("xyx") == parse_poly("x^2y")

    def test_implicit_coefficient(self):
        assert parse_poly("-x") == Poly2({(1, 0): -1.0})
        assert parse_poly("+4") == Poly2.const(4.0)

    def test_rejects_garbage(self):
        for bad in ("", "x+", "z^2", "x^^2", "1..2x"):
            with pytest.raises(ParseError):
                parse_poly(bad)

    def test_map_spec(self):
        f = parse_map("y-x^2;x-y^2")
        assert f.p == P("y - x^2")
        with pytest.raises(ParseError):
            parse_map("y-x^2")
