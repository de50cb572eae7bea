import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ltladder.errors import NoSignChange
from ltladder.numerics import (
    Grid,
    GridFunction,
    bisect_root,
    cumulative_integrate,
    derivative,
    differentiate,
    integrate,
    restrict,
    simpson,
)


def sech2(x):
    return 1.0 / np.cosh(x) ** 2


class TestGrid:
    def test_points_are_exact_multiples(self):
        g = Grid(-1.0, 1.0, 201)
        assert g.h == pytest.approx(0.01)
        np.testing.assert_array_equal(g.points, -1.0 + g.h * np.arange(201))

    @pytest.mark.parametrize("args", [(1.0, 0.0, 10), (0.0, 0.0, 10), (0.0, 1.0, 2), (0.0, 1.0, 3.5)])
    def test_rejects_bad_grids(self, args):
        with pytest.raises(ValueError):
            Grid(*args)

    def test_points_read_only(self):
        with pytest.raises(ValueError):
            Grid(0.0, 1.0, 5).points[0] = 3.0

    def test_sub_grid_round_trip(self):
        g = Grid(-20.0, 20.0, 4001)
        s = g.sub(100, 300)
        assert s.offset_in(g) == 100
        assert s.h == pytest.approx(g.h)
        f = GridFunction.from_callable(g, np.sin)
        np.testing.assert_array_equal(restrict(f, s).values, f.values[100:301])


class TestGridFunction:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            GridFunction(Grid(0.0, 1.0, 3), [0.0, np.nan, 1.0])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            GridFunction(Grid(0.0, 1.0, 3), [0.0, 1.0])

    def test_arithmetic_needs_same_grid(self):
        a = GridFunction(Grid(0.0, 1.0, 3), [1.0, 2.0, 3.0])
        b = GridFunction(Grid(0.0, 2.0, 3), [1.0, 2.0, 3.0])
        np.testing.assert_array_equal((2 * a - a).values, a.values)
        with pytest.raises(ValueError):
            a + b


class TestIntegrate:
    def test_constant(self):
        g = Grid(0.0, 1.0, 101)
        assert integrate(GridFunction(g, np.ones(101))) == 1.0

    def test_sech2(self):
        f = GridFunction.from_callable(Grid(-20.0, 20.0, 4001), sech2)
        assert integrate(f) == pytest.approx(2.0, abs=1e-8)

    def test_sech4(self):
        f = GridFunction.from_callable(Grid(-20.0, 20.0, 4001), lambda x: sech2(x) ** 2)
        assert integrate(f) == pytest.approx(4.0 / 3.0, abs=1e-8)

    @pytest.mark.parametrize("n", [2, 3, 4, 100, 101])
    def test_odd_and_even_panel_counts(self, n):
        # odd panel counts close with a trapezoid panel; linear data stays exact
        x = np.linspace(0.0, 2.0, n)
        assert simpson(3.0 * x + 1.0, x[1] - x[0]) == pytest.approx(8.0, rel=1e-13)

    def test_simpson_order(self):
        errs = []
        for n in (41, 81, 161):
            f = GridFunction.from_callable(Grid(0.0, np.pi, n), np.sin)
            errs.append(abs(integrate(f) - 2.0))
        assert errs[0] / errs[1] > 14 and errs[1] / errs[2] > 14

    @settings(max_examples=50, deadline=None)
    @given(
        a=st.floats(-10, 10),
        b=st.floats(-10, 10),
        n=st.integers(3, 400),
    )
    def test_linear(self, a, b, n):
        g = Grid(-3.0, 2.0, n)
        f = GridFunction.from_callable(g, np.exp)
        h = GridFunction.from_callable(g, np.cos)
        lhs = integrate(a * f + b * h)
        rhs = a * integrate(f) + b * integrate(h)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


class TestDifferentiate:
    def test_quadratic(self):
        g = Grid(-1.0, 1.0, 201)
        d = differentiate(GridFunction.from_callable(g, lambda x: x**2))
        np.testing.assert_allclose(d.values[1:-1], 2 * g.points[1:-1], atol=1e-6)

    def test_tanh(self):
        g = Grid(-10.0, 10.0, 2001)
        d = differentiate(GridFunction.from_callable(g, np.tanh))
        np.testing.assert_allclose(d.values, sech2(g.points), atol=1e-5)

    def test_constant(self):
        g = Grid(0.0, 5.0, 11)
        d = differentiate(GridFunction(g, np.full(11, 7.0)))
        np.testing.assert_allclose(d.values, 0.0, atol=1e-12)

    def test_fourth_order_stencil(self):
        g = Grid(-10.0, 10.0, 2001)
        d = derivative(np.tanh(g.points), g.h, order=4)
        np.testing.assert_allclose(d, sech2(g.points), atol=1e-8)
        with pytest.raises(ValueError):
            derivative(np.ones(10), 0.1, order=3)

    def test_inverts_running_integral(self):
        g = Grid(-5.0, 5.0, 1001)
        f = GridFunction.from_callable(g, lambda x: np.exp(-(x**2)))
        back = differentiate(cumulative_integrate(f))
        np.testing.assert_allclose(back.values[1:-1], f.values[1:-1], atol=10 * g.h**2)


class TestBisect:
    def test_sqrt2(self):
        assert bisect_root(lambda x: x * x - 2.0, 0.0, 2.0, 1e-12) == pytest.approx(np.sqrt(2.0), abs=1e-12)

    def test_odd_function(self):
        assert bisect_root(lambda x: x, -1.0, 1.0) == 0.0

    def test_no_sign_change(self):
        with pytest.raises(NoSignChange):
            bisect_root(lambda x: x - 3.0, 0.0, 1.0)

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            bisect_root(lambda x: x, -1.0, 1.0, tol=0.0)

    @settings(max_examples=50, deadline=None)
    @given(root=st.floats(-0.9, 0.9), span=st.floats(0.05, 1.0))
    def test_orientation_independent(self, root, span):
        fn = lambda x: np.tanh(x - root)  # noqa: E731
        lo, hi = root - span, root + 0.7 * span
        assert bisect_root(fn, lo, hi) == bisect_root(fn, hi, lo)
