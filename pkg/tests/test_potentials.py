import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ltladder.errors import DomainError, UnsupportedFamily
from ltladder.numerics import Grid, GridFunction
from ltladder.potentials import (
    BoundaryCondition,
    Coulomb,
    Domain,
    DoubleWell,
    Gaussian,
    PoschlTeller,
    PotentialSpec,
    SechBump,
    SquareWell,
    Sum,
    Tabulated,
    ZERO,
    closed_form_levels,
    combine,
    evaluate,
    half_line,
    integral_of,
    is_non_increasing,
    is_single_well,
    positive_part_moment,
    read_tabulated,
    sample,
    whole_line,
    write_tabulated,
)

WHOLE = Grid(-20.0, 20.0, 4001)


class TestEvaluate:
    def test_poschl_teller_peak(self):
        assert evaluate(whole_line(PoschlTeller(2.0)), 0.0) == pytest.approx(6.0)

    def test_coulomb(self):
        assert evaluate(half_line(Coulomb(0.0, 2.0)), 1.0) == pytest.approx(2.0)
        assert evaluate(half_line(Coulomb(1.0, 3.0)), 2.0) == pytest.approx(1.5 - 0.5)

    def test_square_well_outside_support(self):
        assert evaluate(whole_line(SquareWell(3.0, 1.0)), 1.5) == 0.0
        assert evaluate(whole_line(SquareWell(3.0, 1.0)), -0.5) == 3.0

    def test_double_well(self):
        p = whole_line(DoubleWell(2.0, 3.0))
        x = 0.7
        expected = 6.0 * (1 / math.cosh(x - 3) ** 2 + 1 / math.cosh(x + 3) ** 2)
        assert evaluate(p, x) == pytest.approx(expected)

    @pytest.mark.parametrize("r", [0.0, -1.0])
    def test_coulomb_outside_domain(self, r):
        with pytest.raises(DomainError):
            evaluate(half_line(Coulomb(0.0, 2.0)), r)

    def test_half_line_rejects_negative_x(self):
        with pytest.raises(DomainError):
            evaluate(half_line(Gaussian(1.0)), -0.1)

    @settings(max_examples=40, deadline=None)
    @given(x=st.floats(-30, 30), nu=st.floats(0.1, 5), a=st.floats(0.1, 5))
    def test_even_families(self, x, nu, a):
        for fam in (PoschlTeller(nu), Gaussian(nu, a), SquareWell(nu, a), DoubleWell(nu, a)):
            p = whole_line(fam)
            assert evaluate(p, x) == pytest.approx(evaluate(p, -x), rel=1e-12, abs=1e-300)


class TestParameterRanges:
    @pytest.mark.parametrize(
        "make",
        [
            lambda: PoschlTeller(0.0),
            lambda: Coulomb(-0.6, 1.0),
            lambda: Coulomb(0.0, 0.0),
            lambda: SquareWell(-1.0, 1.0),
            lambda: Gaussian(1.0, 0.0),
            lambda: DoubleWell(1.0, -2.0),
        ],
    )
    def test_out_of_range(self, make):
        with pytest.raises(DomainError):
            make()

    def test_domains(self):
        assert PotentialSpec(Coulomb(0.0, 1.0)).domain is Domain.HALF_LINE
        with pytest.raises(DomainError):
            whole_line(Coulomb(0.0, 1.0))
        with pytest.raises(DomainError):
            half_line(PoschlTeller(1.0))
        with pytest.raises(DomainError):
            half_line(DoubleWell(1.0, 2.0))

    def test_boundary_conditions(self):
        BoundaryCondition.decay().check_domain(Domain.WHOLE_LINE)
        BoundaryCondition.robin(-1.0).check_domain(Domain.HALF_LINE)
        with pytest.raises(DomainError):
            BoundaryCondition.dirichlet().check_domain(Domain.WHOLE_LINE)
        with pytest.raises(DomainError):
            BoundaryCondition.decay().check_domain(Domain.HALF_LINE)
        with pytest.raises(ValueError):
            BoundaryCondition("robin")

    def test_at_most_one_singular_term(self):
        p = half_line(Sum((Coulomb(0.0, 1.0), Coulomb(1.0, 1.0))))
        with pytest.raises(DomainError):
            p.origin_singularity()
        assert half_line(Sum((Coulomb(0.5, 1.0), Gaussian(1.0)))).origin_singularity() == (0.5, 1.0)


class TestClosedFormLevels:
    def test_poschl_teller(self):
        assert closed_form_levels(whole_line(PoschlTeller(2.0))) == pytest.approx([-4.0, -1.0])

    def test_coulomb(self):
        assert closed_form_levels(half_line(Coulomb(0.0, 2.0)), k_max=3) == pytest.approx([-1.0, -0.25, -1.0 / 9.0])

    def test_half_integer(self):
        assert closed_form_levels(whole_line(PoschlTeller(0.5))) == pytest.approx([-0.25])

    def test_coulomb_needs_k_max(self):
        with pytest.raises(ValueError):
            closed_form_levels(half_line(Coulomb(0.0, 2.0)))

    def test_other_families_unsupported(self):
        with pytest.raises(UnsupportedFamily):
            closed_form_levels(whole_line(Gaussian(1.0)))

    @settings(max_examples=40, deadline=None)
    @given(nu=st.floats(0.05, 8.0))
    def test_increasing_and_negative(self, nu):
        levels = np.array(closed_form_levels(whole_line(PoschlTeller(nu))))
        assert len(levels) == math.ceil(nu)
        assert np.all(levels < 0) and np.all(np.diff(levels) > 0)

    @pytest.mark.parametrize("nu", [2.0, 3.0, 3.5, 4.25])
    def test_lifted_family_drops_lowest_level(self, nu):
        levels = closed_form_levels(whole_line(PoschlTeller(nu)))
        lifted = closed_form_levels(whole_line(PoschlTeller(nu - 1.0)))
        assert lifted == pytest.approx(levels[1:])


class TestMoments:
    def test_poschl_teller_square(self):
        assert positive_part_moment(whole_line(PoschlTeller(1.0)), 2.0, WHOLE) == pytest.approx(16.0 / 3.0, abs=1e-6)

    def test_non_positive_potential(self):
        assert positive_part_moment(whole_line(SechBump(-3.0)), 2.0, WHOLE) == 0.0

    def test_square_well(self):
        # edges of the well fall on grid points; the jump costs O(h)
        grid = Grid(-20.0, 20.0, 40001)
        assert positive_part_moment(whole_line(SquareWell(1.0, 1.0)), 2.0, grid) == pytest.approx(2.0, abs=2e-3)

    def test_exponent_below_one(self):
        with pytest.raises(ValueError):
            positive_part_moment(whole_line(PoschlTeller(1.0)), 0.5, WHOLE)

    def test_integral_of(self):
        assert integral_of(whole_line(PoschlTeller(1.0)), WHOLE) == pytest.approx(4.0, abs=1e-8)


class TestSampling:
    def test_singular_origin_sample_is_nan(self):
        v = sample(half_line(Coulomb(0.0, 2.0)), Grid(0.0, 10.0, 101))
        assert np.isnan(v[0]) and v[1] == pytest.approx(20.0)

    def test_tabulated_needs_same_grid(self):
        f = GridFunction.from_callable(WHOLE, np.cos)
        p = whole_line(Tabulated(f))
        np.testing.assert_array_equal(sample(p, WHOLE), f.values)
        with pytest.raises(ValueError):
            sample(p, Grid(-20.0, 20.0, 2001))

    def test_combine(self):
        p = combine(whole_line(PoschlTeller(1.0)), whole_line(SechBump(4.0)))
        assert evaluate(p, 0.0) == pytest.approx(6.0)
        assert combine(whole_line(PoschlTeller(1.0)), ZERO).family == PoschlTeller(1.0)


class TestShapePredicates:
    def test_single_well(self):
        x = WHOLE.points
        assert is_single_well(sample(whole_line(Sum((SechBump(2.0, 1.0, 1.0), Gaussian(3.0, 0.5, 1.0)))), WHOLE))
        assert not is_single_well(sample(whole_line(DoubleWell(2.0, 3.0)), WHOLE))
        assert is_single_well(np.zeros_like(x))

    def test_non_increasing(self):
        r = Grid(0.0, 10.0, 1001)
        assert is_non_increasing(sample(half_line(Gaussian(2.0)), r))
        assert not is_non_increasing(sample(half_line(Gaussian(2.0, 1.0, 1.0)), r))


class TestTabulatedFormat:
    def test_round_trip(self, tmp_path):
        grid = Grid(-2.0, 3.0, 51)
        f = GridFunction.from_callable(grid, lambda x: np.exp(-x * x) / 3.0)
        path = tmp_path / "v.dat"
        write_tabulated(path, f, "gaussian\nseed=1")
        assert path.read_text().startswith("# gaussian\n# seed=1\n")
        p = read_tabulated(path)
        assert p.family.function.grid == grid
        np.testing.assert_array_equal(p.family.function.values, f.values)

    def test_rejects_non_uniform(self, tmp_path):
        path = tmp_path / "v.dat"
        path.write_text("0 1\n1 2\n3 3\n")
        with pytest.raises(ValueError):
            read_tabulated(path)

    def test_rejects_decreasing(self, tmp_path):
        path = tmp_path / "v.dat"
        path.write_text("0 1\n-1 2\n-2 3\n")
        with pytest.raises(ValueError):
            read_tabulated(path)
