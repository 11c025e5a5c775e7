import cmath
import csv
import io
import json
import math

import numpy as np
import pytest

from cgl_lab.bifurcation import (
    Branch,
    asymptotic_check,
    check_exponents,
    continue_branch,
    eval_P,
    expansion_coefficient,
    find_roots_P,
    galerkin_residual,
    grid_residual,
    make_pair,
    rayleigh_lambda,
    solve_branch_point,
    solve_y_fixed_point,
    square_pair,
    summary_json,
    y_lipschitz_ratio,
)
from cgl_lab.errors import HypothesisError, NoContractionError, ResolventError
from cgl_lab.params import TrigParamSet

# theta = gamma1 = gamma2 = 0, chi = -1, sigma1 = 2, sigma2 = 4
TRIG = TrigParamSet(0.0, 0.0, 0.0, -1, 0.0, 2.0, 4.0)
LAMBDA0 = 5 * math.pi ** 2 / 4


def cubic(a):
    return 3 / 16 * (a ** 3 - a)


class TestPair:
    def test_square(self, pair):
        assert pair.lambda0 == pytest.approx(LAMBDA0, rel=1e-14)
        assert not pair.simple
        assert pair.spectral_gap == pytest.approx(3 * math.pi ** 2 / 4, rel=1e-12)
        assert pair.eigen_residual() < 1e-2

    def test_eigen_residual_second_order(self):
        res = [square_pair(n, 50).eigen_residual() for n in (33, 65, 129)]
        assert np.all(np.log2(np.array(res[:-1]) / np.array(res[1:])) > 1.9)

    def test_mismatched_modes(self, pair):
        with pytest.raises(ValueError):
            make_pair(pair.grid, [(1, 1), (1, 2)], 50)

    def test_swap(self, pair, swapped_pair):
        assert np.array_equal(swapped_pair.u1.values, pair.u2.values)
        assert swapped_pair.positions == pair.positions[::-1]


class TestPolynomial:
    @pytest.mark.parametrize("a", [-1.5, -0.5, 0.5, 1.5, 2.0])
    def test_matches_cubic(self, pair, a):
        assert abs(eval_P(pair, a, 2.0) - cubic(a)) < 1e-6

    def test_known_values(self, pair):
        assert abs(eval_P(pair, 0.0, 2.0)) < 1e-14
        assert eval_P(pair, 2.0, 2.0) == pytest.approx(9 / 8, abs=1e-6)

    def test_roots(self, pair):
        roots = find_roots_P(pair, 2.0)
        real = sorted(r.alpha.real for r in roots if abs(r.alpha.imag) < 1e-8)
        assert np.allclose(real, [-1, 0, 1], atol=1e-8)
        assert all(r.simple for r in roots)
        zero = next(r for r in roots if abs(r.alpha) < 1e-8)
        assert zero.P_prime == pytest.approx(-3 / 16, abs=1e-8)

    def test_imaginary_roots(self, pair):
        # with alpha = i the quadrature vanishes too: |u1 + i u2|^2 = u1^2 + u2^2 and both
        # remaining integrals are odd
        complex_roots = [r.alpha for r in find_roots_P(pair, 2.0) if abs(r.alpha.imag) > 1e-8]
        assert len(complex_roots) == 2
        assert np.allclose(sorted(complex_roots, key=lambda z: z.imag), [-1j, 1j], atol=1e-8)
        assert abs(eval_P(pair, 1j, 2.0)) < 1e-12

    def test_swapped_same_roots(self, pair, swapped_pair):
        a = [r.alpha for r in find_roots_P(pair, 2.0)]
        b = [r.alpha for r in find_roots_P(swapped_pair, 2.0)]
        assert np.allclose(a, b, atol=1e-8)

    def test_symmetric_under_negation(self, pair):
        roots = [r.alpha for r in find_roots_P(pair, 2.0)]
        for z in roots:
            assert min(abs(-z - w) for w in roots) < 1e-8


class TestFixedPoint:
    def test_zero_amplitude(self, pair):
        fp = solve_y_fixed_point(pair, TRIG, 0.0, 0.0, LAMBDA0)
        assert fp.iterations == 1 and not np.any(fp.y)

    def test_scaling(self, pair):
        eps = [1e-3, 2e-3, 4e-3]
        norms = [np.sqrt(np.sum((1 + pair.basis.eigenvalues[pair.complement])
                                * np.abs(solve_y_fixed_point(pair, TRIG, e, 1.0, LAMBDA0).y) ** 2))
                 for e in eps]
        assert np.polyfit(np.log(eps), np.log(norms), 1)[0] >= TRIG.sigma1 + 0.9

    def test_lipschitz_in_lambda(self, pair):
        ratios = [y_lipschitz_ratio(pair, TRIG, e, 0.0, LAMBDA0, 1e-3) / e ** 3 for e in (1e-3, 4e-3)]
        assert ratios[1] == pytest.approx(ratios[0], rel=1e-3)

    def test_outside_resolvent_disk(self, pair):
        with pytest.raises(ResolventError):
            solve_y_fixed_point(pair, TRIG, 1e-3, 0.0, LAMBDA0 + 0.6 * pair.spectral_gap)

    def test_large_amplitude(self, pair):
        with pytest.raises(NoContractionError):
            solve_y_fixed_point(pair, TRIG, 3.0, 0.0, LAMBDA0)

    def test_exponent_guard(self, pair):
        low = TrigParamSet(0.0, 0.0, 0.0, -1, 0.0, 0.5, 4.0)
        with pytest.raises(HypothesisError):
            solve_y_fixed_point(pair, low, 1e-3, 0.0, LAMBDA0)
        assert solve_y_fixed_point(pair, low, 1e-3, 0.0, LAMBDA0, override=True).iterations > 1
        with pytest.raises(HypothesisError):
            check_exponents(TrigParamSet(0.0, 0.0, 0.0, -1, 0.0, 2.0, 2.5), 2)


class TestBranchPoint:
    def test_reduction_point(self, pair):
        for trig in (TRIG, TrigParamSet(0.4, 0.0, 0.0, -1, 0.0, 2.0, 4.0)):
            pt = solve_branch_point(pair, trig, 0.0, 1.0)
            assert pt.lam == cmath.exp(1j * trig.theta) * LAMBDA0 and pt.alpha == 1.0

    def test_quadratic_shift(self, pair):
        pt = solve_branch_point(pair, TRIG, 1e-2, 0.0)
        shift = pt.lam - LAMBDA0
        assert shift.real == pytest.approx(-9 / 16 * 1e-4, rel=1e-3)
        assert pt.residual < 1e-8
        assert pt.orthogonality(pair) < 1e-10

    def test_gauge_invariance(self, pair):
        pt = solve_branch_point(pair, TRIG, 5e-3, 1.0)
        c = pt.coefficients(pair)
        rotated = c * cmath.exp(0.9j)
        assert abs(rayleigh_lambda(pair, TRIG, rotated) - rayleigh_lambda(pair, TRIG, c)) < 1e-10
        assert abs(rayleigh_lambda(pair, TRIG, c) - pt.lam) < 1e-10
        assert galerkin_residual(pair, TRIG, rotated, pt.lam) < 1e-8

    def test_grid_residual_second_order(self):
        res = []
        for n in (33, 65, 129):
            pr = square_pair(n, 200)
            res.append(grid_residual(solve_branch_point(pr, TRIG, 5e-3, 0.0), pr, TRIG))
        assert np.all(np.log2(np.array(res[:-1]) / np.array(res[1:])) > 1.9)

    def test_truncation_insensitive(self, pair):
        a = solve_branch_point(pair, TRIG, 1e-2, 1.0)
        b = solve_branch_point(pair.with_basis_size(800), TRIG, 1e-2, 1.0)
        assert abs(a.lam - b.lam) < 1e-10 * abs(a.lam)

    def test_tilted_diffusion(self, pair):
        trig = TrigParamSet(0.3, 0.2, 0.0, -1, 0.0, 2.0, 4.0)
        pt = solve_branch_point(pair, trig, 5e-3, 0.0)
        assert pt.residual < 1e-8
        expected = cmath.exp(0.3j) * LAMBDA0 + expansion_coefficient(pair, trig, 0.0) * 25e-6
        assert abs(pt.lam - expected) < 1e-2 * 25e-6


@pytest.fixture(scope="module")
def branch(pair):
    return continue_branch(pair, TRIG, 0.0, [1e-3, 2e-3, 4e-3, 6e-3, 8e-3, 1e-2])


class TestBranches:
    def test_coefficients(self, pair):
        assert expansion_coefficient(pair, TRIG, 0.0) == pytest.approx(-9 / 16, abs=1e-10)
        assert expansion_coefficient(pair, TRIG, 1.0) == pytest.approx(-21 / 16, abs=1e-10)
        assert expansion_coefficient(pair, TRIG, -1.0) == pytest.approx(-21 / 16, abs=1e-10)

    def test_single_point(self, pair):
        b = continue_branch(pair, TRIG, 0.0, [0.0])
        assert len(b.points) == 1 and b.points[0].lam == LAMBDA0

    def test_bad_grid(self, pair):
        with pytest.raises(ValueError):
            continue_branch(pair, TRIG, 0.0, [1e-3, 1e-3])

    def test_asymptotics(self, pair, branch):
        rep = asymptotic_check(branch, pair, TRIG)
        assert rep.relative_deviation < 0.05
        assert rep.growth_exponent == pytest.approx(2.0, abs=0.1)
        assert rep.window_deviations[-1] <= rep.window_deviations[0]

    def test_constraints(self, pair, branch):
        assert not branch.truncated
        assert all(p.residual < 1e-8 for p in branch.points)
        assert all(p.orthogonality(pair) < 1e-10 for p in branch.points)
        assert branch.lipschitz_lambda < 1.0

    @pytest.mark.parametrize("alpha0", [1.0, -1.0])
    def test_diagonal_branches(self, pair, alpha0):
        b = continue_branch(pair, TRIG, alpha0, [2e-3, 4e-3, 6e-3, 8e-3])
        rep = asymptotic_check(b, pair, TRIG)
        assert rep.relative_deviation < 0.05
        assert all(abs(p.alpha - alpha0) < 1e-3 for p in b.points)

    def test_simple_mode(self, pair):
        simple = make_pair(pair.grid, [(1, 1)])
        assert simple.simple and simple.lambda0 == pytest.approx(math.pi ** 2 / 2)
        b = continue_branch(simple, TRIG, 0.0, [1e-3, 2e-3, 4e-3, 8e-3])
        assert all(p.alpha == 0 for p in b.points)
        assert asymptotic_check(b, simple, TRIG).relative_deviation < 0.05

    def test_outputs(self, pair, branch):
        rows = list(csv.reader(io.StringIO(branch.to_csv())))
        assert tuple(rows[0]) == Branch.CSV_HEADER and len(rows) == 7
        d = json.loads(summary_json([branch], [asymptotic_check(branch, pair, TRIG)]))
        assert d["spec_version"] == 1
        assert d["branches"][0]["asymptotics"]["expected"] == pytest.approx([-0.5625, 0.0])
