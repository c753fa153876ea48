import numpy as np
import pytest

from enosv.discretization import (
    BasisSpec,
    Grid,
    build_operators,
    chebyshev_boundaries,
    jump_basis_average,
    jump_basis_eval,
    legendre_average,
    legendre_eval,
    recovery_tables,
)
from enosv.errors import ConfigError


def gauss_average(f, a, b, order=24):
    """Quadrature oracle: average of f over [a, b]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (a + b) + 0.5 * (b - a) * nodes
    return 0.5 * np.sum(weights * f(x))


class TestChebyshevBoundaries:
    def test_q1(self):
        np.testing.assert_allclose(chebyshev_boundaries(1), [-1.0, 0.0, 1.0], atol=1e-15)

    def test_q3(self):
        s = np.sqrt(2.0) / 2.0
        np.testing.assert_allclose(
            chebyshev_boundaries(3), [-1.0, -s, 0.0, s, 1.0], atol=1e-15
        )

    @pytest.mark.parametrize("q", [0, 1, 2, 5, 9, 10])
    def test_endpoints_exact_and_ascending(self, q):
        x = chebyshev_boundaries(q)
        assert x[0] == -1.0 and x[-1] == 1.0
        assert np.all(np.diff(x) > 0)
        np.testing.assert_allclose(x, -x[::-1], atol=0.0)


class TestLegendre:
    def test_p0(self):
        assert legendre_eval(0, 0.37) == 1.0

    def test_p1(self):
        assert legendre_eval(1, 0.5) == 0.5

    def test_endpoint_value(self):
        assert legendre_eval(5, 1.0) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("n", range(9))
    def test_against_numpy(self, n):
        x = np.linspace(-1, 1, 33)
        coeffs = np.zeros(n + 1)
        coeffs[n] = 1.0
        np.testing.assert_allclose(
            legendre_eval(n, x), np.polynomial.legendre.legval(x, coeffs), atol=1e-13
        )

    def test_average_p0(self):
        assert legendre_average(0, -0.3, 0.9) == 1.0

    def test_average_p1_symmetric(self):
        assert legendre_average(1, -1.0, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_average_p2_halfline(self):
        assert legendre_average(2, 0.0, 1.0) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("n", range(9))
    def test_average_against_quadrature(self, n):
        rng = np.random.default_rng(7 + n)
        for _ in range(5):
            a, b = np.sort(rng.uniform(-1, 1, size=2))
            if b - a < 1e-3:
                continue
            expected = gauss_average(lambda x: legendre_eval(n, x), a, b)
            assert legendre_average(n, a, b) == pytest.approx(expected, abs=1e-13)


class TestJumpBasis:
    def setup_method(self):
        self.edges = chebyshev_boundaries(9)  # 10 subcells

    def test_one_sided_limits(self):
        j = 4
        xj = self.edges[j]
        assert jump_basis_eval(j, xj, self.edges, side="left") == -1.0
        assert jump_basis_eval(j, xj, self.edges, side="right") == 1.0

    def test_zero_outside_support(self):
        j = 4
        x = 0.5 * (self.edges[7] + self.edges[8])
        assert jump_basis_eval(j, x, self.edges) == 0.0

    def test_left_ramp_midpoint(self):
        j = 4
        x = 0.5 * (self.edges[j - 1] + self.edges[j])
        assert jump_basis_eval(j, x, self.edges) == pytest.approx(-0.5, abs=1e-14)

    def test_rejects_outside_macrocell(self):
        with pytest.raises(ConfigError):
            jump_basis_eval(4, 1.5, self.edges)

    def test_averages(self):
        assert jump_basis_average(5, 4) == -0.5
        assert jump_basis_average(5, 5) == 0.5
        assert jump_basis_average(5, 8) == 0.0

    @pytest.mark.parametrize("j", [1, 3, 5, 9])
    def test_average_matches_quadrature(self, j):
        # averages are +-1/2 on the support subcells for any subcell widths
        for i in range(10):
            a, b = self.edges[i], self.edges[i + 1]
            expected = gauss_average(
                lambda x: jump_basis_eval(j, x, self.edges), a, b
            )
            assert jump_basis_average(j, i) == pytest.approx(expected, abs=1e-13)

    def test_weighted_average_sum_is_exact_integral(self):
        # mu_{j-1} * (-1/2) + mu_j * (1/2) equals the integral of the jump basis,
        # checked by direct numerical integration over its support
        j = 3
        widths = np.diff(self.edges)
        weighted = widths[j - 1] * (-0.5) + widths[j] * 0.5
        integral = sum(
            gauss_average(lambda x: jump_basis_eval(j, x, self.edges),
                          self.edges[i], self.edges[i + 1]) * widths[i]
            for i in range(10)
        )
        assert weighted == pytest.approx(integral, abs=1e-13)


class TestBasisSpec:
    def test_compat_violation(self):
        spec = BasisSpec(k=4, jump_edges=(1,), jump_signs=(1,))
        with pytest.raises(ConfigError):
            spec.validate_for(4)

    def test_duplicate_edges(self):
        with pytest.raises(ConfigError):
            BasisSpec(k=1, jump_edges=(2, 2), jump_signs=(1, 1))

    def test_bad_sign(self):
        with pytest.raises(ConfigError):
            BasisSpec(k=1, jump_edges=(2,), jump_signs=(0,))


class TestBuildOperators:
    def test_pure_constant_column(self):
        spec = BasisSpec(k=1)
        edges = chebyshev_boundaries(3)
        ops = build_operators(spec, edges, np.array([0.0]))
        np.testing.assert_allclose(ops.averaging, np.ones((4, 1)), atol=1e-15)

    def test_single_jump_column(self):
        spec = BasisSpec(k=0, jump_edges=(2,), jump_signs=(1,))
        edges = chebyshev_boundaries(3)
        ops = build_operators(spec, edges, edges)
        expected = np.array([[0.0], [-0.5], [0.5], [0.0]])
        np.testing.assert_allclose(ops.averaging, expected, atol=1e-15)

    def test_compat_rejection(self):
        spec = BasisSpec(k=4, jump_edges=(1,), jump_signs=(1,))
        with pytest.raises(ConfigError):
            build_operators(spec, chebyshev_boundaries(3), np.array([0.0]))

    def test_physical_macrocell_matches_reference(self):
        # averages are affine invariant: same matrix on [2, 5] as on [-1, 1]
        spec = BasisSpec(k=3, jump_edges=(2,), jump_signs=(-1,))
        ref_edges = chebyshev_boundaries(3)
        phys = 3.5 + 1.5 * ref_edges
        ops_ref = build_operators(spec, ref_edges, ref_edges)
        ops_phys = build_operators(spec, phys, phys)
        np.testing.assert_allclose(ops_phys.averaging, ops_ref.averaging, atol=1e-13)
        np.testing.assert_allclose(
            ops_phys.vandermonde_left, ops_ref.vandermonde_left, atol=1e-13
        )

    def test_averaging_reproduces_quadrature_averages(self):
        # applying the averaging matrix to any coefficient vector reproduces
        # the exact subcell averages of the combined basis function
        rng = np.random.default_rng(42)
        spec = BasisSpec(k=5, jump_edges=(3, 7), jump_signs=(1, -1))
        edges = chebyshev_boundaries(9)
        ops = build_operators(spec, edges, edges)
        coeffs = rng.standard_normal(spec.size)

        def fn(x):
            out = np.zeros_like(x)
            for i in range(spec.k):
                out += coeffs[i] * legendre_eval(i, x)
            for c, (e, s) in enumerate(zip(spec.jump_edges, spec.jump_signs)):
                out += coeffs[spec.k + c] * s * jump_basis_eval(e, x, edges)
            return out

        predicted = ops.averaging @ coeffs
        cond = np.linalg.cond(ops.averaging)
        for i in range(10):
            expected = gauss_average(fn, edges[i], edges[i + 1], order=48)
            assert predicted[i] == pytest.approx(expected, abs=10 * cond * 1e-16 + 1e-13)

    def test_vandermonde_sides_agree_off_jumps(self):
        spec = BasisSpec(k=4, jump_edges=(2,), jump_signs=(1,))
        edges = chebyshev_boundaries(5)
        pts = np.array([edges[1], edges[3], 0.123, -0.8])
        ops = build_operators(spec, edges, pts)
        np.testing.assert_allclose(ops.vandermonde_left, ops.vandermonde_right, atol=0.0)

    def test_full_rank_for_admissible_specs(self):
        for q in range(1, 10):
            k = max(q - 1, 1)
            spec = BasisSpec(k=k, jump_edges=(1,), jump_signs=(1,))
            edges = chebyshev_boundaries(q)
            ops = build_operators(spec, edges, np.array([0.0]))
            assert np.linalg.matrix_rank(ops.averaging) == spec.size


class TestGrid:
    def test_uniform_construction(self):
        g = Grid.uniform(-5.0, 5.0, 25, 4)
        assert g.n_macrocells == 25
        assert g.subcell_edges.shape == (25, 5)
        assert g.total_length == pytest.approx(10.0)
        np.testing.assert_allclose(g.subcell_edges[:, 0], g.macrocell_edges[:-1])
        np.testing.assert_allclose(g.subcell_edges[:, -1], g.macrocell_edges[1:])

    def test_min_width_is_edge_subcell(self):
        g = Grid.uniform(0.0, 1.0, 4, 4)
        ref = chebyshev_boundaries(3)
        expected = (ref[1] - ref[0]) * (1.0 / 4.0) / 2.0
        assert g.min_subcell_width == pytest.approx(expected)

    def test_rejects_non_monotone(self):
        with pytest.raises(ConfigError):
            Grid.from_macrocell_edges([0.0, 1.0, 0.5], 4)

    def test_rejects_non_chebyshev_layout(self):
        g = Grid.uniform(0.0, 1.0, 2, 4)
        bad = g.subcell_edges.copy()
        bad[0, 2] += 0.01
        with pytest.raises(ConfigError):
            Grid(g.macrocell_edges, 4, bad)


class TestRecoveryTables:
    def test_gram_matches_matrix(self):
        t = recovery_tables(6, 4)
        full = np.zeros((6, 4 + 5))
        full[:, :4] = t.poly_avg
        for e in range(1, 6):
            full[e - 1, 4 + e - 1] = -0.5
            full[e, 4 + e - 1] = 0.5
        gram = full.T @ full
        np.testing.assert_allclose(t.gram_pp, gram[:4, :4], atol=1e-14)
        np.testing.assert_allclose(t.gram_pj, gram[:4, 4:], atol=1e-14)
        np.testing.assert_allclose(t.gram_jj, gram[4:, 4:], atol=1e-14)

    def test_tables_are_immutable(self):
        t = recovery_tables(4, 3)
        with pytest.raises(ValueError):
            t.poly_avg[0, 0] = 99.0
