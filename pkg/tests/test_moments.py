import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pickfactor.errors import CoincidentPointsError, DegreeExceededError
from pickfactor.kernels import KernelRatio, KernelSpace, MultiPoly, norm_sq, random_poly
from pickfactor.moments import (
    moment_profile,
    sarason_series,
    two_point_certificate,
    two_point_slack,
    vector_state_equal,
)

from oracles import moment_ref

H = KernelSpace.hardy()
D = KernelSpace.dirichlet()
DA2 = KernelSpace.drury_arveson(2)
z = MultiPoly.variable(D, 0)
z1, z2 = MultiPoly.variable(DA2, 0), MultiPoly.variable(DA2, 1)


class TestMomentProfile:
    def test_constant(self):
        m = moment_profile(D, MultiPoly.constant(D, 1))
        assert m.norm_sq == 1 and m.order == 0

    @pytest.mark.parametrize("lam", [0.5, 1.0, 1 + 0.3j, -2j])
    def test_dirichlet_linear(self, lam):
        m = moment_profile(D, z - lam, 2)
        assert m[(0,)] == pytest.approx(2 + abs(lam) ** 2)
        assert m[(1,)] == pytest.approx(-2 * lam)
        assert m[(2,)] == 0

    def test_drury_arveson(self):
        m = moment_profile(DA2, 1 + 2 * z1 * z2)
        assert m[(0, 0)] == pytest.approx(3.0)
        assert m[(1, 0)] == 0 and m[(0, 1)] == 0
        assert m[(1, 1)] == pytest.approx(1.0)

    def test_against_shift_oracle(self):
        rng = np.random.default_rng(11)
        sp = KernelSpace.d_alpha(0.4, 2)
        f = random_poly(sp, 3, rng)
        m = moment_profile(sp, f)
        for alpha, val in m.entries.items():
            assert val == pytest.approx(moment_ref(sp.coeff, dict(f.coeffs), alpha), abs=1e-12)

    def test_vanishes_beyond_degree(self):
        rng = np.random.default_rng(2)
        f = random_poly(DA2, 2, rng)
        m = moment_profile(DA2, f, 4)
        assert all(abs(v) == 0 for a, v in m.entries.items() if sum(a) > 2)

    def test_degree_budget(self):
        small = KernelSpace.dirichlet(working_degree=3)
        with pytest.raises(DegreeExceededError):
            moment_profile(small, MultiPoly.variable(small, 0) ** 2)


class TestSarason:
    @pytest.mark.parametrize("lam", [0.5, 1.0, 1 + 0.3j])
    def test_dirichlet_linear(self, lam):
        v = sarason_series(D, z - lam).poly
        assert v[(0,)] == pytest.approx(2 + abs(lam) ** 2, abs=1e-12)
        assert v[(1,)] == pytest.approx(-2 * np.conj(lam), abs=1e-12)

    def test_constant(self):
        v = sarason_series(H, MultiPoly.constant(H, 1)).poly
        assert v == MultiPoly.constant(H, 1)

    def test_drury_arveson(self):
        v = sarason_series(DA2, 1 + 2 * z1 * z2).poly
        assert v.allclose(3 + 4 * z1 * z2, atol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_constant_term_is_norm(self, seed):
        f = random_poly(DA2, 3, np.random.default_rng(seed))
        assert sarason_series(DA2, f).poly[(0, 0)] == norm_sq(DA2, f)

    def test_sarason_matches_kernel_definition(self):
        # V_f(w) = 2 <f, k_w f> - ||f||^2 with the kernel written as a truncated polynomial
        from pickfactor.kernels import inner_product, kernel_poly

        f = 1 - 0.4 * z + 0.3j * z ** 2
        w = np.array([0.35 - 0.2j])
        kw = kernel_poly(D, w, 6)
        direct = 2 * inner_product(D, f, kw * f) - norm_sq(D, f)
        assert direct == pytest.approx(sarason_series(D, f)(w), abs=1e-12)


class TestVectorStateEqual:
    def test_examples(self):
        assert vector_state_equal(D, z - 1, z - 1) == (True, 0.0)
        g = math.sqrt(2) - z / math.sqrt(2)
        ok, res = vector_state_equal(D, z - 1, g)
        assert ok and res <= 1e-12
        ok, res = vector_state_equal(D, z - 1, z + 1)
        assert not ok and res == pytest.approx(4.0)

    def test_symmetric(self):
        rng = np.random.default_rng(4)
        f, g = random_poly(D, 3, rng), random_poly(D, 2, rng)
        assert vector_state_equal(D, f, g) == vector_state_equal(D, g, f)


class TestTwoPointCertificate:
    def test_constant(self):
        c = 0.3 - 0.4j
        val = two_point_certificate(D, lambda p: c, 0.1, 0.6j)
        assert val == pytest.approx(abs(c), abs=1e-9)

    @pytest.mark.parametrize("pair", [(0.0, 0.5), (0.3j, -0.7), (0.2 + 0.1j, 0.9)])
    def test_hardy_shift(self, pair):
        val = two_point_certificate(H, lambda p: p[0], *pair)
        assert val == pytest.approx(1.0, abs=1e-9)

    def test_dirichlet_shift_exceeds_sup_norm(self):
        val = two_point_certificate(D, lambda p: p[0], 0.0, 0.9, truncation=60)
        assert 1.05 < val <= math.sqrt(2) + 1e-9

    def test_generalized_eigenvalue_oracle(self):
        # for phi(0) = 0 the certificate is sqrt of the top eigenvalue of K^{-1} (v v*) o K
        from pickfactor.pick import restricted_norm

        pts = np.array([[0.0], [0.9]])
        vals = np.array([0.0, 0.9])
        ref = restricted_norm(D, pts, vals)
        assert two_point_certificate(D, KernelRatio(z, MultiPoly.constant(D, 1)), 0.0, 0.9) == \
            pytest.approx(ref, abs=1e-9)

    def test_coincident(self):
        with pytest.raises(CoincidentPointsError):
            two_point_certificate(H, lambda p: p[0], 0.3, 0.3)

    def test_truncation_refinement(self):
        phi = lambda p: p[0]
        prev = None
        for n in (10, 20, 40, 80):
            val = two_point_certificate(D, phi, 0.0, 0.9, truncation=n)
            slack = two_point_slack(D, phi, 0.0, 0.9, truncation=n)
            if prev is not None:
                assert val >= prev[0] - prev[1] - 1e-9
            prev = (val, slack)
