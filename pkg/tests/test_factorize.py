import math

import numpy as np
import pytest

from pickfactor.errors import NotPickSpaceError, SpaceMismatchError, ZeroPolynomialError
from pickfactor.factorize import (
    FactorOptions,
    column_residual,
    common_free_outer,
    contraction_certificate,
    dirichlet_kaluza,
    dirichlet_truncated_radius,
    factor_through_subspace,
    is_free_outer,
    star_invariant_basis,
    subinner_free_outer,
    weak_product_factor,
)
from pickfactor.kernels import KernelSpace, MultiPoly, norm_sq, random_poly
from pickfactor.moments import moment_profile, sarason_series

H = KernelSpace.hardy()
D = KernelSpace.dirichlet()
DA2 = KernelSpace.drury_arveson(2)
BERGMAN = KernelSpace.d_alpha(-1)
z = MultiPoly.variable(D, 0)
zh = MultiPoly.variable(H, 0)
z1, z2 = MultiPoly.variable(DA2, 0), MultiPoly.variable(DA2, 1)
S2 = math.sqrt(2)


def one(space):
    return MultiPoly.constant(space, 1)


def coeff_gap(p: MultiPoly, q: MultiPoly) -> float:
    keys = set(p.coeffs) | set(q.coeffs)
    return max((abs(p[k] - q[k]) for k in keys), default=0.0)


class TestStarInvariantBasis:
    @pytest.mark.parametrize(
        "space, f, dim",
        [(D, z - 0.5, 2), (DA2, 1 + 2 * z1 * z2, 4), (D, one(D), 1), (DA2, one(DA2), 1)],
    )
    def test_dimension(self, space, f, dim):
        assert star_invariant_basis(space, f).dimension == dim

    def test_contains_adjoint_images(self):
        from pickfactor.kernels import adjoint_monomial, multi_indices

        rng = np.random.default_rng(7)
        f = random_poly(DA2, 3, rng)
        basis = star_invariant_basis(DA2, f)
        scale = math.sqrt(norm_sq(DA2, f))
        for beta in multi_indices(2, 3):
            assert basis.projection_residual(adjoint_monomial(DA2, beta, f)) <= 1e-12 * scale

    def test_degree_bound(self):
        f = random_poly(D, 4, np.random.default_rng(1))
        basis = star_invariant_basis(D, f)
        for j in range(basis.dimension):
            e = np.zeros(basis.dimension)
            e[j] = 1
            assert basis.combine(e).degree <= 4


class TestFactorExamples:
    def test_dirichlet_z(self):
        res = subinner_free_outer(D, z)
        assert coeff_gap(res.outer, S2 * one(D)) <= 1e-8
        w = np.array([0.4 - 0.1j])
        assert res.subinner(w) == pytest.approx(w[0] / S2, abs=1e-8)

    @pytest.mark.parametrize("lam", [1.0, 0.5, 1 + 0.3j])
    def test_dirichlet_linear(self, lam):
        res = subinner_free_outer(D, z - lam)
        assert res.converged
        assert coeff_gap(res.outer, S2 - np.conj(lam) / S2 * z) <= 1e-8
        w = np.array([0.3 + 0.2j])
        expected = S2 * (w[0] - lam) / (2 - np.conj(lam) * w[0])
        assert res.subinner(w) == pytest.approx(expected, abs=1e-8)

    @pytest.mark.parametrize("lam", [1.5, 2.0, -3j])
    def test_dirichlet_already_outer(self, lam):
        res = subinner_free_outer(D, z - lam)
        assert res.gain <= 1e-8
        ok, witness = is_free_outer(D, z - lam)
        assert ok and witness is None

    def test_is_free_outer_witness(self):
        ok, witness = is_free_outer(D, z - 1)
        assert not ok
        assert coeff_gap(witness, S2 - z / S2) <= 1e-8

    def test_drury_arveson(self):
        res = subinner_free_outer(DA2, 1 + 2 * z1 * z2)
        assert res.converged
        assert coeff_gap(res.outer, S2 * (1 + z1 * z2)) <= 1e-8

    def test_hardy_shift(self):
        res = subinner_free_outer(H, zh)
        assert coeff_gap(res.outer, one(H)) <= 1e-8

    def test_two_variable_family(self):
        from pickfactor.examples import equal_norm_parameter

        ok, _ = is_free_outer(DA2, (1 - z1) * (1 - z2))
        assert not ok
        res = subinner_free_outer(DA2, (1 - z1) * (1 - z2))
        assert res.gain >= equal_norm_parameter() - 1 - 1e-6

    def test_refusals(self):
        with pytest.raises(NotPickSpaceError):
            subinner_free_outer(BERGMAN, MultiPoly.variable(BERGMAN, 0))
        with pytest.raises(ZeroPolynomialError):
            subinner_free_outer(D, MultiPoly(D, {}))
        with pytest.raises(SpaceMismatchError):
            subinner_free_outer(H, z)

    def test_deterministic(self):
        f = random_poly(DA2, 2, np.random.default_rng(3))
        a = subinner_free_outer(DA2, f, FactorOptions(seed=5))
        b = subinner_free_outer(DA2, f, FactorOptions(seed=5))
        assert a.outer == b.outer


def _random_cases():
    rng = np.random.default_rng(2024)
    cases = [(D, random_poly(D, 2, rng)) for _ in range(4)]
    cases += [(DA2, random_poly(DA2, 2, rng)) for _ in range(3)]
    cases += [(KernelSpace.d_alpha(0.5), random_poly(KernelSpace.d_alpha(0.5), 3, rng))]
    return cases


@pytest.mark.parametrize("space, f", _random_cases())
class TestFactorInvariants:
    def test_identity_and_norm(self, space, f):
        res = subinner_free_outer(space, f)
        assert res.subinner.numerator == f
        nf = norm_sq(space, f)
        assert abs(norm_sq(space, res.outer) - nf) <= 1e-10 * nf
        assert res.moment_residual <= 1e-10
        assert res.outer[(0,) * space.dim].real >= abs(f[(0,) * space.dim]) - 1e-10

    def test_sarason_invariance(self, space, f):
        res = subinner_free_outer(space, f)
        vf, vg = sarason_series(space, f).poly, sarason_series(space, res.outer).poly
        assert coeff_gap(vf, vg) <= 1e-8

    def test_idempotent(self, space, f):
        g = subinner_free_outer(space, f).outer
        again = subinner_free_outer(space, g)
        assert again.gain <= 1e-8
        assert coeff_gap(again.outer, g) <= 1e-6

    def test_contraction(self, space, f):
        res = subinner_free_outer(space, f)
        assert contraction_certificate(space, res) <= 1 + 1e-8


class TestZeroFreeRadius:
    def test_examples(self):
        assert dirichlet_truncated_radius(1) == pytest.approx(S2, abs=1e-10)
        assert dirichlet_truncated_radius(2) == pytest.approx(math.sqrt((-6 + math.sqrt(84)) / 2), abs=1e-10)
        assert 1 < dirichlet_truncated_radius(50) < 1.1

    def test_decreasing(self):
        r = [dirichlet_truncated_radius(n) for n in range(1, 12)]
        assert all(b < a for a, b in zip(r, r[1:]))

    def test_kaluza_values(self):
        c = dirichlet_kaluza(3)
        assert c[1] == pytest.approx(0.5) and c[2] == pytest.approx(1 / 12)
        assert c[3] == pytest.approx(1 / 24)

    def test_bad_degree(self):
        with pytest.raises(ValueError):
            dirichlet_truncated_radius(0)

    @pytest.mark.parametrize("seed", range(6))
    def test_flagged_linear_roots(self, seed):
        rng = np.random.default_rng(seed)
        lam = complex(*rng.normal(size=2))
        ok, _ = is_free_outer(D, z - lam)
        # gain is smooth in |lambda|, so stay clear of the threshold itself
        if abs(abs(lam) - S2) > 1e-3:
            assert ok == (abs(lam) >= S2)


class TestCommonFactor:
    def test_dirichlet(self):
        res = common_free_outer(D, [one(D), z])
        assert coeff_gap(res.outer, math.sqrt(3) * one(D)) <= 1e-8
        assert res.column_residual <= 1e-8
        w = np.array([0.5])
        assert res.ratios[1](w) == pytest.approx(0.5 / math.sqrt(3), abs=1e-8)

    def test_hardy(self):
        res = common_free_outer(H, [one(H), zh])
        assert coeff_gap(res.outer, S2 * one(H)) <= 1e-8
        assert res.column_residual <= 1e-8

    def test_single_element_reduces(self):
        f = z - 1
        a = common_free_outer(D, [f])
        b = subinner_free_outer(D, f)
        assert coeff_gap(a.outer, b.outer) <= 1e-10

    def test_random_columns(self):
        rng = np.random.default_rng(8)
        fs = [random_poly(DA2, 2, rng) for _ in range(3)]
        res = common_free_outer(DA2, fs)
        assert res.moment_residual <= 1e-10
        assert res.column_residual <= 1e-8
        total = sum(norm_sq(DA2, f) for f in fs)
        assert norm_sq(DA2, res.outer) == pytest.approx(total, rel=1e-10)

    def test_column_residual_direct(self):
        # (f, g) = (z, 1) in Hardy: sum ||z p||^2 / ||p||^2 = 1 exactly
        assert column_residual(H, [zh], one(H), 4) == pytest.approx(0.0, abs=1e-12)
        assert column_residual(D, [z], one(D), 4) == pytest.approx(1.0, abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValueError):
            common_free_outer(D, [])


class TestWeakProduct:
    def test_hardy_one_z(self):
        res = weak_product_factor(H, one(H), zh)
        assert coeff_gap(res.outer, one(H)) <= 1e-8
        w = np.array([0.3 - 0.4j])
        assert res.phi(w) == pytest.approx(w[0], abs=1e-8)
        assert res.converged

    def test_constants(self):
        res = weak_product_factor(D, one(D), one(D))
        assert coeff_gap(res.outer, one(D)) <= 1e-8
        assert res.phi(np.array([0.2])) == pytest.approx(1.0, abs=1e-8)

    def test_outer_squared(self):
        g = subinner_free_outer(D, z - 1).outer
        g = g / math.sqrt(norm_sq(D, g))
        res = weak_product_factor(D, g, g)
        assert coeff_gap(res.outer, g) <= 1e-7
        assert res.phi(np.array([0.1 + 0.1j])) == pytest.approx(1.0, abs=1e-7)

    def test_product_identity(self):
        rng = np.random.default_rng(12)
        f1, f2 = random_poly(D, 2, rng), random_poly(D, 2, rng)
        res = weak_product_factor(D, f1, f2)
        w = np.array([0.25 + 0.1j])
        lhs = f1(w) * f2(w)
        rhs = res.scale * res.phi(w) * res.outer(w) ** 2
        assert lhs == pytest.approx(rhs, abs=1e-9)
        assert res.product_residual <= 1e-12

    def test_zero(self):
        with pytest.raises(ZeroPolynomialError):
            weak_product_factor(D, one(D), MultiPoly(D, {}))


class TestThroughFactor:
    def test_bergman_over_hardy(self):
        zb = MultiPoly.variable(BERGMAN, 0)
        res = factor_through_subspace(zb, BERGMAN, H)
        assert coeff_gap(res.outer, one(H) / S2) <= 1e-8
        w = np.array([0.35 + 0.25j])
        assert res.phi(w) == pytest.approx(S2 * w[0], abs=1e-8)
        comps = sorted(res.components, key=lambda c: c.degree)
        assert coeff_gap(comps[0], 0.5 * one(H)) <= 1e-12
        assert coeff_gap(comps[1], 0.5 * zh) <= 1e-12
        assert res.identity_residual <= 1e-12 and res.norm_residual <= 1e-12

    def test_same_space_reduces(self):
        f = z - 1
        res = factor_through_subspace(f, D, D)
        assert coeff_gap(res.outer, subinner_free_outer(D, f).outer) <= 1e-8

    def test_constant(self):
        res = factor_through_subspace(one(BERGMAN), BERGMAN, H)
        assert coeff_gap(res.outer, one(H)) <= 1e-10

    def test_not_a_factor(self):
        with pytest.raises(NotPickSpaceError):
            factor_through_subspace(z, D, KernelSpace.d_alpha(-1))
