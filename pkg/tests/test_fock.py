import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import pickfactor.fock as fock
from pickfactor.errors import BudgetExceededError, SpaceMismatchError, WrongFamilyError
from pickfactor.examples import SIX_WORDS, six_word_bound, six_word_poly
from pickfactor.factorize import is_free_outer, subinner_free_outer
from pickfactor.fock import (
    FreePoly,
    MatrixTuple,
    embed_symmetric,
    eval_free,
    eval_homogeneous,
    eval_scalar,
    flip,
    fock_inner,
    fock_norm,
    free_mul,
    free_sarason,
    outer_defect,
    outer_defect_curve,
    outer_status,
    random_free_poly,
    right_outer_defect,
    symmetric_moments,
    word_budget,
    words,
)
from pickfactor.kernels import KernelSpace, MultiPoly, norm_sq, random_poly
from pickfactor.moments import moment_profile, sarason_series

from oracles import all_words, dense_lstsq_distance

DA2 = KernelSpace.drury_arveson(2)
H = KernelSpace.hardy()
z1, z2 = MultiPoly.variable(DA2, 0), MultiPoly.variable(DA2, 1)


def x(*w, dim=2):
    return FreePoly.word(dim, w)


ONE = FreePoly.constant(2)


class TestWords:
    def test_graded_lex(self):
        ws = words(2, 2)
        assert ws == ((), (1,), (2,), (1, 1), (1, 2), (2, 1), (2, 2))
        assert ws == tuple(all_words(2, 2))

    def test_budget(self, monkeypatch):
        assert word_budget(2) >= 14
        monkeypatch.setenv("PICKFACTOR_BUDGET", "5")
        assert word_budget(2) == 5
        with pytest.raises(BudgetExceededError):
            outer_defect(x(1, 2), 4)

    def test_budget_dimension(self):
        with pytest.raises(BudgetExceededError):
            word_budget(4)


class TestAlgebra:
    def test_free_mul_examples(self):
        assert free_mul(x(1), x(2)) == x(1, 2)
        lhs = free_mul(ONE - x(1), ONE + x(1) + x(1, 1))
        assert lhs == ONE - x(1, 1, 1)
        F = random_free_poly(2, 2, np.random.default_rng(0))
        assert free_mul(F, ONE) == F and free_mul(ONE, F) == F

    def test_free_mul_noncommutative(self):
        assert free_mul(x(1), x(2)) != free_mul(x(2), x(1))

    def test_dimension_mismatch(self):
        with pytest.raises(SpaceMismatchError):
            free_mul(x(1), FreePoly.word(3, (1,)))

    def test_flip_examples(self):
        assert flip(x(1, 2)) == x(2, 1)
        F = random_free_poly(2, 3, np.random.default_rng(1))
        assert flip(flip(F)) == F

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_flip_isometric_antihomomorphism(self, seed):
        rng = np.random.default_rng(seed)
        F, G = random_free_poly(2, 2, rng), random_free_poly(2, 3, rng)
        assert fock_norm(flip(F)) == pytest.approx(fock_norm(F), rel=1e-14)
        assert flip(free_mul(F, G)).allclose(free_mul(flip(G), flip(F)), atol=1e-12)

    def test_no_stored_zeros(self):
        assert (x(1) - x(1)).is_zero()

    def test_norm(self):
        F = FreePoly(2, {(): 3.0, (1, 2): 4j})
        assert fock_norm(F) == pytest.approx(5.0)
        assert fock_inner(F, F) == pytest.approx(25.0)


class TestEvaluation:
    def test_scalar_tuple(self):
        X = MatrixTuple((np.array([[0.3]]), np.array([[-0.5j]])))
        assert eval_free(x(1, 2), X)[0, 0] == pytest.approx(0.3 * -0.5j)

    def test_matrix_units(self):
        e12 = np.array([[0, 1], [0, 0]])
        e21 = np.array([[0, 0], [1, 0]])
        X = MatrixTuple((e12, e21))
        val = eval_free(x(1) + x(2), X)
        assert np.allclose(val, e12 + e21)
        assert np.linalg.norm(val, 2) == pytest.approx(1.0)
        assert X.row_norm == pytest.approx(1.0)
        assert (x(1) + x(2)).homogeneous_norm(1) * X.row_norm >= 1.0

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            MatrixTuple((np.eye(2), np.eye(3)))
        with pytest.raises(ValueError):
            eval_free(x(1, dim=3), MatrixTuple((np.eye(2), np.eye(2))))

    def test_scalar_eval_matches_commutative(self):
        f = 1 + 2 * z1 * z2 - 0.5j * z1 ** 2
        F = embed_symmetric(f)
        p = np.array([0.3 - 0.1j, 0.2 + 0.4j])
        assert eval_scalar(F, p) == pytest.approx(f(p), abs=1e-14)

    def test_per_degree_bound(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            F = random_free_poly(2, 3, rng)
            mats = [rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(2)]
            X = MatrixTuple(tuple(mats))
            X = MatrixTuple(tuple(m * rng.uniform(0.1, 0.99) / X.row_norm for m in mats))
            for k in range(4):
                lhs = np.linalg.norm(eval_homogeneous(F, X, k), 2)
                assert lhs <= F.homogeneous_norm(k) * X.row_norm ** k * (1 + 1e-12) + 1e-14


class TestSarason:
    @pytest.mark.parametrize("side", ["left", "right"])
    def test_constants(self, side):
        assert free_sarason(ONE, side) == ONE
        assert free_sarason(x(1), side) == ONE

    def test_sides_differ(self):
        # x12 = x1 * x2 overlaps x1 on the right only
        G = x(1) + x(1, 2)
        left, right = free_sarason(G, "left"), free_sarason(G, "right")
        assert left[(2,)] == pytest.approx(2.0)
        assert right[(2,)] == 0 and right[(1,)] == 0
        assert left[()] == right[()] == pytest.approx(2.0)

    def test_flip_swaps_sides(self):
        F = random_free_poly(2, 3, np.random.default_rng(5))
        assert free_sarason(flip(F), "left").allclose(flip(free_sarason(F, "right")), atol=1e-12)

    def test_bad_side(self):
        with pytest.raises(ValueError):
            free_sarason(ONE, "up")

    @pytest.mark.parametrize("lam", [0.5, 2.0, 0.3 + 0.4j])
    def test_one_variable_bridge(self, lam):
        D1 = KernelSpace.drury_arveson(1)
        zz = MultiPoly.variable(D1, 0)
        f = zz - lam
        F = embed_symmetric(f)
        w = np.array([0.25 - 0.3j])
        vf = sarason_series(D1, f)(w)
        assert eval_scalar(free_sarason(F, "right"), w) == pytest.approx(vf, abs=1e-12)
        assert eval_scalar(free_sarason(F, "left"), w) == pytest.approx(vf, abs=1e-12)

    def test_two_variable_bridge(self):
        f = random_poly(DA2, 3, np.random.default_rng(3))
        F = embed_symmetric(f)
        w = np.array([0.2 + 0.1j, -0.3j])
        assert eval_scalar(free_sarason(F, "right"), w) == pytest.approx(sarason_series(DA2, f)(w), abs=1e-12)

    def test_identity_with_left_sarason(self):
        # ||pF||^2 = Re <F, V_p F> with V_p the left Sarason function of p
        rng = np.random.default_rng(17)
        for _ in range(20):
            p, F = random_free_poly(2, 2, rng), random_free_poly(2, 2, rng)
            lhs = fock_norm(free_mul(p, F)) ** 2
            rhs = fock_inner(F, free_mul(free_sarason(p, "left"), F)).real
            assert abs(lhs - rhs) <= 1e-10 * (1 + fock_norm(p) ** 2 * fock_norm(F) ** 2)

    def test_equal_right_sarason_gives_equal_norms(self):
        rng = np.random.default_rng(9)
        F = random_free_poly(2, 2, rng)
        G = free_mul(F, x(2, 1)) * np.exp(0.7j)
        assert free_sarason(F, "right", 3).allclose(free_sarason(G, "right", 3), atol=1e-12)
        for _ in range(10):
            p = random_free_poly(2, 3, rng)
            assert fock_norm(free_mul(p, F)) == pytest.approx(fock_norm(free_mul(p, G)), abs=1e-8)


class TestEmbedding:
    def test_examples(self):
        assert embed_symmetric(MultiPoly.constant(DA2, 1)) == ONE
        assert embed_symmetric(z1 ** 2) == x(1, 1)
        F = embed_symmetric(z1 * z2)
        assert F == (x(1, 2) + x(2, 1)) / 2
        assert fock_norm(F) ** 2 == pytest.approx(0.5)

    def test_wrong_family(self):
        D = KernelSpace.dirichlet()
        with pytest.raises(WrongFamilyError):
            embed_symmetric(MultiPoly.variable(D, 0))

    def test_isometry_and_symmetry(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            f = random_poly(DA2, 4, rng)
            F = embed_symmetric(f)
            assert abs(fock_norm(F) ** 2 - norm_sq(DA2, f)) <= 1e-13 * max(1.0, norm_sq(DA2, f))
            assert flip(F).allclose(F, atol=0)

    def test_inner_products_preserved(self):
        rng = np.random.default_rng(6)
        from pickfactor.kernels import inner_product

        f, g = random_poly(DA2, 3, rng), random_poly(DA2, 3, rng)
        assert fock_inner(embed_symmetric(f), embed_symmetric(g)) == pytest.approx(
            inner_product(DA2, f, g), abs=1e-13)

    def test_moment_bridge(self):
        f = 1 + 2 * z1 * z2
        g = subinner_free_outer(DA2, f).outer
        h = 1 + 2 * z1 ** 2
        mf = symmetric_moments(embed_symmetric(f), 2)
        mg = symmetric_moments(embed_symmetric(g), 2)
        mh = symmetric_moments(embed_symmetric(h), 2)
        assert max(abs(mf[w] - mg[w]) for w in mf) <= 1e-8
        assert max(abs(mf[w] - mh[w]) for w in mf) > 1e-3
        prof_f, prof_h = moment_profile(DA2, f), moment_profile(DA2, h)
        assert np.max(np.abs(prof_f.vector() - prof_h.vector())) > 1e-3


class TestOuterDefect:
    @pytest.mark.parametrize("n", [0, 1, 3, 6])
    def test_trivial(self, n):
        assert outer_defect(ONE, n) == pytest.approx(0.0, abs=1e-14)
        assert outer_defect(x(1), n) == pytest.approx(1.0, abs=1e-14)

    def test_zero(self):
        assert outer_defect(FreePoly(2, {}), 2) == 1.0

    def test_six_word_rate(self):
        F = six_word_poly()
        assert len(SIX_WORDS) == 6
        curve = outer_defect_curve(F, [4, 8, 12])
        for n, d in curve:
            assert d <= six_word_bound(n) + 1e-10
        assert curve[0][1] > curve[1][1] > curve[2][1]

    def test_non_increasing(self):
        F = random_free_poly(2, 2, np.random.default_rng(2))
        vals = [d for _, d in outer_defect_curve(F, range(7))]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_against_dense_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            F = random_free_poly(2, 2, rng, density=0.7)
            if F.is_zero():
                continue
            N = 3
            rows = list(all_words(2, N + F.degree))
            pos = {w: i for i, w in enumerate(rows)}
            cols = []
            for v in all_words(2, N):
                col = np.zeros(len(rows), dtype=complex)
                for u, c in F.coeffs.items():
                    col[pos[v + u]] += c
                cols.append(col)
            b = np.zeros(len(rows), dtype=complex)
            b[0] = 1
            assert outer_defect(F, N) == pytest.approx(dense_lstsq_distance(cols, b), abs=1e-10)

    def test_sparse_path_matches_dense(self, monkeypatch):
        F = six_word_poly()
        dense = outer_defect(F, 6)
        monkeypatch.setattr(fock, "DENSE_LIMIT", 0)
        assert outer_defect(F, 6) == pytest.approx(dense, abs=1e-10)

    def test_right_defect_uses_flip(self):
        F = ONE - 0.5 * x(1, 2)
        assert right_outer_defect(F, 4) == pytest.approx(outer_defect(flip(F), 4))

    def test_status(self):
        assert outer_status(ONE, 4)[0] == "likely outer"
        status, delta = outer_status(x(1), 4)
        assert status == "undetermined" and delta == pytest.approx(1.0)

    @pytest.mark.parametrize("f", [(1 + z1 * z2) / math.sqrt(2), 1 - z1 ** 2 * z2 ** 2, 1 + 0.5 * z1])
    def test_free_outer_bridge(self, f):
        ok, _ = is_free_outer(DA2, f)
        assert ok
        limit = word_budget(2) - f.degree
        assert outer_defect(embed_symmetric(f), limit) < 0.1

    def test_embedded_coordinate_stays_at_one(self):
        F = embed_symmetric(z1)
        assert outer_defect(F, 8) == pytest.approx(1.0)
