"""Subinner/free outer factorization of polynomials in diagonal Pick spaces.

The free outer factor g of f is the element of the star-invariant span of f
that maximizes Re g(0) among all g with the same moment profile as f. That
program is a small nonconvex QCQP in the real and imaginary parts of the
coordinates of g; it is solved by multistart SLSQP followed by a Newton
polish of the KKT system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import bisect, minimize

from .errors import (
    DegreeExceededError,
    NotPickSpaceError,
    SpaceMismatchError,
    ZeroPolynomialError,
)
from .kernels import (
    KernelRatio,
    KernelSpace,
    MultiPoly,
    adjoint_monomial,
    ball_grid,
    kaluza_coefficients,
    mi_add,
    multi_indices,
    multinomial,
    multiplication_matrix,
    norm_sq,
    order,
    series_quotient,
    weight_vector,
)
from .moments import MomentProfile, moment_profile

RANK_TOL = 1e-10
ZERO_MARGIN = 1e-12


@dataclass(frozen=True)
class FactorOptions:
    tol_moments: float = 1e-10
    restarts: int = 16
    seed: int = 0
    probe_degree: int | None = None


# ---------------------------------------------------------------------------
# star-invariant span
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StarInvariantBasis:
    """Orthonormal basis of span{M_{z^beta}^* f : |beta| <= deg f}."""

    space: KernelSpace
    sources: tuple[MultiPoly, ...]
    vectors: tuple[MultiPoly, ...]
    max_order: int
    coords: np.ndarray = field(repr=False)   # orthonormal monomial coordinates, one column per vector

    @property
    def source(self) -> MultiPoly:
        return self.sources[0]

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def projection_residual(self, h: MultiPoly) -> float:
        """Distance from h to the span, in the space norm."""
        u = _ortho_coords(self.space, h, self.max_order)
        return float(np.linalg.norm(u - self.coords @ (self.coords.conj().T @ u)))

    def coordinates(self, h: MultiPoly) -> np.ndarray:
        return self.coords.conj().T @ _ortho_coords(self.space, h, self.max_order)

    def combine(self, c: np.ndarray, chop: float = 1e-15) -> MultiPoly:
        u = self.coords @ c
        w = weight_vector(self.space, self.max_order)
        return MultiPoly.from_vector(self.space, u / np.sqrt(w), self.max_order, chop=chop)


def _ortho_coords(space: KernelSpace, h: MultiPoly, max_order: int) -> np.ndarray:
    return h.to_vector(max_order) * np.sqrt(weight_vector(space, max_order))


def _joint_basis(space: KernelSpace, fs: Sequence[MultiPoly]) -> StarInvariantBasis:
    fs = tuple(fs)
    for f in fs:
        if f.space != space:
            raise SpaceMismatchError("polynomial does not belong to the given space")
    nonzero = [f for f in fs if not f.is_zero()]
    if not nonzero:
        raise ZeroPolynomialError("star-invariant span of the zero polynomial")
    top = max(f.degree for f in nonzero)
    space.check_degree(top)
    cols = []
    for f in nonzero:
        for beta in multi_indices(space.dim, f.degree):
            cols.append(_ortho_coords(space, adjoint_monomial(space, beta, f), top))
    mat = np.column_stack(cols)
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * s[0]))
    coords = u[:, :rank]
    # fix column phases so the constant-term row is real and nonnegative
    for j in range(rank):
        pivot = coords[0, j] if abs(coords[0, j]) > 1e-12 else coords[np.argmax(np.abs(coords[:, j])), j]
        coords[:, j] *= np.conj(pivot) / abs(pivot)
    w = np.sqrt(weight_vector(space, top))
    vectors = tuple(MultiPoly.from_vector(space, coords[:, j] / w, top, chop=1e-15)
                    for j in range(rank))
    return StarInvariantBasis(space, fs, vectors, top, coords)


def star_invariant_basis(space: KernelSpace, f: MultiPoly) -> StarInvariantBasis:
    if f.is_zero():
        raise ZeroPolynomialError("star-invariant span of the zero polynomial")
    return _joint_basis(space, [f])


# ---------------------------------------------------------------------------
# the moment-matching program
# ---------------------------------------------------------------------------

def _shift_matrix(space: KernelSpace, alpha, max_order: int) -> np.ndarray:
    """S with (S u) = orthonormal coordinates of z^alpha * g, truncated to degree max_order."""
    idx = multi_indices(space.dim, max_order)
    pos = {a: i for i, a in enumerate(idx)}
    w = weight_vector(space, max_order)
    mat = np.zeros((len(idx), len(idx)))
    for j, b in enumerate(idx):
        g = mi_add(b, alpha)
        i = pos.get(g)
        if i is not None:
            mat[i, j] = math.sqrt(w[i] / w[j])
    return mat


def _realify(h: np.ndarray) -> np.ndarray:
    """Real symmetric S with c^H h c = x^T S x for Hermitian h, x = (Re c, Im c)."""
    a, b = h.real, h.imag
    return np.block([[a, -b], [b, a]])


@dataclass
class _Program:
    quad: np.ndarray            # (m, n, n) symmetric
    lin: np.ndarray             # (m, n)
    target: np.ndarray          # (m,)
    objective: np.ndarray       # maximize objective @ x

    def h(self, x):
        return (self.quad @ x) @ x + self.lin @ x - self.target

    def jac(self, x):
        return 2.0 * (self.quad @ x) + self.lin

    def stationarity(self, x) -> tuple[float, np.ndarray]:
        jac = self.jac(x)
        mu, *_ = np.linalg.lstsq(jac.T, self.objective, rcond=None)
        return float(np.linalg.norm(jac.T @ mu - self.objective)), mu


def _build_program(basis: StarInvariantBasis, target: MomentProfile) -> _Program:
    space = basis.space
    D = basis.max_order
    U = basis.coords
    r = U.shape[1]
    quads, lins, targets = [], [], []
    zero = (0,) * space.dim
    for alpha in multi_indices(space.dim, target.order):
        if order(alpha) > D:
            if abs(target[alpha]) > 0:
                raise DegreeExceededError("target moments beyond the span degree")
            continue
        q = U.conj().T @ _shift_matrix(space, alpha, D) @ U
        h1 = (q + q.conj().T) / 2
        h2 = (q - q.conj().T) / 2j
        quads.append(_realify(h1))
        targets.append(target[alpha].real)
        if alpha != zero:
            quads.append(_realify(h2))
            targets.append(target[alpha].imag)
    quads = np.array(quads)
    targets = np.array(targets)
    # merge linearly dependent constraint forms
    flat = quads.reshape(len(quads), -1)
    scale = max(np.linalg.norm(flat, axis=1).max(), 1e-300)
    uu, s, vt = np.linalg.svd(flat / scale, full_matrices=False)
    keep = s > 1e-12
    combo = (uu[:, keep] / s[keep]).T / scale       # rows combine original constraints
    quads = np.einsum("kl,lij->kij", combo, quads)
    quads = (quads + quads.transpose(0, 2, 1)) / 2
    targets = combo @ targets
    lins = np.zeros((len(targets), 2 * r))
    v = U[0, :]                                    # g(0) = v . c since ||1|| = 1
    im_row = np.concatenate([v.imag, v.real])
    objective = np.concatenate([v.real, -v.imag])
    quads = np.concatenate([quads, np.zeros((1, 2 * r, 2 * r))])
    lins = np.vstack([lins, im_row])
    targets = np.append(targets, 0.0)
    return _Program(quads, lins, targets, objective)


def _restore(prog: _Program, x: np.ndarray, iters: int = 60) -> np.ndarray:
    """Gauss-Newton projection onto the constraint set."""
    for _ in range(iters):
        res = prog.h(x)
        if np.linalg.norm(res) < 1e-15:
            break
        step, *_ = np.linalg.lstsq(prog.jac(x), res, rcond=None)
        x = x - step
    return x


def _kkt_polish(prog: _Program, x: np.ndarray, iters: int = 40) -> np.ndarray:
    n = x.size
    m = prog.target.size
    _, mu = prog.stationarity(x)
    x0 = x.copy()
    for _ in range(iters):
        jac = prog.jac(x)
        grad = jac.T @ mu - prog.objective
        res = np.concatenate([grad, prog.h(x)])
        if np.linalg.norm(res) < 1e-15:
            break
        hess = 2.0 * np.einsum("k,kij->ij", mu, prog.quad)
        kkt = np.block([[hess, jac.T], [jac, np.zeros((m, m))]])
        step, *_ = np.linalg.lstsq(kkt, -res, rcond=None)
        x = x + step[:n]
        mu = mu + step[n:]
        if np.linalg.norm(x - x0) > 0.25 * max(np.linalg.norm(x0), 1e-12):
            return x0
    return x


def _local_solve(prog: _Program, x0: np.ndarray) -> np.ndarray:
    x = _restore(prog, x0)
    res = minimize(
        lambda y: -prog.objective @ y,
        x,
        jac=lambda y: -prog.objective,
        constraints=[{"type": "eq", "fun": prog.h, "jac": prog.jac}],
        method="SLSQP",
        options={"ftol": 1e-12, "maxiter": 60},
    )
    x = _restore(prog, res.x)
    polished = _restore(prog, _kkt_polish(prog, x))
    if (np.linalg.norm(prog.h(polished)) <= max(np.linalg.norm(prog.h(x)), 1e-14)
            and prog.objective @ polished >= prog.objective @ x - 1e-9):
        x = polished
    return x


@dataclass(frozen=True)
class _Candidate:
    x: np.ndarray
    value: float
    residual: float
    index: int


def _to_real(c: np.ndarray) -> np.ndarray:
    return np.concatenate([c.real, c.imag])


def _to_complex(x: np.ndarray) -> np.ndarray:
    r = x.size // 2
    return x[:r] + 1j * x[r:]


def _rotate_positive(c: np.ndarray, v: np.ndarray) -> np.ndarray:
    val = v @ c
    if abs(val) < 1e-14:
        return c
    return c * np.conj(val) / abs(val)


def _maximize(basis: StarInvariantBasis, target: MomentProfile, seeds: Sequence[np.ndarray],
              options: FactorOptions, extra_starts: Sequence[np.ndarray] = ()):
    """Run the multistart program.

    Returns (best coordinates, number of local solves, stationarity, feasible flag).
    """
    prog = _build_program(basis, target)
    scale = target.norm_sq
    if scale <= 0:
        raise ZeroPolynomialError("target moment profile has zero norm")
    prog_s = _Program(prog.quad, prog.lin, prog.target / np.where(prog.lin.any(axis=1), 1.0, scale),
                      prog.objective)
    root = math.sqrt(scale)
    v = basis.coords[0, :]
    r = basis.dimension
    rng = np.random.default_rng(options.seed)
    starts = [_rotate_positive(np.asarray(c, dtype=complex), v) / root
              for c in list(seeds) + list(extra_starts)]
    first = int(np.argmax(np.abs(v)))
    e = np.zeros(r, dtype=complex)
    e[first] = 1.0
    starts.append(e)
    for _ in range(options.restarts):
        c = rng.normal(size=r) + 1j * rng.normal(size=r)
        starts.append(_rotate_positive(c / np.linalg.norm(c), v))

    candidates: list[_Candidate] = []
    for i, c in enumerate(starts):
        if i < len(seeds):
            # the seed itself is exactly feasible; keep it as a candidate
            x = _to_real(c)
            candidates.append(_Candidate(x, float(prog_s.objective @ x),
                                         float(np.max(np.abs(prog_s.h(x)))), -1 - i))
        x = _local_solve(prog_s, _to_real(c))
        candidates.append(_Candidate(x, float(prog_s.objective @ x),
                                     float(np.max(np.abs(prog_s.h(x)))), i))
    tol = options.tol_moments / scale
    feasible = [cd for cd in candidates if cd.residual <= tol]
    pool = feasible or candidates
    if feasible:
        best = min(pool, key=lambda cd: (-round(cd.value, 12), cd.index))
    else:
        best = min(pool, key=lambda cd: (cd.residual, cd.index))
    stat, _ = prog_s.stationarity(best.x)
    return _to_complex(best.x) * root, len(starts), stat, bool(feasible)


def _finish_outer(basis: StarInvariantBasis, c: np.ndarray) -> MultiPoly:
    c = _rotate_positive(c, basis.coords[0, :])
    g = basis.combine(c)
    g0 = g[(0,) * basis.space.dim]
    if g0 != 0:
        g = g * (abs(g0) / g0)                 # exact real positive constant term
        coeffs = dict(g.coeffs)
        coeffs[(0,) * basis.space.dim] = complex(abs(g0))
        g = MultiPoly(basis.space, coeffs)
    return g


def _require_pick(space: KernelSpace) -> None:
    if not space.is_pick:
        raise NotPickSpaceError(f"{space.family} kernel is not a validated complete Pick kernel")


@dataclass(frozen=True)
class FactorResult:
    outer: MultiPoly
    subinner: KernelRatio
    norm_match: float
    moment_residual: float
    gain: float
    restarts_used: int
    converged: bool
    stationarity: float
    zero_free: bool

    @property
    def source(self) -> MultiPoly:
        return self.subinner.numerator


def subinner_free_outer(space: KernelSpace, f: MultiPoly,
                        options: FactorOptions | None = None) -> FactorResult:
    """Factor f = phi * g with g free outer, g(0) > 0 and ||g|| = ||f||."""
    options = options or FactorOptions()
    if f.space != space:
        raise SpaceMismatchError("polynomial does not belong to the given space")
    if f.is_zero():
        raise ZeroPolynomialError("cannot factor the zero polynomial")
    _require_pick(space)
    basis = star_invariant_basis(space, f)
    target = moment_profile(space, f)
    c, used, stat, feasible = _maximize(basis, target, [basis.coordinates(f)], options)
    g = _finish_outer(basis, c)
    return _result(space, f, g, target, used, stat, feasible, options)


def _result(space, f, g, target, used, stat, feasible, options) -> FactorResult:
    prof = moment_profile(space, g, target.order)
    residual = float(np.max(np.abs(prof.vector() - target.vector())))
    nf = math.sqrt(target.norm_sq)
    ng = math.sqrt(norm_sq(space, g))
    zero = (0,) * space.dim
    phi = KernelRatio(f, g)
    zero_free = phi.check_zero_free(ball_grid(space.dim), margin=ZERO_MARGIN)
    converged = bool(feasible and residual <= options.tol_moments and stat <= 1e-6 and zero_free)
    return FactorResult(
        outer=g,
        subinner=phi,
        norm_match=abs(ng - nf),
        moment_residual=residual,
        gain=float(g[zero].real - abs(f[zero])),
        restarts_used=used,
        converged=converged,
        stationarity=stat,
        zero_free=zero_free,
    )


def is_free_outer(space: KernelSpace, f: MultiPoly, tol: float = 1e-8,
                  options: FactorOptions | None = None) -> tuple[bool, MultiPoly | None]:
    res = subinner_free_outer(space, f, options)
    if res.gain <= tol:
        return True, None
    return False, res.outer


# ---------------------------------------------------------------------------
# contraction certificates
# ---------------------------------------------------------------------------

def column_residual(space: KernelSpace, numerators: Sequence[MultiPoly], g: MultiPoly,
                    probe_degree: int) -> float:
    """max over p (deg <= probe_degree) of sum ||f_n p||^2 / ||g p||^2 - 1.

    With h = g p this is the largest value of sum ||phi_n h||^2 / ||h||^2 - 1
    for phi_n = f_n / g; it must be <= 0 for a contractive column.
    """
    mg = multiplication_matrix(space, g, probe_degree)
    b = mg.conj().T @ mg
    a = np.zeros_like(b)
    for f in numerators:
        if f.is_zero():
            continue
        mf = multiplication_matrix(space, f, probe_degree)
        a += mf.conj().T @ mf
    top = scipy.linalg.eigh(a, b, eigvals_only=True)[-1]
    return float(top - 1.0)


def _probe_degree(space: KernelSpace, deg: int, requested: int | None) -> int:
    room = space.working_degree - deg
    if room < 0:
        raise DegreeExceededError("no degree budget left for probe polynomials")
    if requested is None:
        return min(4 if space.dim == 1 else 3, room)
    if requested > room:
        raise DegreeExceededError(f"probe degree {requested} exceeds budget {room}")
    return requested


def contraction_certificate(space: KernelSpace, result: FactorResult, probe_degree: int | None = None) -> float:
    """Largest ratio ||f p|| / ||g p|| over probe polynomials p (should be <= 1)."""
    f, g = result.subinner.numerator, result.outer
    n = _probe_degree(space, max(f.degree, g.degree), probe_degree)
    return math.sqrt(max(column_residual(space, [f], g, n) + 1.0, 0.0))


# ---------------------------------------------------------------------------
# vector versions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CommonFactorResult:
    outer: MultiPoly
    ratios: tuple[KernelRatio, ...]
    column_residual: float
    moment_residual: float
    restarts_used: int
    converged: bool
    stationarity: float


def common_free_outer(space: KernelSpace, fs: Sequence[MultiPoly],
                      options: FactorOptions | None = None) -> CommonFactorResult:
    """Common free outer factor g of a finite family, with f_n = phi_n g."""
    options = options or FactorOptions()
    fs = list(fs)
    if not fs:
        raise ValueError("common_free_outer needs at least one function")
    _require_pick(space)
    basis = _joint_basis(space, fs)
    top = basis.max_order
    target = None
    for f in fs:
        if f.is_zero():
            continue
        prof = moment_profile(space, f, top)
        target = prof if target is None else target + prof
    nonzero = [f for f in fs if not f.is_zero()]
    # a single function is itself feasible; rescaled members of a family are only starts
    seeds = [basis.coordinates(nonzero[0])] if len(nonzero) == 1 else []
    starts = [] if seeds else [basis.coordinates(f) * math.sqrt(target.norm_sq / norm_sq(space, f))
                               for f in nonzero]
    c, used, stat, feasible = _maximize(basis, target, seeds, options, extra_starts=starts)
    g = _finish_outer(basis, c)
    prof = moment_profile(space, g, top)
    residual = float(np.max(np.abs(prof.vector() - target.vector())))
    n = _probe_degree(space, top, options.probe_degree)
    col = column_residual(space, fs, g, n)
    ratios = tuple(KernelRatio(f, g) for f in fs)
    converged = bool(feasible and residual <= options.tol_moments and stat <= 1e-6
                     and col <= 1e-8)
    return CommonFactorResult(g, ratios, col, residual, used, converged, stat)


@dataclass(frozen=True)
class WeakProductResult:
    phi: KernelRatio              # (g1 g2) / f^2 with g_i = f_i / ||f_i||
    outer: MultiPoly              # f
    norm: float                   # ||f||^2
    scale: float                  # ||f1|| ||f2||, so f1 f2 = scale * phi * f^2
    product_residual: float
    converged: bool


def weak_product_factor(space: KernelSpace, f1: MultiPoly, f2: MultiPoly,
                        options: FactorOptions | None = None) -> WeakProductResult:
    """Write f1 f2 / (||f1|| ||f2||) = phi f^2 with (phi, f) a subinner/free outer pair."""
    if f1.is_zero() or f2.is_zero():
        raise ZeroPolynomialError("weak product of a zero factor")
    n1 = math.sqrt(norm_sq(space, f1))
    n2 = math.sqrt(norm_sq(space, f2))
    g1, g2 = f1 / n1, f2 / n2
    u1 = (g1 + g2) * 0.5
    u2 = (g1 - g2) * 0.5j
    res = common_free_outer(space, [u1, u2], options)
    f = res.outer
    num = u1 * u1 + u2 * u2
    prod = g1 * g2
    keys = set(num.coeffs) | set(prod.coeffs)
    resid = max((abs(num[k] - prod[k]) for k in keys), default=0.0)
    phi = KernelRatio(num, f * f)
    return WeakProductResult(phi, f, norm_sq(space, f), n1 * n2, float(resid),
                             bool(res.converged and resid <= 1e-10))


@dataclass(frozen=True)
class ThroughFactorResult:
    components: tuple[MultiPoly, ...]     # f_beta in the factor space
    mult_factors: tuple[MultiPoly, ...]   # g_beta with k/s = sum g_beta(z) conj(g_beta(w))
    outer: MultiPoly                      # g in the factor space
    phi: KernelRatio                      # (sum g_beta f_beta) / g
    norm_residual: float
    identity_residual: float
    common: CommonFactorResult


def kernel_ratio_series(space_k: KernelSpace, space_s: KernelSpace, n: int) -> np.ndarray:
    """Coefficients e_m of (sum a^k_m t^m) / (sum a^s_m t^m), clipped at 0."""
    e = series_quotient(space_k.coeffs(n), space_s.coeffs(n), n)
    if np.any(e < -1e-14):
        raise NotPickSpaceError("k/s is not a positive factor: negative ratio coefficient")
    return np.clip(e, 0.0, None)


def factor_through_subspace(f: MultiPoly, space_k: KernelSpace, space_s: KernelSpace,
                            options: FactorOptions | None = None) -> ThroughFactorResult:
    """f = phi g with g free outer in H_s, ||g||_s = ||f||_k and phi a contractive
    multiplier H_s -> H_k, built from the componentwise lift f -> (f_beta)."""
    if space_k.dim != space_s.dim:
        raise SpaceMismatchError("kernel spaces have different dimensions")
    if f.space != space_k:
        raise SpaceMismatchError("f must belong to space_k")
    if f.is_zero():
        raise ZeroPolynomialError("cannot factor the zero polynomial")
    _require_pick(space_s)
    deg = f.degree
    space_s.check_degree(deg)
    e = kernel_ratio_series(space_k, space_s, deg)
    dim = space_k.dim
    from .kernels import monomial_norm_sq
    comps, mults = [], []
    for beta in multi_indices(dim, deg):
        m = order(beta)
        if e[m] == 0.0:
            continue
        cb = math.sqrt(e[m] * multinomial(beta))
        out = {}
        for gamma in multi_indices(dim, deg - m):
            gb = mi_add(gamma, beta)
            coef = f[gb]
            if coef == 0:
                continue
            out[gamma] = cb * coef * monomial_norm_sq(space_k, gb) * space_s.coeff(order(gamma)) \
                * multinomial(gamma)
        comp = MultiPoly(space_s, out)
        if comp.is_zero():
            continue
        comps.append(comp)
        mults.append(MultiPoly.monomial(space_s, beta, cb))
    common = common_free_outer(space_s, comps, options)
    g = common.outer
    num = MultiPoly(space_s, {})
    for gb, fb in zip(mults, comps):
        num = num + gb * fb
    f_as_s = MultiPoly(space_s, f.coeffs)
    keys = set(num.coeffs) | set(f_as_s.coeffs)
    ident = max((abs(num[k] - f_as_s[k]) for k in keys), default=0.0)
    total = sum(norm_sq(space_s, c) for c in comps)
    norm_res = abs(total - norm_sq(space_k, f))
    return ThroughFactorResult(tuple(comps), tuple(mults), g, KernelRatio(num, g),
                               float(norm_res), float(ident), common)


# ---------------------------------------------------------------------------
# Dirichlet zero-free radii
# ---------------------------------------------------------------------------

def dirichlet_kaluza(n: int) -> np.ndarray:
    """c_1..c_n of the Dirichlet kernel 1 / (1 - sum c_k t^k); entry 0 unused."""
    a = [1.0 / (k + 1) for k in range(n + 1)]
    c = kaluza_coefficients(a, n)
    if np.any(c[1:] <= 0):
        raise ArithmeticError("Kaluza coefficients of the Dirichlet kernel must be positive")
    return c


def dirichlet_truncated_radius(n: int) -> float:
    """R_n > 1 with sum_{k<=n} c_k R^{2k} = 1; free outer polynomials of degree <= n
    in the Dirichlet space have no zeros in |z| < R_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    c = dirichlet_kaluza(n)

    def gap(r):
        return sum(c[k] * r ** (2 * k) for k in range(1, n + 1)) - 1.0

    return float(bisect(gap, 1.0, math.sqrt(2.0), xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200))
