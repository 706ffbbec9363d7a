"""Pick interpolation: Pick/Gram matrices, classification, extremal solutions and
subinner approximants built from extremal restrictions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    BisectionError,
    CoincidentPointsError,
    DegenerateKernelError,
    NotExtremalError,
)
from .kernels import (
    KernelCombination,
    KernelRatio,
    KernelSpace,
    _as_point,
    check_in_ball,
    kernel_series,
    pairing,
)

PSD_TOL = 1e-10
RANK_TOL = 1e-10
INTERP_TOL = 1e-8
T_TOL = 1e-12


@dataclass(frozen=True)
class PickProblem:
    space: KernelSpace
    points: np.ndarray          # (n, d)
    targets: np.ndarray         # (n,)
    truncation: int | None = None

    def __post_init__(self):
        d = self.space.dim
        pts = np.asarray(self.points, dtype=complex)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if d == 1 else pts.reshape(1, -1)
        pts = np.array([_as_point(p, d) for p in pts])
        vals = np.asarray(self.targets, dtype=complex).ravel()
        if len(pts) == 0 or len(pts) != len(vals):
            raise ValueError("need one target per point and at least one point")
        for p in pts:
            check_in_ball(p)
        for i in range(len(pts)):
            for j in range(i):
                if np.linalg.norm(pts[i] - pts[j]) <= 1e-12:
                    raise CoincidentPointsError(f"points {j} and {i} coincide")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "targets", vals)

    @property
    def size(self) -> int:
        return len(self.targets)


@dataclass(frozen=True)
class PickMatrices:
    K: np.ndarray
    P: np.ndarray
    eigvals_P: np.ndarray
    rank_K: int
    rank_P: int
    slack: float
    hermitian_residual: float = field(default=0.0)


def gram_matrix(space: KernelSpace, points: np.ndarray, truncation: int | None = None):
    """K[i, j] = k_{points[i]}(points[j]) and the largest truncation tail."""
    n = len(points)
    K = np.empty((n, n), dtype=complex)
    slack = 0.0
    for i in range(n):
        for j in range(n):
            kv = kernel_series(space, pairing(points[j], points[i]), truncation)
            K[i, j] = kv.value
            slack = max(slack, kv.tail_bound)
    return K, slack


def _rank(mat: np.ndarray, scale: float | None = None) -> int:
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0:
        return 0
    ref = s[0] if scale is None else scale
    if ref == 0:
        return 0
    return int(np.sum(s > RANK_TOL * ref))


def build_pick(problem: PickProblem) -> PickMatrices:
    K, slack = gram_matrix(problem.space, problem.points, problem.truncation)
    w = problem.targets
    P = (1.0 - np.outer(w.conj(), w)) * K
    herm = max(float(np.max(np.abs(K - K.conj().T))) / max(np.max(np.abs(K)), 1e-300),
               float(np.max(np.abs(P - P.conj().T))) / max(np.max(np.abs(P)), 1e-300))
    if herm > 1e-12:
        raise ArithmeticError(f"kernel matrices are not Hermitian (residual {herm:.3g})")
    K = (K + K.conj().T) / 2
    P = (P + P.conj().T) / 2
    eig = np.linalg.eigvalsh(P)
    # rank of P measured against the scale of K so that tiny P counts as rank 0
    sk = np.linalg.svd(K, compute_uv=False)[0]
    return PickMatrices(K, P, eig, _rank(K), _rank(P, sk), slack, herm)


def _psd_threshold(mats: PickMatrices) -> float:
    return PSD_TOL * abs(np.trace(mats.P).real)


def classify(problem: PickProblem) -> str:
    mats = build_pick(problem)
    return classify_matrices(mats)


def classify_matrices(mats: PickMatrices) -> str:
    if mats.eigvals_P[0] < -_psd_threshold(mats):
        return "infeasible"
    if mats.rank_P < mats.rank_K:
        return "extremal"
    return "solvable"


@dataclass(frozen=True)
class ExtremalSolution:
    phi: KernelRatio
    weights: np.ndarray           # a with f = sum a_j k_j
    interp_residual: float
    norm_residual: float          # | ||f||^2 - ||g||^2 | from Gram arithmetic
    alternative_residual: float   # disagreement with a second null vector choice (0 if none)


def _null_vectors(mats: PickMatrices) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mats.P)
    sk = np.linalg.svd(mats.K, compute_uv=False)[0]
    null = vecs[:, vals <= RANK_TOL * sk]
    if null.shape[1] == 0:
        null = vecs[:, :1]
    return null


def extremal_solve(problem: PickProblem, check_classification: bool = True) -> ExtremalSolution:
    """phi = f / g with f = sum a_j k_j, g = sum a_j conj(w_j) k_j, P^T a = 0."""
    mats = build_pick(problem)
    if check_classification and classify_matrices(mats) != "extremal":
        raise NotExtremalError(f"problem is {classify_matrices(mats)}, not extremal")
    null = _null_vectors(mats)
    K = mats.K
    # ||f||^2 - ||g||^2 = a^H P^T a, so a is a conjugated null vector of P
    cands = [np.conj(null[:, j]) for j in range(null.shape[1])]
    score = [np.linalg.norm(K @ a) for a in cands]
    order_ = np.argsort(score)[::-1]
    best = cands[order_[0]]
    if score[order_[0]] <= 1e-10:
        raise DegenerateKernelError("every null vector of P lies in the null space of K")
    phi = _ratio(problem, best)
    interp = _interp_residual(problem, phi)
    w = problem.targets
    Kt = K.T
    norm_f = np.vdot(best, Kt @ best).real
    norm_g = np.vdot(w.conj() * best, Kt @ (w.conj() * best)).real
    alt = 0.0
    if len(order_) > 1 and score[order_[1]] > 1e-6 * score[order_[0]]:
        other = _ratio(problem, cands[order_[1]])
        probes = _probe_points(problem.space.dim)
        alt = max(abs(phi(p) - other(p)) for p in probes)
    return ExtremalSolution(phi, best, interp, abs(norm_f - norm_g), float(alt))


def _ratio(problem: PickProblem, a: np.ndarray) -> KernelRatio:
    f = KernelCombination(problem.space, problem.points, a, problem.truncation)
    g = KernelCombination(problem.space, problem.points, a * problem.targets.conj(), problem.truncation)
    return KernelRatio(f, g)


def _interp_residual(problem: PickProblem, phi: Callable) -> float:
    return float(max(abs(phi(p) - w) for p, w in zip(problem.points, problem.targets)))


def _probe_points(dim: int, n: int = 8, seed: int = 12345) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        out.append(v * 0.7 * rng.uniform() / np.linalg.norm(v))
    return out


# ---------------------------------------------------------------------------
# restricted multiplier norms and approximants
# ---------------------------------------------------------------------------

def restricted_norm(space: KernelSpace, points: np.ndarray, values: np.ndarray,
                    truncation: int | None = None) -> float:
    """Norm of the multiplier data on the point set: smallest c with
    c^2 K - (conj(v_i) v_j K_ij) PSD."""
    K, _ = gram_matrix(space, points, truncation)
    K = (K + K.conj().T) / 2
    A = np.conj(values)[:, None] * K * values[None, :]
    kv, kvec = np.linalg.eigh(K)
    keep = kv > RANK_TOL * kv[-1]
    q = kvec[:, keep] / np.sqrt(kv[keep])
    top = np.linalg.eigvalsh(q.conj().T @ A @ q)[-1]
    return float(np.sqrt(max(top, 0.0)))


def _min_eig(space, points, values, truncation) -> float:
    problem = PickProblem(space, points, values, truncation)
    mats = build_pick(problem)
    return float(mats.eigvals_P[0] / max(abs(np.trace(mats.K).real), 1e-300))


@dataclass(frozen=True)
class ApproximantStage:
    points: np.ndarray
    t: float
    direction: KernelCombination
    phi: KernelRatio
    min_eig: float
    interp_residual: float


def default_direction(space: KernelSpace, points: np.ndarray, previous: np.ndarray | None,
                      truncation: int | None = None) -> KernelCombination:
    """psi in span{k_x : x in points} orthogonal to span{k_x : x in previous}, obtained
    by projecting the sum of the new kernels; scaled to unit restricted norm."""
    n = len(points)
    K, _ = gram_matrix(space, points, truncation)
    K = (K + K.conj().T) / 2
    prev_idx = []
    if previous is not None and len(previous):
        for p in previous:
            hits = [i for i in range(n) if np.linalg.norm(points[i] - p) <= 1e-12]
            if not hits:
                raise ValueError("point schedule must be nested")
            prev_idx.append(hits[0])
    new_idx = [i for i in range(n) if i not in prev_idx]
    if not new_idx:
        raise ValueError("stage adds no new points")
    c = np.zeros(n, dtype=complex)
    c[new_idx] = 1.0
    if prev_idx:
        # <sum_j c_j k_j, k_i> = sum_j c_j K[j, i]; zero it on the previous points
        Kpp = K[np.ix_(prev_idx, prev_idx)]
        rhs = (K.T @ c)[prev_idx]
        sol = np.linalg.lstsq(Kpp.T, rhs, rcond=None)[0]
        c[prev_idx] -= sol
    values = K.T @ c
    scale = restricted_norm(space, points, values, truncation)
    if scale <= 1e-14:
        raise BisectionError("direction vanishes on the point set")
    return KernelCombination(space, points, c / scale, truncation)


def _bracket(fun: Callable[[float], float], lo: float, hi: float, steps: int = 40):
    ts = np.linspace(lo, hi, steps + 1)
    prev_t, prev_v = ts[0], fun(ts[0])
    for t in ts[1:]:
        v = fun(t)
        if v < 0 <= prev_v:
            return prev_t, t
        prev_t, prev_v = t, v
    return None


def subinner_approximants(space: KernelSpace, target: Callable, schedule: Sequence[np.ndarray],
                          directions: Sequence[Callable] | None = None,
                          truncation: int | None = None) -> list[ApproximantStage]:
    """For each point set X_n find t_n in [0, 2] making the data (phi + t psi_n)|X_n
    extremal, then solve that extremal problem."""
    stages: list[ApproximantStage] = []
    previous = None
    d = space.dim
    for n, pts in enumerate(schedule):
        pts = np.array([_as_point(p, d) for p in np.asarray(pts, dtype=complex).reshape(len(pts), d)])
        if not any(np.linalg.norm(p) <= 1e-14 for p in pts):
            raise ValueError("each point set must contain the origin")
        psi = directions[n] if directions is not None else default_direction(space, pts, previous, truncation)
        base = np.array([target(p) for p in pts], dtype=complex)
        dirv = np.array([psi(p) for p in pts], dtype=complex)

        def eig_at(t):
            return _min_eig(space, pts, base + t * dirv, truncation)

        tol = PSD_TOL
        e0 = eig_at(0.0)
        if e0 < -tol:
            raise BisectionError(f"target is not contractive on stage {n} (min eigenvalue {e0:.3g})")
        if abs(e0) <= tol:
            t_n = 0.0
        else:
            br = _bracket(eig_at, 0.0, 2.0)
            if br is None:
                raise BisectionError(f"no sign change of the Pick eigenvalue on [0, 2] at stage {n}"
                                     f" (value at t=2: {eig_at(2.0):.3g})")
            lo, hi = br
            while hi - lo > T_TOL:
                mid = 0.5 * (lo + hi)
                if eig_at(mid) >= 0:
                    lo = mid
                else:
                    hi = mid
            t_n = lo
        problem = PickProblem(space, pts, base + t_n * dirv, truncation)
        sol = extremal_solve(problem, check_classification=False)
        stages.append(ApproximantStage(pts, t_n, psi, sol.phi, eig_at(t_n), sol.interp_residual))
        previous = pts
    return stages


def approximant_errors(stages: Sequence[ApproximantStage], target: Callable,
                       probes: Sequence) -> list[float]:
    return [max(abs(st.phi(p) - target(p)) for p in probes) for st in stages]


def pick_eigen_oracle(P: np.ndarray) -> float:
    """Smallest eigenvalue via scipy (used to cross-check classification)."""
    return float(scipy.linalg.eigvalsh(P)[0])
