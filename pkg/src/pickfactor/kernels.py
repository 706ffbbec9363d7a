"""Diagonal unitarily invariant kernel spaces on the unit ball of C^d.

A space is described by its kernel Taylor coefficients ``a_n`` in

    k_w(z) = sum_n a_n <z, w>^n,

so that the monomials are orthogonal with ``||z^alpha||^2 = alpha! / (|alpha|! a_|alpha|)``.
Polynomials are stored as sparse maps from multi-indices (tuples of ints) to
complex coefficients.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import DegreeExceededError, PointOutsideBallError, SpaceMismatchError

FAMILIES = ("hardy", "dirichlet", "d_alpha", "drury_arveson", "custom")
DEFAULT_WORKING_DEGREE = 24
BALL_TOL = 1e-14

MultiIndex = tuple


# ---------------------------------------------------------------------------
# multi-index helpers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def multi_indices(dim: int, max_order: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices of length ``dim`` with order <= ``max_order``, graded lex."""
    out: list[tuple[int, ...]] = []
    for n in range(max_order + 1):
        out.extend(_homogeneous(dim, n))
    return tuple(out)


@lru_cache(maxsize=None)
def _homogeneous(dim: int, n: int) -> tuple[tuple[int, ...], ...]:
    if dim == 1:
        return ((n,),)
    out = []
    for first in range(n, -1, -1):
        for rest in _homogeneous(dim - 1, n - first):
            out.append((first,) + rest)
    return tuple(out)


def order(alpha: Sequence[int]) -> int:
    return int(sum(alpha))


def mi_factorial(alpha: Sequence[int]) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def multinomial(alpha: Sequence[int]) -> float:
    """|alpha|! / alpha!"""
    return math.factorial(order(alpha)) / mi_factorial(alpha)


def mi_add(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def mi_sub(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...] | None:
    """``a - b`` or None if some entry would be negative."""
    out = tuple(x - y for x, y in zip(a, b))
    if any(v < 0 for v in out):
        return None
    return out


def unit_index(dim: int, j: int) -> tuple[int, ...]:
    return tuple(1 if i == j else 0 for i in range(dim))


# ---------------------------------------------------------------------------
# kernel coefficient sequences
# ---------------------------------------------------------------------------

def kaluza_coefficients(a: Sequence[float], n: int) -> np.ndarray:
    """Coefficients c_1..c_n with sum a_k t^k = 1 / (1 - sum c_k t^k).

    Reciprocal power-series recursion ``c_k = a_k - sum_{j<k} c_j a_{k-j}``
    (requires ``a_0 = 1``). Entry 0 of the returned array is unused and set to 0.
    """
    if len(a) <= n:
        raise ValueError(f"need {n + 1} kernel coefficients, got {len(a)}")
    if abs(a[0] - 1.0) > 1e-14:
        raise ValueError("kernel coefficients must satisfy a_0 = 1")
    c = np.zeros(n + 1)
    for k in range(1, n + 1):
        c[k] = a[k] - sum(c[j] * a[k - j] for j in range(1, k))
    return c


def series_quotient(num: Sequence[float], den: Sequence[float], n: int) -> np.ndarray:
    """First ``n + 1`` coefficients of the power series num(t) / den(t)."""
    if den[0] == 0:
        raise ZeroDivisionError("denominator series has zero constant term")
    e = np.zeros(n + 1)
    for m in range(n + 1):
        e[m] = (num[m] - sum(den[j] * e[m - j] for j in range(1, m + 1))) / den[0]
    return e


class KernelValue(NamedTuple):
    value: complex
    tail_bound: float


@dataclass(frozen=True)
class KernelSpace:
    """A diagonal kernel space ``k_w(z) = sum a_n <z, w>^n`` on the d-ball."""

    dim: int
    family: str
    alpha: float | None = None
    working_degree: int = DEFAULT_WORKING_DEGREE
    custom_coeffs: tuple[float, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.family in ("hardy", "dirichlet") and self.dim != 1:
            raise ValueError(f"{self.family} space is one-dimensional")
        if self.family == "d_alpha" and self.alpha is None:
            raise ValueError("d_alpha family needs alpha")
        if self.family == "custom":
            cs = self.custom_coeffs
            if cs is None or len(cs) <= self.working_degree:
                raise ValueError("custom family needs coefficients a_0..a_N with N >= working_degree")
            if abs(cs[0] - 1.0) > 1e-14:
                raise ValueError("kernel must be normalized: a_0 = 1")
            if any(c <= 0 for c in cs):
                raise ValueError("kernel coefficients must be positive")
            if not self.kaluza_ok():
                warnings.warn(
                    "custom kernel violates the Kaluza condition; factorization routines will refuse it",
                    stacklevel=3,
                )

    # -- constructors -------------------------------------------------------

    @classmethod
    def hardy(cls, working_degree: int = DEFAULT_WORKING_DEGREE) -> "KernelSpace":
        return cls(1, "hardy", working_degree=working_degree)

    @classmethod
    def dirichlet(cls, working_degree: int = DEFAULT_WORKING_DEGREE) -> "KernelSpace":
        return cls(1, "dirichlet", working_degree=working_degree)

    @classmethod
    def drury_arveson(cls, dim: int, working_degree: int = DEFAULT_WORKING_DEGREE) -> "KernelSpace":
        return cls(dim, "drury_arveson", working_degree=working_degree)

    @classmethod
    def d_alpha(cls, alpha: float, dim: int = 1, working_degree: int = DEFAULT_WORKING_DEGREE) -> "KernelSpace":
        return cls(dim, "d_alpha", alpha=float(alpha), working_degree=working_degree)

    @classmethod
    def custom(cls, coeffs: Sequence[float], dim: int = 1,
               working_degree: int | None = None) -> "KernelSpace":
        coeffs = tuple(float(c) for c in coeffs)
        if working_degree is None:
            working_degree = len(coeffs) - 1
        return cls(dim, "custom", working_degree=working_degree, custom_coeffs=coeffs)

    def with_degree(self, working_degree: int) -> "KernelSpace":
        return KernelSpace(self.dim, self.family, self.alpha, working_degree, self.custom_coeffs)

    # -- coefficients -------------------------------------------------------

    def coeff(self, n: int) -> float:
        """Kernel Taylor coefficient a_n (any n for the built-in families)."""
        if n < 0:
            raise ValueError("negative coefficient index")
        fam = self.family
        if fam in ("hardy", "drury_arveson"):
            return 1.0
        if fam == "dirichlet":
            return 1.0 / (n + 1)
        if fam == "d_alpha":
            return float((n + 1) ** (-self.alpha))
        if n >= len(self.custom_coeffs):
            raise DegreeExceededError(f"custom kernel has no coefficient a_{n}")
        return self.custom_coeffs[n]

    def coeffs(self, n: int | None = None) -> np.ndarray:
        n = self.working_degree if n is None else n
        return np.array([self.coeff(k) for k in range(n + 1)])

    @property
    def max_truncation(self) -> int | None:
        """Largest available kernel coefficient index (None means unlimited)."""
        if self.family == "custom":
            return len(self.custom_coeffs) - 1
        return None

    def kaluza_ok(self, n: int | None = None) -> bool:
        """a_n / a_{n+1} non-increasing for n < working_degree."""
        n = self.working_degree if n is None else n
        if self.max_truncation is not None:
            n = min(n, self.max_truncation)
        a = self.coeffs(n)
        ratios = a[:-1] / a[1:]
        return bool(np.all(np.diff(ratios) <= 1e-12 * np.abs(ratios[1:])))

    @property
    def is_pick(self) -> bool:
        """Whether the space is a validated normalized complete Pick space."""
        if self.family == "d_alpha" and self.alpha < 0:
            return False
        return self.kaluza_ok()

    def closed_form(self, t: complex) -> complex | None:
        """Kernel value as a function of t = <z, w>, when a closed form exists."""
        if self.family in ("hardy", "drury_arveson"):
            return 1.0 / (1.0 - t)
        if self.family == "dirichlet":
            if abs(t) < 1e-8:
                return 1.0 + t / 2 + t * t / 3
            return -np.log1p(-t) / t
        if self.family == "d_alpha" and self.alpha == -1.0:
            return 1.0 / (1.0 - t) ** 2
        return None

    def to_json(self) -> dict:
        out = {"family": self.family, "dim": self.dim, "working_degree": self.working_degree}
        if self.family == "d_alpha":
            out["alpha"] = self.alpha
        if self.family == "custom":
            out["coeffs"] = list(self.custom_coeffs)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "KernelSpace":
        family = data["family"]
        wd = int(data.get("working_degree", DEFAULT_WORKING_DEGREE))
        dim = int(data.get("dim", 1))
        if family == "custom":
            return cls.custom(data["coeffs"], dim=dim, working_degree=wd)
        return cls(dim, family, alpha=data.get("alpha"), working_degree=wd)

    # -- norms --------------------------------------------------------------

    def check_degree(self, n: int) -> None:
        if n > self.working_degree:
            raise DegreeExceededError(
                f"degree {n} exceeds working degree {self.working_degree}")


def monomial_norm_sq(space: KernelSpace, alpha: Sequence[int]) -> float:
    """||z^alpha||^2 = alpha! / (|alpha|! a_|alpha|)."""
    n = order(alpha)
    space.check_degree(n)
    return 1.0 / (multinomial(alpha) * space.coeff(n))


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

def _clean(coeffs: Mapping) -> dict:
    return {tuple(int(i) for i in k): complex(v) for k, v in coeffs.items() if v != 0}


class MultiPoly:
    """Polynomial in d commuting variables, sparse multi-index -> complex map.

    Instances are treated as immutable. Arithmetic is closed over the owning
    space; products may exceed the working degree, which is only enforced by
    the operations that need the space norm.
    """

    __slots__ = ("space", "_coeffs")

    def __init__(self, space: KernelSpace, coeffs: Mapping | None = None):
        self.space = space
        c = _clean(coeffs or {})
        for k in c:
            if len(k) != space.dim:
                raise ValueError(f"multi-index {k} has wrong length for dim {space.dim}")
            if any(i < 0 for i in k):
                raise ValueError(f"negative exponent in {k}")
        self._coeffs = c

    # construction helpers
    @classmethod
    def constant(cls, space: KernelSpace, c: complex) -> "MultiPoly":
        return cls(space, {(0,) * space.dim: c})

    @classmethod
    def monomial(cls, space: KernelSpace, alpha: Sequence[int], c: complex = 1.0) -> "MultiPoly":
        return cls(space, {tuple(alpha): c})

    @classmethod
    def variable(cls, space: KernelSpace, j: int) -> "MultiPoly":
        """The coordinate function z_{j+1} (0-based ``j``)."""
        return cls(space, {unit_index(space.dim, j): 1.0})

    @classmethod
    def from_vector(cls, space: KernelSpace, vec: np.ndarray, max_order: int,
                    chop: float = 0.0) -> "MultiPoly":
        idx = multi_indices(space.dim, max_order)
        vec = np.asarray(vec)
        cut = chop * (np.max(np.abs(vec)) if vec.size else 0.0)
        return cls(space, {a: v for a, v in zip(idx, vec) if abs(v) > cut})

    @property
    def coeffs(self) -> Mapping[tuple[int, ...], complex]:
        return self._coeffs

    def __getitem__(self, alpha) -> complex:
        return self._coeffs.get(tuple(alpha), 0j)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((order(a) for a in self._coeffs), default=-1)

    def is_zero(self) -> bool:
        return not self._coeffs

    def to_vector(self, max_order: int) -> np.ndarray:
        idx = multi_indices(self.space.dim, max_order)
        if self.degree > max_order:
            raise DegreeExceededError(f"degree {self.degree} exceeds {max_order}")
        return np.array([self._coeffs.get(a, 0j) for a in idx], dtype=complex)

    # arithmetic
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.space != self.space:
                raise SpaceMismatchError("polynomials live in different spaces")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return MultiPoly.constant(self.space, complex(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out.get(k, 0j) + v
        return MultiPoly(self.space, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.space, {k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return MultiPoly(self.space, {k: v * other for k, v in self._coeffs.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for a, u in self._coeffs.items():
            for b, v in other._coeffs.items():
                k = mi_add(a, b)
                out[k] = out.get(k, 0j) + u * v
        return MultiPoly(self.space, out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __pow__(self, n: int):
        out = MultiPoly.constant(self.space, 1.0)
        for _ in range(n):
            out = out * self
        return out

    def conj_coeffs(self) -> "MultiPoly":
        return MultiPoly(self.space, {k: v.conjugate() for k, v in self._coeffs.items()})

    def __call__(self, z) -> complex:
        return eval_poly(self, z)

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.space == other.space and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.space, frozenset(self._coeffs.items())))

    def allclose(self, other: "MultiPoly", atol: float = 1e-10) -> bool:
        return max_coeff_diff(self, other) <= atol

    def __repr__(self):
        if not self._coeffs:
            return "MultiPoly(0)"
        terms = []
        for a in sorted(self._coeffs, key=lambda k: (order(k), [-i for i in k])):
            v = self._coeffs[a]
            if self.space.dim == 1:
                mono = "" if a[0] == 0 else ("z" if a[0] == 1 else f"z^{a[0]}")
            else:
                mono = "*".join(
                    (f"z{j + 1}" if e == 1 else f"z{j + 1}^{e}") for j, e in enumerate(a) if e)
            terms.append(f"({v:.6g})" + (f"*{mono}" if mono else ""))
        return "MultiPoly(" + " + ".join(terms) + ")"


def max_coeff_diff(p: MultiPoly, q: MultiPoly) -> float:
    keys = set(p.coeffs) | set(q.coeffs)
    return max((abs(p[k] - q[k]) for k in keys), default=0.0)


def eval_poly(f: MultiPoly, z) -> complex:
    """Evaluate f at a point z (scalar allowed when d = 1)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape != (f.space.dim,):
        raise ValueError(f"point must have {f.space.dim} coordinates")
    total = 0j
    for a, c in f.coeffs.items():
        total += c * np.prod(z ** np.array(a))
    return complex(total)


def inner_product(space: KernelSpace, p: MultiPoly, q: MultiPoly) -> complex:
    """<p, q> = sum_alpha p(alpha) conj(q(alpha)) ||z^alpha||^2."""
    if p.space != space or q.space != space:
        raise SpaceMismatchError("polynomials do not belong to the given space")
    small, big = (p, q) if len(p.coeffs) <= len(q.coeffs) else (q, p)
    total = 0j
    for a in small.coeffs:
        if a in big.coeffs:
            total += p.coeffs[a] * q.coeffs[a].conjugate() * monomial_norm_sq(space, a)
    return complex(total)


def norm_sq(space: KernelSpace, p: MultiPoly) -> float:
    return float(inner_product(space, p, p).real)


def norm(space: KernelSpace, p: MultiPoly) -> float:
    return math.sqrt(norm_sq(space, p))


def weight_vector(space: KernelSpace, max_order: int) -> np.ndarray:
    """Monomial norms squared over ``multi_indices(dim, max_order)``."""
    return np.array([monomial_norm_sq(space, a) for a in multi_indices(space.dim, max_order)])


def adjoint_monomial(space: KernelSpace, beta: Sequence[int], f: MultiPoly) -> MultiPoly:
    """M_{z^beta}^* f: coefficient at alpha is f(alpha+beta) ||z^(alpha+beta)||^2 / ||z^alpha||^2."""
    beta = tuple(beta)
    out = {}
    for g, c in f.coeffs.items():
        a = mi_sub(g, beta)
        if a is None:
            continue
        out[a] = c * monomial_norm_sq(space, g) / monomial_norm_sq(space, a)
    return MultiPoly(space, out)


def multiplication_matrix(space: KernelSpace, phi: MultiPoly, n: int) -> np.ndarray:
    """Matrix of M_phi from degree <= n polynomials into degree <= n + deg(phi),
    written in the orthonormal monomial bases."""
    dphi = max(phi.degree, 0)
    space.check_degree(n + dphi)
    cols = multi_indices(space.dim, n)
    rows = multi_indices(space.dim, n + dphi)
    row_pos = {a: i for i, a in enumerate(rows)}
    mat = np.zeros((len(rows), len(cols)), dtype=complex)
    for j, b in enumerate(cols):
        nb = math.sqrt(monomial_norm_sq(space, b))
        for a, c in phi.coeffs.items():
            g = mi_add(a, b)
            mat[row_pos[g], j] = c * math.sqrt(monomial_norm_sq(space, g)) / nb
    return mat


def multiplier_compression_norm(space: KernelSpace, phi: MultiPoly, n: int) -> float:
    """Operator norm of multiplication by phi on polynomials of degree <= n.

    A non-decreasing (in n) lower bound for the multiplier norm.
    """
    if phi.is_zero():
        return 0.0
    mat = multiplication_matrix(space, phi, n)
    return float(np.linalg.svd(mat, compute_uv=False)[0])


def _as_point(z, dim: int) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape != (dim,):
        raise ValueError(f"point must have {dim} coordinates")
    return z


def check_in_ball(z: np.ndarray) -> None:
    if np.vdot(z, z).real >= 1.0 - BALL_TOL:
        raise PointOutsideBallError(f"point {z} is not inside the open unit ball")


def pairing(z: np.ndarray, w: np.ndarray) -> complex:
    """<z, w> = sum z_j conj(w_j)."""
    return complex(np.sum(z * np.conj(w)))


def kernel_series(space: KernelSpace, t: complex, truncation: int | None) -> KernelValue:
    """sum_{n <= truncation} a_n t^n with a geometric tail estimate.

    ``truncation=None`` uses the closed form when the family has one and
    otherwise the largest available (or 400) terms.
    """
    r = abs(t)
    if truncation is None:
        cf = space.closed_form(t)
        if cf is not None:
            return KernelValue(complex(cf), 0.0)
        truncation = space.max_truncation if space.max_truncation is not None else 400
    if space.max_truncation is not None and truncation > space.max_truncation:
        raise DegreeExceededError(f"kernel truncation {truncation} exceeds available coefficients")
    a = space.coeffs(truncation)
    powers = t ** np.arange(truncation + 1)
    value = complex(np.dot(a, powers))
    return KernelValue(value, _tail_bound(space, r, truncation))


def _tail_bound(space: KernelSpace, r: float, n: int) -> float:
    if r == 0.0:
        return 0.0
    if r >= 1.0:
        return math.inf
    if space.max_truncation is not None and n + 1 > space.max_truncation:
        a_next = space.coeff(n)
        q = 1.0
    else:
        a_next = space.coeff(n + 1)
        if space.family == "d_alpha" and space.alpha < 0:
            q = ((n + 3) / (n + 2)) ** (-space.alpha)
        else:
            q = 1.0
    if r * q >= 1.0:
        return math.inf
    return a_next * r ** (n + 1) / (1.0 - r * q)


def kernel_eval(space: KernelSpace, w, z, truncation: int | None = None) -> KernelValue:
    """k_w(z) = sum_{n <= truncation} a_n <z, w>^n, with the tail estimate."""
    w = _as_point(w, space.dim)
    z = _as_point(z, space.dim)
    check_in_ball(w)
    check_in_ball(z)
    return kernel_series(space, pairing(z, w), truncation)


def kernel_poly(space: KernelSpace, w, truncation: int) -> MultiPoly:
    """The truncated kernel k_w as a polynomial in z of degree ``truncation``."""
    w = _as_point(w, space.dim)
    space.check_degree(truncation)
    out = {}
    for a in multi_indices(space.dim, truncation):
        out[a] = space.coeff(order(a)) * multinomial(a) * np.prod(np.conj(w) ** np.array(a))
    return MultiPoly(space, out)


# ---------------------------------------------------------------------------
# kernel combinations and ratios
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelCombination:
    """f = sum_j weights[j] * k_{points[j]}."""

    space: KernelSpace
    points: np.ndarray
    weights: np.ndarray
    truncation: int | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=complex))
        if self.space.dim == 1 and pts.shape[0] == 1 and pts.shape[1] != 1:
            pts = pts.T
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=complex).ravel())
        if pts.shape != (self.weights.size, self.space.dim):
            raise ValueError("points and weights have inconsistent shapes")

    def __call__(self, z) -> complex:
        z = _as_point(z, self.space.dim)
        total = 0j
        for p, c in zip(self.points, self.weights):
            total += c * kernel_series(self.space, pairing(z, p), self.truncation).value
        return complex(total)

    def is_zero(self) -> bool:
        return not np.any(self.weights)


Evaluable = MultiPoly | KernelCombination


@dataclass(frozen=True)
class KernelRatio:
    """phi = numerator / denominator, kept exact and evaluated pointwise."""

    numerator: Evaluable
    denominator: Evaluable
    den_guard: float = 1e-12

    def __post_init__(self):
        if self.denominator.is_zero():
            raise ZeroDivisionError("KernelRatio denominator is identically zero")

    @property
    def space(self) -> KernelSpace:
        return self.denominator.space

    def __call__(self, z) -> complex:
        den = self.denominator(z)
        if abs(den) <= self.den_guard:
            raise ZeroDivisionError(f"denominator vanishes (|g| = {abs(den):.3g}) at {z}")
        return complex(self.numerator(z) / den)

    def min_abs_denominator(self, points: Iterable) -> float:
        return min(abs(self.denominator(p)) for p in points)

    def check_zero_free(self, points: Iterable, margin: float = 1e-10) -> bool:
        return self.min_abs_denominator(points) > margin

    def as_poly(self, atol: float = 1e-14) -> MultiPoly:
        """The ratio as a polynomial when the denominator is a constant polynomial."""
        den = self.denominator
        num = self.numerator
        if not (isinstance(den, MultiPoly) and isinstance(num, MultiPoly)):
            raise TypeError("as_poly needs polynomial numerator and denominator")
        if den.degree > 0 and any(abs(v) > atol for k, v in den.coeffs.items() if order(k) > 0):
            raise ValueError("denominator is not constant")
        return num / den[(0,) * den.space.dim]


def ball_grid(dim: int, radius: float = 0.95, n_rad: int = 8, n_ang: int = 16,
              seed: int = 0, n_random: int = 64) -> list[np.ndarray]:
    """Sample points of the open ball used for zero-free checks."""
    pts = [np.zeros(dim, dtype=complex)]
    if dim == 1:
        for r in np.linspace(radius / n_rad, radius, n_rad):
            for th in np.linspace(0, 2 * np.pi, n_ang, endpoint=False):
                pts.append(np.array([r * np.exp(1j * th)]))
        return pts
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        v *= radius * rng.uniform() ** (1.0 / (2 * dim)) / np.linalg.norm(v)
        pts.append(v)
    return pts


def random_poly(space: KernelSpace, degree: int, rng: np.random.Generator,
                density: float = 1.0) -> MultiPoly:
    """Random complex polynomial of total degree <= ``degree`` (test helper)."""
    out = {}
    for a in multi_indices(space.dim, degree):
        if rng.uniform() <= density:
            out[a] = complex(rng.normal(), rng.normal())
    return MultiPoly(space, out)


