"""Truncated free Fock space: free polynomials in noncommuting variables x_1..x_d.

Words are tuples of letters in 1..d. Dense linear algebra orders words
graded-lexicographically (by length, then lexicographically).
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from sympy.utilities.iterables import multiset_permutations

from .errors import BudgetExceededError, SpaceMismatchError, WrongFamilyError
from .kernels import MultiPoly, mi_factorial, order

Word = tuple[int, ...]

DEFAULT_BUDGET = {1: 200, 2: 16, 3: 10}
DENSE_LIMIT = 2500


def word_budget(dim: int) -> int:
    """Maximum word length for Fock computations; PICKFACTOR_BUDGET overrides."""
    env = os.environ.get("PICKFACTOR_BUDGET")
    if env:
        return int(env)
    if dim not in DEFAULT_BUDGET:
        raise BudgetExceededError(f"Fock operations are enabled for d in {{1, 2, 3}}; got d={dim}"
                                  " (set PICKFACTOR_BUDGET to override)")
    return DEFAULT_BUDGET[dim]


def _check_budget(dim: int, length: int) -> None:
    limit = word_budget(dim)
    if length > limit:
        raise BudgetExceededError(f"words of length {length} exceed the budget {limit} for d={dim}")


@lru_cache(maxsize=None)
def words(dim: int, max_len: int) -> tuple[Word, ...]:
    """All words of length <= max_len, graded lexicographic."""
    out: list[Word] = []
    for n in range(max_len + 1):
        out.extend(itertools.product(range(1, dim + 1), repeat=n))
    return tuple(out)


def flip_word(w: Word) -> Word:
    return tuple(reversed(w))


def word_multi_index(w: Word, dim: int) -> tuple[int, ...]:
    """alpha(w): how many times each letter occurs."""
    alpha = [0] * dim
    for letter in w:
        alpha[letter - 1] += 1
    return tuple(alpha)


class FreePoly:
    """Sparse free polynomial sum_w F(w) x^w."""

    __slots__ = ("dim", "_coeffs")

    def __init__(self, dim: int, coeffs: Mapping[Sequence[int], complex] | None = None):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = dim
        clean = {}
        for w, c in (coeffs or {}).items():
            w = tuple(int(x) for x in w)
            if any(x < 1 or x > dim for x in w):
                raise ValueError(f"letter out of range in word {w} for d={dim}")
            c = complex(c)
            if c != 0:
                clean[w] = clean.get(w, 0j) + c
        self._coeffs = {w: c for w, c in clean.items() if c != 0}

    @classmethod
    def constant(cls, dim: int, c: complex = 1.0) -> "FreePoly":
        return cls(dim, {(): c})

    @classmethod
    def word(cls, dim: int, w: Sequence[int], c: complex = 1.0) -> "FreePoly":
        return cls(dim, {tuple(w): c})

    @property
    def coeffs(self) -> Mapping[Word, complex]:
        return self._coeffs

    def __getitem__(self, w) -> complex:
        return self._coeffs.get(tuple(w), 0j)

    @property
    def degree(self) -> int:
        return max((len(w) for w in self._coeffs), default=-1)

    def is_zero(self) -> bool:
        return not self._coeffs

    def _coerce(self, other) -> "FreePoly":
        if isinstance(other, FreePoly):
            if other.dim != self.dim:
                raise SpaceMismatchError("free polynomials of different dimension")
            return other
        return FreePoly.constant(self.dim, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._coeffs)
        for w, c in other.coeffs.items():
            out[w] = out.get(w, 0j) + c
        return FreePoly(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return FreePoly(self.dim, {w: -c for w, c in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, FreePoly):
            return free_mul(self, other)
        return FreePoly(self.dim, {w: c * other for w, c in self._coeffs.items()})

    def __rmul__(self, other):
        return FreePoly(self.dim, {w: other * c for w, c in self._coeffs.items()})

    def __truediv__(self, c):
        return FreePoly(self.dim, {w: v / c for w, v in self._coeffs.items()})

    def __eq__(self, other):
        return isinstance(other, FreePoly) and other.dim == self.dim and other.coeffs == self._coeffs

    def __hash__(self):
        return hash((self.dim, frozenset(self._coeffs.items())))

    def allclose(self, other: "FreePoly", atol: float = 1e-12) -> bool:
        keys = set(self._coeffs) | set(other.coeffs)
        return all(abs(self[w] - other[w]) <= atol for w in keys)

    def homogeneous_norm(self, k: int) -> float:
        """M_k(F) = (sum_{|w|=k} |F(w)|^2)^(1/2)."""
        return math.sqrt(sum(abs(c) ** 2 for w, c in self._coeffs.items() if len(w) == k))

    def to_vector(self, max_len: int) -> np.ndarray:
        idx = word_positions(self.dim, max_len)
        vec = np.zeros(len(idx), dtype=complex)
        for w, c in self._coeffs.items():
            if len(w) <= max_len:
                vec[idx[w]] = c
        return vec

    def __repr__(self):
        if not self._coeffs:
            return "FreePoly(0)"
        parts = []
        for w in sorted(self._coeffs, key=lambda w: (len(w), w)):
            name = "x" + "".join(map(str, w)) if w else "1"
            parts.append(f"({self._coeffs[w]:.6g})*{name}")
        return "FreePoly(" + " + ".join(parts) + ")"


@lru_cache(maxsize=None)
def word_positions(dim: int, max_len: int) -> dict[Word, int]:
    return {w: i for i, w in enumerate(words(dim, max_len))}


def free_mul(F: FreePoly, G: FreePoly) -> FreePoly:
    """Concatenation convolution (FG)(w) = sum_{w = uv} F(u) G(v)."""
    if F.dim != G.dim:
        raise SpaceMismatchError("free polynomials of different dimension")
    out: dict[Word, complex] = {}
    for u, a in F.coeffs.items():
        for v, b in G.coeffs.items():
            w = u + v
            out[w] = out.get(w, 0j) + a * b
    return FreePoly(F.dim, out)


def flip(F: FreePoly) -> FreePoly:
    return FreePoly(F.dim, {flip_word(w): c for w, c in F.coeffs.items()})


def fock_inner(F: FreePoly, G: FreePoly) -> complex:
    """<F, G> = sum_w F(w) conj(G(w))."""
    if F.dim != G.dim:
        raise SpaceMismatchError("free polynomials of different dimension")
    small, large = (F, G) if len(F.coeffs) <= len(G.coeffs) else (G, F)
    total = sum(F[w] * np.conj(G[w]) for w in small.coeffs if w in large.coeffs)
    return complex(total)


def fock_norm(F: FreePoly) -> float:
    return math.sqrt(sum(abs(c) ** 2 for c in F.coeffs.values()))


def left_shift_inner(F: FreePoly, w: Word) -> complex:
    """<F, L^w F> where L^w F = x^w F: sum_v F(w v) conj F(v)."""
    w = tuple(w)
    return complex(sum(F[w + v] * np.conj(c) for v, c in F.coeffs.items()))


def right_shift_inner(F: FreePoly, w: Word) -> complex:
    """<F, R^w F> where R^w F = F x^w: sum_v F(v w) conj F(v)."""
    w = tuple(w)
    return complex(sum(F[v + w] * np.conj(c) for v, c in F.coeffs.items()))


# ---------------------------------------------------------------------------
# matrix evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatrixTuple:
    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(np.atleast_2d(np.asarray(m, dtype=complex)) for m in self.matrices)
        if not mats:
            raise ValueError("empty matrix tuple")
        n = mats[0].shape[0]
        if any(m.shape != (n, n) for m in mats):
            raise ValueError("matrix tuple entries must be square of a common size")
        object.__setattr__(self, "matrices", mats)

    @property
    def dim(self) -> int:
        return len(self.matrices)

    @property
    def size(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def row_norm(self) -> float:
        """Operator norm of the row [X_1 ... X_d]."""
        return float(np.linalg.norm(np.hstack(self.matrices), 2))

    def power(self, w: Word) -> np.ndarray:
        out = np.eye(self.size, dtype=complex)
        for letter in w:
            out = out @ self.matrices[letter - 1]
        return out


def eval_free(F: FreePoly, X: MatrixTuple) -> np.ndarray:
    if X.dim != F.dim:
        raise ValueError(f"matrix tuple has {X.dim} entries, polynomial needs {F.dim}")
    out = np.zeros((X.size, X.size), dtype=complex)
    for w, c in F.coeffs.items():
        out += c * X.power(w)
    return out


def eval_homogeneous(F: FreePoly, X: MatrixTuple, k: int) -> np.ndarray:
    part = FreePoly(F.dim, {w: c for w, c in F.coeffs.items() if len(w) == k})
    return eval_free(part, X)


# ---------------------------------------------------------------------------
# Sarason functions and the symmetric embedding
# ---------------------------------------------------------------------------

def free_sarason(F: FreePoly, side: str = "left", max_len: int | None = None) -> FreePoly:
    """Left: 2<F, R^w F> at w != empty; right: 2<F, L^w F>; constant ||F||^2."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    deg = max(F.degree, 0)
    max_len = deg if max_len is None else max_len
    _check_budget(F.dim, max_len + deg)
    shift = right_shift_inner if side == "left" else left_shift_inner
    out = {(): fock_norm(F) ** 2}
    for w in words(F.dim, min(max_len, deg)):
        if w:
            out[w] = 2.0 * shift(F, w)
    return FreePoly(F.dim, out)


def eval_scalar(F: FreePoly, z: Sequence[complex]) -> complex:
    """Evaluate at a commuting scalar point (1x1 matrices)."""
    z = np.asarray(z, dtype=complex).ravel()
    total = 0j
    for w, c in F.coeffs.items():
        total += c * np.prod([z[letter - 1] for letter in w])
    return complex(total)


def embed_symmetric(f: MultiPoly) -> FreePoly:
    """Isometric image of a Drury-Arveson polynomial: F(w) = f(alpha(w)) alpha(w)!/|alpha(w)|!."""
    space = f.space
    if space.family != "drury_arveson":
        raise WrongFamilyError("the symmetric embedding is defined for the Drury-Arveson space")
    out = {}
    for alpha, c in f.coeffs.items():
        weight = mi_factorial(alpha) / math.factorial(order(alpha))
        letters = [j + 1 for j, a in enumerate(alpha) for _ in range(a)]
        for perm in multiset_permutations(letters):
            out[tuple(perm)] = c * weight
    return FreePoly(space.dim, out)


def symmetric_moments(F: FreePoly, max_len: int) -> dict[Word, complex]:
    """<F, L^w F> for all |w| <= max_len."""
    return {w: left_shift_inner(F, w) for w in words(F.dim, max_len)}


# ---------------------------------------------------------------------------
# outer defect
# ---------------------------------------------------------------------------

def _left_multiple_matrix(F: FreePoly, n: int):
    """Sparse matrix whose column for word v is x^v F, rows indexed by words."""
    deg = max(F.degree, 0)
    rows_pos = word_positions(F.dim, n + deg)
    cols = words(F.dim, n)
    terms = list(F.coeffs.items())
    ri, ci, vals = [], [], []
    for j, v in enumerate(cols):
        for u, c in terms:
            ri.append(rows_pos[v + u])
            ci.append(j)
            vals.append(c)
    mat = scipy.sparse.csc_matrix((vals, (ri, ci)), shape=(len(rows_pos), len(cols)))
    return mat


def outer_defect(F: FreePoly, N: int) -> float:
    """dist(1, span{x^w F : |w| <= N}) in the Fock norm."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if F.is_zero():
        return 1.0
    deg = max(F.degree, 0)
    _check_budget(F.dim, N + deg)
    mat = _left_multiple_matrix(F, N)
    # only rows touched by some column matter, plus the constant row
    touched = np.unique(np.concatenate([mat.indices, [0]]))
    mat = mat.tocsr()[touched].tocsc()
    b = np.zeros(len(touched), dtype=complex)
    b[0] = 1.0 if touched[0] == 0 else 0.0
    if mat.shape[1] <= DENSE_LIMIT:
        dense = mat.toarray()
        coef, *_ = np.linalg.lstsq(dense, b, rcond=1e-12)
        return float(np.linalg.norm(b - dense @ coef))
    normal = (mat.conj().T @ mat).tocsc()
    lu = scipy.sparse.linalg.splu(normal)
    rhs = mat.conj().T @ b
    coef = lu.solve(rhs)
    for _ in range(3):
        coef = coef + lu.solve(mat.conj().T @ (b - mat @ coef))
    return float(np.linalg.norm(b - mat @ coef))


def right_outer_defect(F: FreePoly, N: int) -> float:
    return outer_defect(flip(F), N)


def outer_defect_curve(F: FreePoly, Ns: Iterable[int]) -> list[tuple[int, float]]:
    return [(n, outer_defect(F, n)) for n in Ns]


def outer_status(F: FreePoly, N: int | None = None, threshold: float = 0.1) -> tuple[str, float]:
    """'likely outer' when the defect at the budget limit is below threshold, else 'undetermined'."""
    if N is None:
        N = word_budget(F.dim) - max(F.degree, 0)
    delta = outer_defect(F, N)
    return ("likely outer" if delta < threshold else "undetermined"), delta


def random_free_poly(dim: int, degree: int, rng: np.random.Generator, density: float = 1.0) -> FreePoly:
    out = {}
    for w in words(dim, degree):
        if rng.random() <= density:
            out[w] = rng.normal() + 1j * rng.normal()
    return FreePoly(dim, out)
