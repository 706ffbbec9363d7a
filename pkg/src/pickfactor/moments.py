"""Vector-state moment profiles, Sarason series and two-point certificates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import CoincidentPointsError, PointOutsideBallError, SpaceMismatchError
from .kernels import (
    KernelSpace,
    MultiPoly,
    _as_point,
    check_in_ball,
    inner_product,
    kernel_series,
    multi_indices,
    multinomial,
    order,
    pairing,
)

BISECTION_TOL = 1e-10
PSD_REL_TOL = 1e-12


@dataclass(frozen=True)
class MomentProfile:
    """m_alpha = <z^alpha f, f> for all |alpha| <= order."""

    space: KernelSpace
    entries: Mapping[tuple[int, ...], complex]
    order: int

    @property
    def norm_sq(self) -> float:
        return float(self.entries[(0,) * self.space.dim].real)

    def __getitem__(self, alpha) -> complex:
        alpha = tuple(alpha)
        if order(alpha) > self.order:
            raise KeyError(f"moment {alpha} beyond profile order {self.order}")
        return self.entries.get(alpha, 0j)

    def vector(self) -> np.ndarray:
        return np.array([self.entries.get(a, 0j) for a in multi_indices(self.space.dim, self.order)])

    def __add__(self, other: "MomentProfile") -> "MomentProfile":
        if other.space != self.space:
            raise SpaceMismatchError("moment profiles from different spaces")
        n = max(self.order, other.order)
        keys = multi_indices(self.space.dim, n)
        return MomentProfile(self.space, {a: self.entries.get(a, 0j) + other.entries.get(a, 0j)
                                          for a in keys}, n)


@dataclass(frozen=True)
class SarasonSeries:
    """Coefficients of V_f(z) = 2<f, k_z f> - ||f||^2."""

    space: KernelSpace
    poly: MultiPoly

    def __call__(self, z) -> complex:
        return self.poly(z)


def moment_profile(space: KernelSpace, f: MultiPoly, order: int | None = None) -> MomentProfile:
    if f.space != space:
        raise SpaceMismatchError("polynomial does not belong to the given space")
    deg = max(f.degree, 0)
    order = deg if order is None else order
    space.check_degree(deg + order)
    entries = {}
    for a in multi_indices(space.dim, order):
        shifted = MultiPoly(space, {tuple(x + y for x, y in zip(k, a)): v for k, v in f.coeffs.items()})
        entries[a] = inner_product(space, shifted, f)
    zero = (0,) * space.dim
    entries[zero] = complex(entries[zero].real)
    return MomentProfile(space, entries, order)


def sarason_from_moments(profile: MomentProfile) -> SarasonSeries:
    space = profile.space
    out = {}
    for a, m in profile.entries.items():
        n = order(a)
        if n == 0:
            out[a] = m.real
        else:
            out[a] = 2.0 * space.coeff(n) * multinomial(a) * np.conj(m)
    return SarasonSeries(space, MultiPoly(space, out))


def sarason_series(space: KernelSpace, f: MultiPoly, order: int | None = None) -> SarasonSeries:
    """Sarason function of a polynomial; coefficient at alpha != 0 is
    ``2 a_|alpha| (|alpha|!/alpha!) conj(m_alpha)`` and the constant term is ``||f||^2``."""
    return sarason_from_moments(moment_profile(space, f, order))


def vector_state_equal(space: KernelSpace, f: MultiPoly, g: MultiPoly,
                       tol: float = 1e-12) -> tuple[bool, float]:
    """Compare P_f and P_g on all moments up to the larger degree."""
    n = max(f.degree, g.degree, 0)
    mf = moment_profile(space, f, n).vector()
    mg = moment_profile(space, g, n).vector()
    residual = float(np.max(np.abs(mf - mg)))
    return residual <= tol, residual


# ---------------------------------------------------------------------------
# two-point certificate
# ---------------------------------------------------------------------------

def _pair_matrices(space: KernelSpace, phi: Callable, z, w, truncation):
    z = _as_point(z, space.dim)
    w = _as_point(w, space.dim)
    for p in (z, w):
        check_in_ball(p)
    if np.linalg.norm(z - w) <= 1e-12:
        raise CoincidentPointsError("two-point certificate needs distinct points")
    pts = [z, w]
    vals = np.array([phi(p) for p in pts], dtype=complex)
    kern = np.empty((2, 2), dtype=complex)
    slack = 0.0
    for i in range(2):
        for j in range(2):
            # entry (i, j) is k_{z_i}(z_j)
            kv = kernel_series(space, pairing(pts[j], pts[i]), truncation)
            kern[i, j] = kv.value
            slack = max(slack, kv.tail_bound)
    kern = (kern + kern.conj().T) / 2
    outer = np.outer(vals, vals.conj()) * kern
    return kern, outer, vals, slack


def _psd(mat: np.ndarray) -> bool:
    eig = np.linalg.eigvalsh((mat + mat.conj().T) / 2)
    return eig[0] >= -PSD_REL_TOL * abs(np.trace(mat).real)


def two_point_certificate(space: KernelSpace, phi: Callable, z, w,
                          truncation: int | None = None) -> float:
    """Smallest c >= 0 making the 2x2 matrix ((c^2 - phi(z_i) conj(phi(z_j))) k_{z_i}(z_j)) PSD.

    A lower bound for the multiplier norm of ``phi``; found by bisection on c.
    """
    kern, outer, vals, _ = _pair_matrices(space, phi, z, w, truncation)
    lo = 0.0
    hi = max(float(np.max(np.abs(vals))), 1e-300)
    while not _psd(hi * hi * kern - outer):
        lo = hi
        hi *= 2.0
        if hi > 1e150:
            raise PointOutsideBallError("certificate diverged; kernel matrix singular")
    while hi - lo > BISECTION_TOL * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _psd(mid * mid * kern - outer):
            hi = mid
        else:
            lo = mid
    return hi


def two_point_slack(space: KernelSpace, phi: Callable, z, w, truncation: int | None = None) -> float:
    """Largest kernel truncation tail among the four entries used by the certificate."""
    return _pair_matrices(space, phi, z, w, truncation)[3]
