"""Worked examples with known answers, collected as a regression table."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .factorize import FactorOptions, dirichlet_truncated_radius, subinner_free_outer
from .fock import FreePoly, outer_defect
from .kernels import KernelSpace, MultiPoly
from .moments import moment_profile, sarason_series

SIX_WORDS = ((1, 1, 2, 2), (1, 2, 1, 2), (1, 2, 2, 1), (2, 1, 1, 2), (2, 1, 2, 1), (2, 2, 1, 1))


def six_word_poly() -> FreePoly:
    """1 - (1/6) * sum of the six words with two 1s and two 2s."""
    return FreePoly(2, {(): 1.0, **{w: -1.0 / 6.0 for w in SIX_WORDS}})


def six_word_bound(n: int) -> float:
    return 6.0 ** (-(n // 4 + 1) / 2)


def family_norm_sq(a: float) -> float:
    """||f_a||^2 for f_a = a - 3a/(1+2a^2) (z1+z2) + z1 z2 / a in the Drury-Arveson space."""
    return a * a + 18.0 * a * a / (1.0 + 2.0 * a * a) ** 2 + 1.0 / (2.0 * a * a)


def family_member(space: KernelSpace, a: float) -> MultiPoly:
    b = -3.0 * a / (1.0 + 2.0 * a * a)
    return MultiPoly(space, {(0, 0): a, (1, 0): b, (0, 1): b, (1, 1): 1.0 / a})


def equal_norm_parameter(tol: float = 1e-12) -> float:
    """The a* > 1 with r(a*) = r(1); bracketed on [1.05, 10] where r - r(1) changes sign."""
    target = family_norm_sq(1.0)
    return float(brentq(lambda a: family_norm_sq(a) - target, 1.05, 10.0, xtol=tol, rtol=1e-15))


@dataclass(frozen=True)
class Row:
    id: str
    quantity: str
    expected: float
    computed: float
    tol: float
    kind: str = "abs"        # "abs": |delta| <= tol; "le": computed <= expected + tol; "ge": computed >= expected - tol

    @property
    def delta(self) -> float:
        return abs(self.computed - self.expected)

    @property
    def ok(self) -> bool:
        if self.kind == "le":
            return self.computed <= self.expected + self.tol
        if self.kind == "ge":
            return self.computed >= self.expected - self.tol
        return self.delta <= self.tol


def _dirichlet_rows(options: FactorOptions) -> list[Row]:
    D = KernelSpace.dirichlet()
    z = MultiPoly.variable(D, 0)
    rows = []
    for lam in (1.0, 0.5, 1 + 0.3j):
        res = subinner_free_outer(D, z - lam, options)
        g = res.outer
        tag = f"dirichlet z-({lam:g})"
        exp0, exp1 = math.sqrt(2), -np.conj(lam) / math.sqrt(2)
        rows.append(Row(tag, "Re outer[0]", exp0, g[(0,)].real, 1e-8))
        rows.append(Row(tag, "Im outer[0]", 0.0, g[(0,)].imag, 1e-8))
        rows.append(Row(tag, "Re outer[1]", exp1.real, g[(1,)].real, 1e-8))
        rows.append(Row(tag, "Im outer[1]", exp1.imag, g[(1,)].imag, 1e-8))
    for lam in (1.5, 2.0):
        res = subinner_free_outer(D, z - lam, options)
        rows.append(Row(f"dirichlet z-({lam:g})", "gain", 0.0, res.gain, 1e-8, "le"))
    for lam in (1.0, 0.5, 1 + 0.3j, 1.5, 2.0):
        v = sarason_series(D, z - lam).poly
        tag = f"dirichlet z-({lam:g})"
        rows.append(Row(tag, "sarason[0]", 2 + abs(lam) ** 2, v[(0,)].real, 1e-10))
        e1 = -2 * np.conj(lam)
        rows.append(Row(tag, "|sarason[1] - expected|", 0.0, abs(v[(1,)] - e1), 1e-10))
    return rows


def _drury_arveson_rows(options: FactorOptions) -> list[Row]:
    DA = KernelSpace.drury_arveson(2)
    z1, z2 = MultiPoly.variable(DA, 0), MultiPoly.variable(DA, 1)
    f = 1 + 2 * z1 * z2
    res = subinner_free_outer(DA, f, options)
    g = res.outer
    s2 = math.sqrt(2)
    tag = "DA2 1+2z1z2"
    rows = [Row(tag, f"|outer{list(k)} - expected|", 0.0, abs(g[k] - e), 1e-8)
            for k, e in (((0, 0), s2), ((1, 0), 0.0), ((0, 1), 0.0), ((1, 1), s2))]
    m = moment_profile(DA, g, 2)
    rows.append(Row(tag, "m_00", 3.0, m[(0, 0)].real, 1e-10))
    rows.append(Row(tag, "|m_10|", 0.0, abs(m[(1, 0)]), 1e-10))
    rows.append(Row(tag, "|m_01|", 0.0, abs(m[(0, 1)]), 1e-10))
    rows.append(Row(tag, "conj(c0) c3", 2.0, (np.conj(g[(0, 0)]) * g[(1, 1)]).real, 1e-10))

    tag = "DA2 (1-z1)(1-z2)"
    rows.append(Row(tag, "r(1)", 3.5, family_norm_sq(1.0), 0.0))
    h = 1e-5
    deriv = (family_norm_sq(1 + h) - family_norm_sq(1 - h)) / (2 * h)
    rows.append(Row(tag, "r'(1)", -1.0 / 3.0, deriv, 1e-6))
    a_star = equal_norm_parameter()
    rows.append(Row(tag, "r(a*) - r(1)", 0.0, family_norm_sq(a_star) - 3.5, 1e-10))
    res = subinner_free_outer(DA, (1 - z1) * (1 - z2), options)
    rows.append(Row(tag, "gain >= a* - 1", a_star - 1.0, res.gain, 1e-6, "ge"))
    return rows


def _fock_rows() -> list[Row]:
    F = six_word_poly()
    rows = []
    prev = None
    for n in (4, 8, 12):
        d = outer_defect(F, n)
        rows.append(Row("fock six-word", f"defect N={n} <= bound", six_word_bound(n), d, 1e-10, "le"))
        if prev is not None:
            # strict decrease: computed must sit below the previous value
            rows.append(Row("fock six-word", f"defect N={n} < previous", prev, d, -1e-15, "le"))
        prev = d
    return rows


def _radius_rows() -> list[Row]:
    return [
        Row("dirichlet radius", "R_1", math.sqrt(2), dirichlet_truncated_radius(1), 1e-10),
        Row("dirichlet radius", "R_2", math.sqrt((-6 + math.sqrt(84)) / 2), dirichlet_truncated_radius(2), 1e-8),
    ]


SECTIONS: dict[str, Callable[[FactorOptions], list[Row]]] = {
    "dirichlet": _dirichlet_rows,
    "drury-arveson": _drury_arveson_rows,
    "fock": lambda options: _fock_rows(),
    "radius": lambda options: _radius_rows(),
}


def regression_rows(options: FactorOptions | None = None) -> list[Row]:
    options = options or FactorOptions()
    rows: list[Row] = []
    for build in SECTIONS.values():
        rows.extend(build(options))
    return rows
