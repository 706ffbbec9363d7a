"""JSON forms of spaces, polynomials and free polynomials, plus a small expression parser."""

from __future__ import annotations

import re
from typing import Any, Mapping

import numpy as np
import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

from .fock import FreePoly
from .kernels import KernelSpace, MultiPoly


class InputError(ValueError):
    """Malformed user input (bad JSON, unknown symbols, empty polynomial)."""


def complex_to_json(c: complex) -> dict:
    c = complex(c)
    return {"re": float(c.real), "im": float(c.imag)}


def complex_from_json(obj: Any) -> complex:
    if isinstance(obj, Mapping):
        return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    if isinstance(obj, (int, float)):
        return complex(obj)
    raise InputError(f"cannot read a complex number from {obj!r}")


def poly_to_json(p: MultiPoly) -> dict:
    terms = sorted(p.coeffs.items(), key=lambda kv: (sum(kv[0]), tuple(-x for x in kv[0])))
    return {
        "space": p.space.to_json(),
        "poly": [{"index": list(k), **complex_to_json(v)} for k, v in terms],
    }


def poly_from_json(obj: Mapping, space: KernelSpace | None = None) -> MultiPoly:
    try:
        if space is None:
            space = KernelSpace.from_json(obj["space"])
        terms = obj["poly"]
        coeffs = {}
        for t in terms:
            idx = tuple(int(x) for x in t["index"])
            if len(idx) != space.dim or any(x < 0 for x in idx):
                raise InputError(f"multi-index {idx} does not fit dimension {space.dim}")
            coeffs[idx] = coeffs.get(idx, 0j) + complex_from_json(t)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed polynomial JSON: {exc}") from exc
    p = MultiPoly(space, coeffs)
    return p


def free_poly_to_json(F: FreePoly) -> dict:
    terms = sorted(F.coeffs.items(), key=lambda kv: (len(kv[0]), kv[0]))
    return {"dim": F.dim, "terms": [{"word": list(w), **complex_to_json(c)} for w, c in terms]}


def free_poly_from_json(obj: Mapping) -> FreePoly:
    try:
        dim = int(obj["dim"])
        coeffs = {}
        for t in obj["terms"]:
            w = tuple(int(x) for x in t["word"])
            coeffs[w] = coeffs.get(w, 0j) + complex_from_json(t)
        return FreePoly(dim, coeffs)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed free polynomial JSON: {exc}") from exc


_TRANSFORMS = standard_transformations + (convert_xor, implicit_multiplication_application)


def parse_poly(space: KernelSpace, text: str) -> MultiPoly:
    """Parse an expression such as ``"z-1"`` or ``"1+2*z1*z2"``; ``i``/``I`` is the imaginary unit.

    In one variable ``z`` and ``z1`` both name the coordinate.
    """
    if text is None or not text.strip():
        raise InputError("empty polynomial expression")
    d = space.dim
    syms = [sympy.Symbol(f"z{j + 1}") for j in range(d)]
    local = {f"z{j + 1}": s for j, s in enumerate(syms)}
    if d == 1:
        local["z"] = syms[0]
    local["i"] = sympy.I
    local["I"] = sympy.I
    if not re.fullmatch(r"[0-9zZiIeE.+\-*/^() \t]*", text):
        raise InputError(f"unexpected characters in polynomial expression {text!r}")
    try:
        expr = parse_expr(text, local_dict=local, transformations=_TRANSFORMS, evaluate=True)
    except Exception as exc:   # sympy raises a wide range of exception types
        raise InputError(f"cannot parse polynomial expression {text!r}: {exc}") from exc
    extra = expr.free_symbols - set(syms)
    if extra:
        raise InputError(f"unknown symbols {sorted(map(str, extra))} for dimension {d}")
    try:
        poly = sympy.Poly(sympy.expand(expr), *syms)
    except sympy.PolynomialError as exc:
        raise InputError(f"{text!r} is not a polynomial: {exc}") from exc
    coeffs = {}
    for monom, c in poly.terms():
        val = complex(sympy.N(c, 17))
        coeffs[tuple(int(m) for m in monom)] = val
    p = MultiPoly(space, coeffs)
    if p.is_zero():
        raise InputError("polynomial is identically zero")
    return p


def space_from_args(family: str, dim: int = 1, alpha: float | None = None,
                    coeffs: str | None = None, working_degree: int = 24) -> KernelSpace:
    family = family.replace("-", "_").lower()
    if family == "hardy":
        if dim != 1:
            return KernelSpace.drury_arveson(dim, working_degree)
        return KernelSpace.hardy(working_degree)
    if family == "dirichlet":
        if dim != 1:
            raise InputError("the Dirichlet space is one-dimensional")
        return KernelSpace.dirichlet(working_degree)
    if family in ("drury_arveson", "da"):
        return KernelSpace.drury_arveson(dim, working_degree)
    if family == "d_alpha":
        if alpha is None:
            raise InputError("d_alpha needs --alpha")
        return KernelSpace.d_alpha(alpha, dim, working_degree)
    if family == "custom":
        if not coeffs:
            raise InputError("custom space needs --coeffs")
        values = [float(x) for x in coeffs.split(",")]
        return KernelSpace.custom(values, dim, working_degree=min(working_degree, len(values) - 1))
    raise InputError(f"unknown space family {family!r}")


def points_from_json(obj, dim: int) -> np.ndarray:
    """Points as [[re, im], ...] (d = 1) or [[[re, im], ...], ...] (one list per point)."""
    pts = []
    for p in obj:
        if dim == 1 and len(p) == 2 and not isinstance(p[0], (list, dict)):
            pts.append([complex_from_json(p)])
        else:
            coords = [complex_from_json(c) for c in p]
            if len(coords) != dim:
                raise InputError(f"point {p!r} does not have {dim} coordinates")
            pts.append(coords)
    return np.array(pts, dtype=complex).reshape(len(pts), dim)


def points_to_json(points: np.ndarray) -> list:
    pts = np.asarray(points)
    if pts.ndim == 2 and pts.shape[1] == 1:
        return [[float(p[0].real), float(p[0].imag)] for p in pts]
    return [[[float(c.real), float(c.imag)] for c in p] for p in pts]
