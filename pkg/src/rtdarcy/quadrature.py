"""Gauss quadrature on the reference interval, square and triangle.

Rules are exact for polynomials up to the requested degree. The triangle
rule is a Duffy-collapsed tensor Gauss rule (positive weights at any
degree); degree <= 1 is special-cased to the centroid rule.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError

MAX_DEGREE = 12


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (n, dim), reference coordinates
    weights: np.ndarray  # (n,), positive, summing to the reference measure
    degree: int


def _check_degree(degree):
    if not 0 <= degree <= MAX_DEGREE:
        raise InvalidParameterError(f"quadrature degree {degree} not in [0, {MAX_DEGREE}]")


@lru_cache(maxsize=None)
def interval_rule(degree):
    """Gauss-Legendre rule on [0, 1], exact for polynomials of `degree`."""
    _check_degree(degree)
    n = degree // 2 + 1
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule((x[:, None] + 1.0) / 2.0, w / 2.0, degree)


@lru_cache(maxsize=None)
def square_rule(degree):
    """Tensor Gauss rule on the unit square [0, 1]^2."""
    _check_degree(degree)
    line = interval_rule(degree)
    x = line.points[:, 0]
    xx, yy = np.meshgrid(x, x, indexing="ij")
    ww = np.outer(line.weights, line.weights)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    return QuadratureRule(pts, ww.ravel(), degree)


@lru_cache(maxsize=None)
def triangle_rule(degree):
    """Rule on the reference triangle (0,0)-(1,0)-(0,1)."""
    _check_degree(degree)
    if degree <= 1:
        return QuadratureRule(np.array([[1.0 / 3.0, 1.0 / 3.0]]), np.array([0.5]), 1)
    # Duffy map (u, v) -> (u (1 - v), v): x-degree <= degree needs the
    # u-rule, (1 - v)-Jacobian raises the v-degree by one.
    nu = degree // 2 + 1
    nv = (degree + 1) // 2 + 1
    xu, wu = np.polynomial.legendre.leggauss(nu)
    xv, wv = np.polynomial.legendre.leggauss(nv)
    u = (xu + 1.0) / 2.0
    v = (xv + 1.0) / 2.0
    wu, wv = wu / 2.0, wv / 2.0
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ww = np.outer(wu, wv) * (1.0 - vv)
    pts = np.column_stack([(uu * (1.0 - vv)).ravel(), vv.ravel()])
    return QuadratureRule(pts, ww.ravel(), degree)


def cell_rule(kind, degree):
    """Volume rule for a reference cell of the given kind."""
    if kind == "Triangle":
        return triangle_rule(degree)
    if kind == "Quad":
        return square_rule(degree)
    raise InvalidParameterError(f"unknown cell kind {kind!r}")


def facet_rule(degree):
    """Rule on the reference facet [0, 1]."""
    return interval_rule(degree)
