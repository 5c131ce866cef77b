"""Manufactured solutions for the Darcy test problems.

Each case packages exact fields (u, p), the derived data (f = u - grad p,
g = div u) and a mesh builder with its boundary split. The hand-coded
gradients and divergences are cross-checked against central finite
differences when a case is instantiated, so a typo in either the fields
or the derived data is caught immediately.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, InvalidParameterError
from .mesh import (
    build_quarter_annulus_quad,
    build_unit_circle_tri,
    build_unit_square_quad,
    build_unit_square_tri,
    classify_facets,
)

_FD_STEP = 1e-6
_FD_TOL = 5e-5


@dataclass(frozen=True)
class ManufacturedCase:
    name: str
    u: Callable  # exact velocity, (..., 2) -> (..., 2)
    p: Callable  # exact pressure, (..., 2) -> (...)
    grad_p: Callable
    g: Callable  # div u
    mesh_family: str = ""
    bc_spec: Callable = None
    sample_box: tuple = ((0.05, 0.95), (0.05, 0.95))

    def f(self, x):
        return self.u(x) - self.grad_p(x)

    def build_mesh(self, level):
        if self.mesh_family == "square-tri":
            mesh = build_unit_square_tri(level)
        elif self.mesh_family == "square-quad":
            mesh = build_unit_square_quad(level)
        elif self.mesh_family == "circle-tri":
            mesh = build_unit_circle_tri(level)
        elif self.mesh_family == "annulus-quad":
            mesh = build_quarter_annulus_quad(level)
        else:
            raise ConfigurationError(f"unknown mesh family {self.mesh_family!r}")
        classify_facets(mesh, self.bc_spec)
        return mesh

    def __post_init__(self):
        self._verify_derivatives()

    def _verify_derivatives(self):
        rng = np.random.default_rng(12345)
        (x0, x1), (y0, y1) = self.sample_box
        pts = np.column_stack([rng.uniform(x0, x1, 40), rng.uniform(y0, y1, 40)])
        ex = np.array([_FD_STEP, 0.0])
        ey = np.array([0.0, _FD_STEP])
        fd_grad = np.stack([
            (self.p(pts + ex) - self.p(pts - ex)) / (2 * _FD_STEP),
            (self.p(pts + ey) - self.p(pts - ey)) / (2 * _FD_STEP),
        ], axis=-1)
        if np.abs(fd_grad - self.grad_p(pts)).max() > _FD_TOL:
            raise ConfigurationError(f"case {self.name}: grad p mismatch")
        fd_div = (self.u(pts + ex)[:, 0] - self.u(pts - ex)[:, 0]) / (2 * _FD_STEP) \
            + (self.u(pts + ey)[:, 1] - self.u(pts - ey)[:, 1]) / (2 * _FD_STEP)
        if np.abs(fd_div - self.g(pts)).max() > _FD_TOL:
            raise ConfigurationError(f"case {self.name}: div u mismatch")


def _xy(x):
    return x[..., 0], x[..., 1]


def _square_tri():
    # u is divergence free; p has zero mean on the unit square
    def u(pts):
        x, y = _xy(pts)
        return np.stack([x * np.sin(x) * np.sin(y),
                         np.sin(x) * np.cos(y) + x * np.cos(x) * np.cos(y)], axis=-1)

    def p(pts):
        x, y = _xy(pts)
        return x**3 * y - 0.125

    def grad_p(pts):
        x, y = _xy(pts)
        return np.stack([3 * x**2 * y, x**3], axis=-1)

    def g(pts):
        return np.zeros(pts.shape[:-1])

    return ManufacturedCase(
        name="square-tri", u=u, p=p, grad_p=grad_p, g=g,
        mesh_family="square-tri",
        bc_spec=lambda x, y: "neumann")


def _square_quad():
    # p harmonic; u = grad(sin x cosh y) is its divergence-free conjugate
    shift = (np.cos(1.0) - 1.0) * (np.cosh(1.0) - 1.0)

    def u(pts):
        x, y = _xy(pts)
        return np.stack([np.cos(x) * np.cosh(y), np.sin(x) * np.sinh(y)], axis=-1)

    def p(pts):
        x, y = _xy(pts)
        return -np.sin(x) * np.sinh(y) - shift

    def grad_p(pts):
        x, y = _xy(pts)
        return np.stack([-np.cos(x) * np.sinh(y), -np.sin(x) * np.cosh(y)], axis=-1)

    def g(pts):
        return np.zeros(pts.shape[:-1])

    return ManufacturedCase(
        name="square-quad", u=u, p=p, grad_p=grad_p, g=g,
        mesh_family="square-quad",
        bc_spec=lambda x, y: "dirichlet" if y < 1e-12 else "neumann")


def _circle():
    def u(pts):
        x, y = _xy(pts)
        return np.stack([np.exp(x) * np.sin(x * y) / 10.0, x**4 + y**2], axis=-1)

    def p(pts):
        x, y = _xy(pts)
        return x**3 * np.cos(x) + y**2 * np.sin(x)

    def grad_p(pts):
        x, y = _xy(pts)
        return np.stack([
            3 * x**2 * np.cos(x) - x**3 * np.sin(x) + y**2 * np.cos(x),
            2 * y * np.sin(x)], axis=-1)

    def g(pts):
        x, y = _xy(pts)
        return 2 * y + (np.exp(x) * np.sin(x * y) + y * np.exp(x) * np.cos(x * y)) / 10.0

    return ManufacturedCase(
        name="circle", u=u, p=p, grad_p=grad_p, g=g,
        mesh_family="circle-tri",
        bc_spec=lambda x, y: "neumann",
        sample_box=((-0.6, 0.6), (-0.6, 0.6)))


def _annulus():
    def u(pts):
        x, y = _xy(pts)
        return np.stack([-x * y**2, -(x**2) * y - 1.5 * y**2], axis=-1)

    def p(pts):
        x, y = _xy(pts)
        return (x**2 * y**2 + y**3) / 2.0

    def grad_p(pts):
        x, y = _xy(pts)
        return np.stack([x * y**2, x**2 * y + 1.5 * y**2], axis=-1)

    def g(pts):
        x, y = _xy(pts)
        return -(x**2) - y**2 - 3 * y

    def bc(x, y):
        # straight edges carry pressure data, curved arcs carry flux data
        return "dirichlet" if min(abs(x), abs(y)) < 1e-10 else "neumann"

    return ManufacturedCase(
        name="annulus", u=u, p=p, grad_p=grad_p, g=g,
        mesh_family="annulus-quad",
        bc_spec=bc,
        sample_box=((0.1, 1.9), (0.1, 1.9)))


def _inspace():
    # synthetic exactness case: u in RT_0, p affine (in Q_k for k >= 1)
    def u(pts):
        x, y = _xy(pts)
        return np.stack([x, -y], axis=-1)

    def p(pts):
        return pts[..., 0] - 0.5

    def grad_p(pts):
        out = np.zeros(pts.shape)
        out[..., 0] = 1.0
        return out

    def g(pts):
        return np.zeros(pts.shape[:-1])

    return ManufacturedCase(
        name="inspace", u=u, p=p, grad_p=grad_p, g=g,
        mesh_family="square-quad",
        bc_spec=lambda x, y: "dirichlet" if y < 1e-12 else "neumann")


_REGISTRY = {}
for _builder in (_square_tri, _square_quad, _circle, _annulus, _inspace):
    _case = _builder()
    _REGISTRY[_case.name] = _case


def get_case(name):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise InvalidParameterError(
            f"unknown case {name!r}; available: {sorted(_REGISTRY)}") from None


def case_names():
    return sorted(_REGISTRY)
