"""Built-in manifolds with height-like functions and reference homology.

Reference groups are standard fixture data entered per entry; the pipeline's
job is to reproduce them from flow counting alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownEntry
from .fields import MorseField, validate_field
from .geometry import (BoundaryConstraint, ChartModel, MetricField, QuotientChart,
                       RegionChart)

Array = np.ndarray


@dataclass(frozen=True)
class ReferenceGroup:
    """Betti numbers plus torsion coefficient lists, degree by degree."""

    betti: tuple[int, ...]
    torsion: tuple[tuple[int, ...], ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.torsion is None:
            object.__setattr__(self, "torsion", tuple(() for _ in self.betti))

    def as_dict(self) -> dict:
        return {"betti": list(self.betti), "torsion": [list(t) for t in self.torsion]}


@dataclass(frozen=True)
class ExpectedCritical:
    kind: str                 # "interior" | "boundary_n" | "boundary_d"
    grading: int
    location: tuple[float, ...]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    chart: ChartModel
    metric: MetricField
    field: MorseField
    expected: tuple[ExpectedCritical, ...]
    chi: int
    orientable: bool
    # reference homology, one group per coefficient flavor
    h_abs: ReferenceGroup            # absolute, plain integer coefficients
    h_abs_or: ReferenceGroup         # absolute, orientation-twisted
    h_rel_co_or: ReferenceGroup      # relative cohomology, orientation-twisted
    h_rel_co: ReferenceGroup         # relative cohomology, plain
    h_rel_or: ReferenceGroup         # relative homology, orientation-twisted

    @property
    def dim(self) -> int:
        return self.chart.dim

    def references(self) -> dict[str, ReferenceGroup]:
        return {
            "H_*(M;Z)": self.h_abs,
            "H_*(M;Z^or)": self.h_abs_or,
            "H^*(M,dM;Z^or)": self.h_rel_co_or,
            "H^*(M,dM;Z)": self.h_rel_co,
            "H_*(M,dM;Z^or)": self.h_rel_or,
        }


def _interval() -> CatalogEntry:
    left = BoundaryConstraint(
        name="left",
        value=lambda x: -x[..., 0],
        gradient=lambda x: np.full(np.shape(x), -1.0),
        hessian=lambda x: np.zeros(np.shape(x)[:-1] + (1, 1)),
    )
    right = BoundaryConstraint(
        name="right",
        value=lambda x: x[..., 0] - 1.0,
        gradient=lambda x: np.full(np.shape(x), 1.0),
        hessian=lambda x: np.zeros(np.shape(x)[:-1] + (1, 1)),
    )
    chart = RegionChart(dim=1, box=((0.0, 1.0),), constraints=(left, right))
    f = MorseField(
        value=lambda x: x[..., 0],
        gradient=lambda x: np.ones(np.shape(x)),
        hessian=lambda x: np.zeros(np.shape(x)[:-1] + (1, 1)),
    )
    return CatalogEntry(
        name="interval", chart=chart, metric=MetricField.euclidean(1), field=f,
        expected=(
            ExpectedCritical("boundary_n", 0, (0.0,)),
            ExpectedCritical("boundary_d", 1, (1.0,)),
        ),
        chi=1, orientable=True,
        h_abs=ReferenceGroup((1, 0)),
        h_abs_or=ReferenceGroup((1, 0)),
        h_rel_co_or=ReferenceGroup((0, 1)),
        h_rel_co=ReferenceGroup((0, 1)),
        h_rel_or=ReferenceGroup((0, 1)),
    )


def _circle_constraint(name: str, radius: float, inner: bool = False) -> BoundaryConstraint:
    r2 = radius * radius
    sgn = -1.0 if inner else 1.0

    def value(x):
        return sgn * (x[..., 0] ** 2 + x[..., 1] ** 2 - r2)

    def gradient(x):
        return sgn * 2.0 * np.asarray(x, dtype=float)

    def hessian(x):
        eye = sgn * 2.0 * np.eye(2)
        return np.broadcast_to(eye, np.shape(x)[:-1] + (2, 2)).copy()

    return BoundaryConstraint(name=name, value=value, gradient=gradient, hessian=hessian)


def _height_field() -> MorseField:
    def gradient(x):
        out = np.zeros(np.shape(x))
        out[..., 1] = 1.0
        return out

    return MorseField(
        value=lambda x: x[..., 1],
        gradient=gradient,
        hessian=lambda x: np.zeros(np.shape(x)[:-1] + (2, 2)),
    )


def _disk() -> CatalogEntry:
    chart = RegionChart(dim=2, box=((-1.1, 1.1), (-1.1, 1.1)),
                        constraints=(_circle_constraint("rim", 1.0),))
    return CatalogEntry(
        name="disk", chart=chart, metric=MetricField.euclidean(2), field=_height_field(),
        expected=(
            ExpectedCritical("boundary_n", 0, (0.0, -1.0)),
            ExpectedCritical("boundary_d", 2, (0.0, 1.0)),
        ),
        chi=1, orientable=True,
        h_abs=ReferenceGroup((1, 0, 0)),
        h_abs_or=ReferenceGroup((1, 0, 0)),
        h_rel_co_or=ReferenceGroup((0, 0, 1)),
        h_rel_co=ReferenceGroup((0, 0, 1)),
        h_rel_or=ReferenceGroup((0, 0, 1)),
    )


def _annulus() -> CatalogEntry:
    chart = RegionChart(
        dim=2, box=((-2.2, 2.2), (-2.2, 2.2)),
        constraints=(_circle_constraint("outer", 2.0),
                     _circle_constraint("inner", 1.0, inner=True)),
    )
    return CatalogEntry(
        name="annulus", chart=chart, metric=MetricField.euclidean(2), field=_height_field(),
        expected=(
            ExpectedCritical("boundary_n", 0, (0.0, -2.0)),
            ExpectedCritical("boundary_n", 1, (0.0, 1.0)),
            ExpectedCritical("boundary_d", 1, (0.0, -1.0)),
            ExpectedCritical("boundary_d", 2, (0.0, 2.0)),
        ),
        chi=0, orientable=True,
        h_abs=ReferenceGroup((1, 1, 0)),
        h_abs_or=ReferenceGroup((1, 1, 0)),
        h_rel_co_or=ReferenceGroup((0, 1, 1)),
        h_rel_co=ReferenceGroup((0, 1, 1)),
        h_rel_or=ReferenceGroup((0, 1, 1)),
    )


def _moebius() -> CatalogEntry:
    chart = QuotientChart(period=2.0 * math.pi, v_min=-1.0, v_max=1.0, flip=-1)

    def value(x):
        return x[..., 1] * np.sin(x[..., 0] / 2.0)

    def gradient(x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            u, v = float(x[0]), float(x[1])
            return np.array([v * math.cos(u / 2.0) / 2.0, math.sin(u / 2.0)])
        u, v = x[..., 0], x[..., 1]
        return np.stack([v * np.cos(u / 2.0) / 2.0, np.sin(u / 2.0)], axis=-1)

    def hessian(x):
        u, v = x[..., 0], x[..., 1]
        out = np.zeros(np.shape(x)[:-1] + (2, 2))
        out[..., 0, 0] = -v * np.sin(u / 2.0) / 4.0
        out[..., 0, 1] = np.cos(u / 2.0) / 2.0
        out[..., 1, 0] = out[..., 0, 1]
        return out

    f = MorseField(value=value, gradient=gradient, hessian=hessian)
    return CatalogEntry(
        name="moebius", chart=chart, metric=MetricField.euclidean(2), field=f,
        expected=(
            ExpectedCritical("interior", 1, (0.0, 0.0)),
            ExpectedCritical("boundary_n", 0, (math.pi, -1.0)),
            ExpectedCritical("boundary_d", 2, (math.pi, 1.0)),
        ),
        chi=0, orientable=False,
        h_abs=ReferenceGroup((1, 1, 0)),
        h_abs_or=ReferenceGroup((0, 0, 0), ((2,), (), ())),
        h_rel_co_or=ReferenceGroup((0, 1, 1)),
        h_rel_co=ReferenceGroup((0, 0, 0), ((), (), (2,))),
        h_rel_or=ReferenceGroup((0, 1, 1)),
    )


def _tilted_dome() -> CatalogEntry:
    chart = RegionChart(dim=2, box=((-1.1, 1.1), (-1.1, 1.1)),
                        constraints=(_circle_constraint("rim", 1.0),))

    def value(x):
        return 1.0 - x[..., 0] ** 2 - x[..., 1] ** 2 + x[..., 1] / 2.0

    def gradient(x):
        out = -2.0 * np.asarray(x, dtype=float)
        out[..., 1] += 0.5
        return out

    def hessian(x):
        eye = -2.0 * np.eye(2)
        return np.broadcast_to(eye, np.shape(x)[:-1] + (2, 2)).copy()

    f = MorseField(value=value, gradient=gradient, hessian=hessian)
    return CatalogEntry(
        name="tilted_dome", chart=chart, metric=MetricField.euclidean(2), field=f,
        expected=(
            ExpectedCritical("interior", 2, (0.0, 0.25)),
            ExpectedCritical("boundary_n", 1, (0.0, 1.0)),
            ExpectedCritical("boundary_n", 0, (0.0, -1.0)),
        ),
        chi=1, orientable=True,
        h_abs=ReferenceGroup((1, 0, 0)),
        h_abs_or=ReferenceGroup((1, 0, 0)),
        h_rel_co_or=ReferenceGroup((0, 0, 1)),
        h_rel_co=ReferenceGroup((0, 0, 1)),
        h_rel_or=ReferenceGroup((0, 0, 1)),
    )


_BUILDERS = {
    "interval": _interval,
    "disk": _disk,
    "annulus": _annulus,
    "moebius": _moebius,
    "tilted_dome": _tilted_dome,
}

_CACHE: dict[str, CatalogEntry] = {}


def names() -> list[str]:
    return list(_BUILDERS)


def get(name: str) -> CatalogEntry:
    if name not in _BUILDERS:
        raise UnknownEntry(name)
    if name not in _CACHE:
        entry = _BUILDERS[name]()
        validate_field(entry.field, entry.chart)
        _CACHE[name] = entry
    return _CACHE[name]
