"""Constructive planar geometry: shapes, grids, masks.

Shapes are immutable and describe either an open domain (``closed=False``)
or a closed set (``closed=True``).  Every shape exposes a vectorized
membership test and a signed-distance bound ``sdf`` (negative inside).  For
primitives the bound is exact; boolean combinations use the usual min/max
rules, which never overestimate the distance to the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .errors import ExhaustionError, ResolutionError


def _c(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def _xy(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


class Shape:
    closed: bool = False

    def contains(self, z) -> np.ndarray:
        raise NotImplementedError

    def sdf(self, z) -> np.ndarray:
        raise NotImplementedError

    def bbox(self) -> tuple[float, float, float, float]:
        raise NotImplementedError

    def diameter(self) -> float:
        x0, y0, x1, y1 = self.bbox()
        return float(np.hypot(x1 - x0, y1 - y0))

    def to_dict(self) -> dict:
        raise NotImplementedError

    def draw(self, u: np.ndarray) -> np.ndarray:
        """Candidate points from uniform ``u`` of shape ``(n, 2)``; callers filter by ``contains``."""
        x0, y0, x1, y1 = self.bbox()
        return (x0 + u[:, 0] * (x1 - x0)) + 1j * (y0 + u[:, 1] * (y1 - y0))

    def __contains__(self, z) -> bool:
        return bool(self.contains(np.asarray(z, dtype=complex)))


@dataclass(frozen=True)
class Disc(Shape):
    center: complex
    radius: float
    closed: bool = False

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disc radius must be positive")
        object.__setattr__(self, "center", _c(self.center))

    def contains(self, z):
        d = np.abs(np.asarray(z, dtype=complex) - self.center)
        return d <= self.radius if self.closed else d < self.radius

    def sdf(self, z):
        return np.abs(np.asarray(z, dtype=complex) - self.center) - self.radius

    def bbox(self):
        c, r = self.center, self.radius
        return (c.real - r, c.imag - r, c.real + r, c.imag + r)

    def diameter(self):
        return 2.0 * self.radius

    def to_dict(self):
        return {"shape": "disc", "center": _xy(self.center),
                "radius": self.radius, "closed": self.closed}


@dataclass(frozen=True)
class Annulus(Shape):
    center: complex
    r_in: float
    r_out: float
    closed: bool = False

    def __post_init__(self):
        if not (self.r_out > 0 and 0 <= self.r_in < self.r_out):
            raise ValueError("annulus needs 0 <= r_in < r_out")
        object.__setattr__(self, "center", _c(self.center))

    def contains(self, z):
        d = np.abs(np.asarray(z, dtype=complex) - self.center)
        if self.closed:
            return (d >= self.r_in) & (d <= self.r_out)
        return (d > self.r_in) & (d < self.r_out)

    def sdf(self, z):
        d = np.abs(np.asarray(z, dtype=complex) - self.center)
        return np.maximum(self.r_in - d, d - self.r_out)

    def bbox(self):
        c, r = self.center, self.r_out
        return (c.real - r, c.imag - r, c.real + r, c.imag + r)

    def diameter(self):
        return 2.0 * self.r_out

    def to_dict(self):
        return {"shape": "annulus", "center": _xy(self.center), "r_in": self.r_in,
                "r_out": self.r_out, "closed": self.closed}


@dataclass(frozen=True)
class Rectangle(Shape):
    lower: complex
    upper: complex
    closed: bool = False

    def __post_init__(self):
        lo, hi = _c(self.lower), _c(self.upper)
        lo, hi = (complex(min(lo.real, hi.real), min(lo.imag, hi.imag)),
                  complex(max(lo.real, hi.real), max(lo.imag, hi.imag)))
        if not (hi.real > lo.real and hi.imag > lo.imag):
            raise ValueError("rectangle must have positive area")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        lo, hi = self.lower, self.upper
        if self.closed:
            return (x >= lo.real) & (x <= hi.real) & (y >= lo.imag) & (y <= hi.imag)
        return (x > lo.real) & (x < hi.real) & (y > lo.imag) & (y < hi.imag)

    def sdf(self, z):
        z = np.asarray(z, dtype=complex)
        c = 0.5 * (self.lower + self.upper)
        half = 0.5 * (self.upper - self.lower)
        qx = np.abs(z.real - c.real) - half.real
        qy = np.abs(z.imag - c.imag) - half.imag
        outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
        return outside + np.minimum(np.maximum(qx, qy), 0.0)

    def bbox(self):
        return (self.lower.real, self.lower.imag, self.upper.real, self.upper.imag)

    def to_dict(self):
        return {"shape": "rectangle", "corners": [_xy(self.lower), _xy(self.upper)],
                "closed": self.closed}


@dataclass(frozen=True)
class Union(Shape):
    parts: tuple

    def __post_init__(self):
        if len(self.parts) == 0:
            raise ValueError("union needs at least one part")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def closed(self):
        return all(p.closed for p in self.parts)

    def contains(self, z):
        return np.logical_or.reduce([p.contains(z) for p in self.parts])

    def sdf(self, z):
        return np.minimum.reduce([p.sdf(z) for p in self.parts])

    def bbox(self):
        boxes = np.array([p.bbox() for p in self.parts])
        return (boxes[:, 0].min(), boxes[:, 1].min(), boxes[:, 2].max(), boxes[:, 3].max())

    def to_dict(self):
        return {"shape": "union", "parts": [p.to_dict() for p in self.parts]}


@dataclass(frozen=True)
class Intersection(Shape):
    parts: tuple

    def __post_init__(self):
        if len(self.parts) == 0:
            raise ValueError("intersection needs at least one part")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def closed(self):
        return all(p.closed for p in self.parts)

    def contains(self, z):
        return np.logical_and.reduce([p.contains(z) for p in self.parts])

    def sdf(self, z):
        return np.maximum.reduce([p.sdf(z) for p in self.parts])

    def bbox(self):
        boxes = np.array([p.bbox() for p in self.parts])
        return (boxes[:, 0].max(), boxes[:, 1].max(), boxes[:, 2].min(), boxes[:, 3].min())

    def to_dict(self):
        return {"shape": "intersection", "parts": [p.to_dict() for p in self.parts]}


@dataclass(frozen=True)
class Difference(Shape):
    base: Shape
    removed: Shape

    @property
    def closed(self):
        return self.base.closed and not self.removed.closed

    def contains(self, z):
        return self.base.contains(z) & ~self.removed.contains(z)

    def sdf(self, z):
        return np.maximum(self.base.sdf(z), -self.removed.sdf(z))

    def bbox(self):
        return self.base.bbox()

    def to_dict(self):
        return {"shape": "difference", "parts": [self.base.to_dict(), self.removed.to_dict()]}


@dataclass(frozen=True)
class MinusPoints(Shape):
    """A closed set with finitely many points removed.

    Points are polar, so they are ignored by ``sdf``; on a grid the node
    nearest to each point is cleared (see :func:`rasterize`).
    """

    base: Shape
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(_c(p) for p in self.points))

    @property
    def closed(self):
        return self.base.closed

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.base.contains(z)
        for p in self.points:
            out = out & (z != p)
        return out

    def sdf(self, z):
        return self.base.sdf(z)

    def bbox(self):
        return self.base.bbox()

    def diameter(self):
        return self.base.diameter()

    def to_dict(self):
        return {"shape": "minus_points", "base": self.base.to_dict(),
                "points": [_xy(p) for p in self.points]}


@dataclass(frozen=True)
class PointSet(Shape):
    """A finite set of points (closed, polar)."""

    points: tuple
    closed: bool = True

    def __post_init__(self):
        pts = tuple(_c(p) for p in self.points)
        if not pts:
            raise ValueError("empty point set")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "closed", True)

    def _array(self) -> np.ndarray:
        return np.array(self.points, dtype=complex)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return np.isin(z, self._array())

    def sdf(self, z):
        z = np.asarray(z, dtype=complex)
        return np.min(np.abs(z[..., None] - self._array()), axis=-1)

    def bbox(self):
        p = self._array()
        return (float(p.real.min()), float(p.imag.min()), float(p.real.max()), float(p.imag.max()))

    def draw(self, u):
        p = self._array()
        return p[np.minimum((u[:, 0] * p.size).astype(int), p.size - 1)]

    def to_dict(self):
        return {"shape": "points", "points": [_xy(p) for p in self.points]}


@dataclass(frozen=True)
class Eroded(Shape):
    """``{z : sdf(z) < -eps}`` for shapes without a closed-form erosion."""

    base: Shape
    eps: float

    @property
    def closed(self):
        return self.base.closed

    def contains(self, z):
        s = self.base.sdf(z)
        inside = self.base.contains(z)
        return inside & ((s <= -self.eps) if self.closed else (s < -self.eps))

    def sdf(self, z):
        return self.base.sdf(z) + self.eps

    def bbox(self):
        x0, y0, x1, y1 = self.base.bbox()
        e = self.eps
        return (x0 + e, y0 + e, x1 - e, y1 - e)

    def to_dict(self):
        return {"shape": "eroded", "base": self.base.to_dict(), "eps": self.eps}


def union(*parts: Shape) -> Union:
    return Union(tuple(parts))


def intersection(*parts: Shape) -> Intersection:
    return Intersection(tuple(parts))


def difference(base: Shape, removed: Shape) -> Difference:
    return Difference(base, removed)


def shape_from_dict(d: dict) -> Shape:
    kind = d["shape"]
    closed = bool(d.get("closed", False))
    if kind == "disc":
        return Disc(_c(d["center"]), float(d["radius"]), closed)
    if kind == "annulus":
        return Annulus(_c(d["center"]), float(d["r_in"]), float(d["r_out"]), closed)
    if kind == "rectangle":
        lo, hi = d["corners"]
        return Rectangle(_c(lo), _c(hi), closed)
    if kind == "union":
        return Union(tuple(shape_from_dict(p) for p in d["parts"]))
    if kind == "intersection":
        return Intersection(tuple(shape_from_dict(p) for p in d["parts"]))
    if kind == "difference":
        base, removed = d["parts"]
        return Difference(shape_from_dict(base), shape_from_dict(removed))
    if kind == "minus_points":
        return MinusPoints(shape_from_dict(d["base"]), tuple(_c(p) for p in d["points"]))
    if kind == "points":
        return PointSet(tuple(_c(p) for p in d["points"]))
    if kind == "eroded":
        return Eroded(shape_from_dict(d["base"]), float(d["eps"]))
    raise ValueError(f"unknown shape {kind!r}")


@dataclass(frozen=True)
class Grid:
    """Uniform node grid on the rectangle ``[lower, upper]``.

    Arrays on a grid have shape ``(ny, nx)``; flat index is ``iy * nx + ix``.
    """

    lower: complex
    upper: complex
    nx: int
    ny: int

    def __post_init__(self):
        object.__setattr__(self, "lower", _c(self.lower))
        object.__setattr__(self, "upper", _c(self.upper))
        if self.nx < 8 or self.ny < 8:
            raise ValueError("grid needs nx, ny >= 8")
        if not (self.upper.real > self.lower.real and self.upper.imag > self.lower.imag):
            raise ValueError("grid rectangle must have positive area")

    @classmethod
    def square(cls, half_width: float, n: int, center: complex = 0j) -> "Grid":
        h = complex(half_width, half_width)
        return cls(center - h, center + h, n, n)

    @property
    def hx(self) -> float:
        return (self.upper.real - self.lower.real) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.upper.imag - self.lower.imag) / (self.ny - 1)

    @property
    def spacing(self) -> float:
        return max(self.hx, self.hy)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def xs(self) -> np.ndarray:
        return np.linspace(self.lower.real, self.upper.real, self.nx)

    def ys(self) -> np.ndarray:
        return np.linspace(self.lower.imag, self.upper.imag, self.ny)

    def points(self) -> np.ndarray:
        x, y = np.meshgrid(self.xs(), self.ys())
        return x + 1j * y

    def nearest_index(self, z: complex) -> tuple[int, int] | None:
        ix = int(round((z.real - self.lower.real) / self.hx))
        iy = int(round((z.imag - self.lower.imag) / self.hy))
        if 0 <= ix < self.nx and 0 <= iy < self.ny:
            return iy, ix
        return None

    def to_dict(self) -> dict:
        return {"lower": _xy(self.lower), "upper": _xy(self.upper), "nx": self.nx, "ny": self.ny}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(_c(d["lower"]), _c(d["upper"]), int(d["nx"]), int(d["ny"]))


@dataclass(frozen=True, eq=False)
class Mask:
    grid: Grid
    flags: np.ndarray = field(repr=False)

    def __post_init__(self):
        flags = np.asarray(self.flags, dtype=bool).reshape(self.grid.shape)
        flags.setflags(write=False)
        object.__setattr__(self, "flags", flags)

    def count(self) -> int:
        return int(self.flags.sum())

    def __or__(self, other: "Mask") -> "Mask":
        return Mask(self.grid, self.flags | other.flags)

    def __and__(self, other: "Mask") -> "Mask":
        return Mask(self.grid, self.flags & other.flags)

    def __sub__(self, other: "Mask") -> "Mask":
        return Mask(self.grid, self.flags & ~other.flags)

    def __eq__(self, other):
        return (isinstance(other, Mask) and self.grid == other.grid
                and bool(np.array_equal(self.flags, other.flags)))

    def issubset(self, other: "Mask") -> bool:
        return not bool(np.any(self.flags & ~other.flags))


def rasterize(spec: Shape, grid: Grid) -> Mask:
    """Flag grid nodes belonging to ``spec``.

    Removed points of a :class:`MinusPoints` set clear their nearest node.
    """
    flags = _raster(spec, grid)
    if not flags.any():
        raise ResolutionError("set not resolved at this resolution")
    return Mask(grid, flags)


def _raster(spec: Shape, grid: Grid) -> np.ndarray:
    if isinstance(spec, MinusPoints):
        flags = _raster(spec.base, grid).copy()
        for p in spec.points:
            idx = grid.nearest_index(p)
            if idx is not None:
                flags[idx] = False
        return flags
    if isinstance(spec, PointSet):
        flags = np.zeros(grid.shape, dtype=bool)
        for p in spec.points:
            idx = grid.nearest_index(p)
            if idx is not None:
                flags[idx] = True
        return flags
    if isinstance(spec, Union):
        return np.logical_or.reduce([_raster(p, grid) for p in spec.parts])
    if isinstance(spec, Intersection):
        return np.logical_and.reduce([_raster(p, grid) for p in spec.parts])
    if isinstance(spec, Difference):
        return _raster(spec.base, grid) & ~_raster(spec.removed, grid)
    return np.asarray(spec.contains(grid.points()), dtype=bool)


def erode(spec: Shape, eps: float) -> Shape:
    if isinstance(spec, Disc):
        if spec.radius - eps <= 0:
            raise ExhaustionError("exhaustion index too small for domain")
        return Disc(spec.center, spec.radius - eps, spec.closed)
    if isinstance(spec, Annulus):
        if spec.r_in + eps >= spec.r_out - eps:
            raise ExhaustionError("exhaustion index too small for domain")
        return Annulus(spec.center, spec.r_in + eps, spec.r_out - eps, spec.closed)
    if isinstance(spec, Rectangle):
        lo, hi = spec.lower + complex(eps, eps), spec.upper - complex(eps, eps)
        if hi.real <= lo.real or hi.imag <= lo.imag:
            raise ExhaustionError("exhaustion index too small for domain")
        return Rectangle(lo, hi, spec.closed)
    out = Eroded(spec, eps)
    x0, y0, x1, y1 = spec.bbox()
    probe = Grid(complex(x0, y0), complex(x1, y1), 257, 257)
    if not out.contains(probe.points()).any():
        raise ExhaustionError("exhaustion index too small for domain")
    return out


def exhaustion(spec: Shape, k: int) -> Shape:
    """The ``k``-th member of the standard exhaustion: erosion by ``diam / (4k)``."""
    if k < 1:
        raise ValueError("exhaustion index must be >= 1")
    return erode(spec, spec.diameter() / (4.0 * k))


DomainSpec = Shape
SetSpec = Shape
