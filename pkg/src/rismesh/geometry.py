"""Beam-shape geometry: conical and cylindrical beams, RIS footprints,
illuminated element counts and the circle overlaps used for interference."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .validation import check_angle, check_nonnegative, check_positive, check_vec3

#: Absolute tolerance (m) for boundary predicates.
BOUNDARY_TOL = 1e-9

# Relative slack before flooring an element count, so that a panel tiled by
# exactly N elements is not counted as N - 1 after rounding.
_FLOOR_EPS = 1e-9


def unit(v) -> np.ndarray:
    v = check_vec3(v)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalise a zero vector")
    return v / n


@dataclass(frozen=True, eq=False)
class ConeBeam:
    """Conical beam leaving a BS or relay node."""

    apex: np.ndarray
    axis: np.ndarray
    half_angle: float
    length: float

    def __post_init__(self):
        object.__setattr__(self, "apex", check_vec3(self.apex))
        object.__setattr__(self, "axis", unit(self.axis))
        if not 0.0 < self.half_angle < math.pi / 2:
            raise ValueError(f"half_angle must lie in (0, pi/2), got {self.half_angle}")
        check_positive(self.length, "length")

    @property
    def origin(self) -> np.ndarray:
        return self.apex

    def radius_at(self, t: float) -> float:
        return math.tan(self.half_angle) * t


@dataclass(frozen=True, eq=False)
class CylinderBeam:
    """Cylindrical beam reflected by a RIS."""

    base_center: np.ndarray
    axis: np.ndarray
    radius: float
    length: float

    def __post_init__(self):
        object.__setattr__(self, "base_center", check_vec3(self.base_center))
        object.__setattr__(self, "axis", unit(self.axis))
        check_positive(self.radius, "radius")
        check_positive(self.length, "length")

    @property
    def origin(self) -> np.ndarray:
        return self.base_center

    def radius_at(self, t: float) -> float:
        return self.radius


@dataclass(frozen=True)
class RisPanel:
    """A RIS modelled as a circular disc of ``element_count`` elements.

    ``radius`` is derived from ``area`` (disc model), so the footprint and
    radius caps of the illuminated-area rules stay mutually consistent.
    """

    element_count: int
    dx: float
    dy: float
    area: float

    def __post_init__(self):
        if int(self.element_count) < 1:
            raise ValueError("element_count must be >= 1")
        check_positive(self.dx, "dx")
        check_positive(self.dy, "dy")
        check_positive(self.area, "area")
        cell = self.dx * self.dy
        if self.element_count * cell < self.area - cell * (1 + 1e-9):
            raise ValueError("elements do not tile the panel area")

    @property
    def radius(self) -> float:
        return math.sqrt(self.area / math.pi)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @classmethod
    def from_elements(cls, element_count: int, dx: float, dy: float | None = None) -> RisPanel:
        """Panel whose area is exactly the tiled element area."""
        dy = dx if dy is None else dy
        return cls(int(element_count), dx, dy, element_count * dx * dy)

    @classmethod
    def from_area(cls, area: float, dx: float, dy: float | None = None) -> RisPanel:
        """Panel of the given area with just enough elements to tile it."""
        dy = dx if dy is None else dy
        n = math.ceil(area / (dx * dy) * (1 - _FLOOR_EPS))
        return cls(max(n, 1), dx, dy, area)

    def count_elements(self, area: float) -> int:
        """Whole elements covered by ``area`` (m^2), capped at the panel size."""
        if area <= 0.0:
            return 0
        n = math.floor(area / self.cell_area * (1 + _FLOOR_EPS))
        return min(n, self.element_count)


@dataclass(frozen=True)
class IlluminatedArea:
    radius: float
    area: float
    element_count: int


def footprint_radius(alpha: float, d: float) -> float:
    """Radius of a conical beam of full angle ``alpha`` at distance ``d``."""
    check_angle(alpha, "alpha", upper=math.pi)
    check_nonnegative(d, "d")
    return math.tan(alpha / 2.0) * d


def footprint_area(r_fp: float) -> float:
    check_nonnegative(r_fp, "r_fp")
    return math.pi * r_fp * r_fp


def illuminated(panel: RisPanel, alpha: float, d: float) -> IlluminatedArea:
    """Part of ``panel`` actually lit by a cone of angle ``alpha`` from ``d`` away."""
    r_fp = footprint_radius(alpha, d)
    area = min(footprint_area(r_fp), panel.area)
    radius = min(r_fp, panel.radius)
    return IlluminatedArea(radius, area, panel.count_elements(area))


def illuminated_by_radius(panel: RisPanel, radius: float) -> IlluminatedArea:
    """Same as :func:`illuminated` for a beam whose radius at the panel is known."""
    check_nonnegative(radius, "radius")
    area = min(footprint_area(radius), panel.area)
    return IlluminatedArea(min(radius, panel.radius), area, panel.count_elements(area))


def cone_volume(r_fp: float, d: float) -> float:
    return math.pi * r_fp * r_fp * d / 3.0


def cylinder_volume(r: float, d: float) -> float:
    return math.pi * r * r * d


def beam_volume(
    i: int,
    h: int,
    d: float,
    *,
    alpha: float | None = None,
    r_ira: float | None = None,
) -> float:
    """Volume swept by hop ``i`` (1-based) of an ``h``-hop transmission.

    The first hop is a cone and needs ``alpha``; later hops are cylinders of
    radius ``r_ira``. For the last hop pass the interference length from
    :func:`last_hop_length` as ``d``.
    """
    if not 1 <= i <= h:
        raise IndexError(f"hop index {i} outside 1..{h}")
    check_nonnegative(d, "d")
    if i == 1:
        if alpha is None:
            raise ValueError("first hop volume needs alpha")
        return cone_volume(footprint_radius(alpha, d), d)
    if r_ira is None:
        raise ValueError("cylindrical hop volume needs r_ira")
    return cylinder_volume(r_ira, d)


def last_hop_length(d_th: float, prior_hops) -> float:
    """Length over which the last hop can still interfere (clamped at 0)."""
    check_positive(d_th, "d_th")
    return max(0.0, d_th - math.fsum(prior_hops))


def _axial_radial(points: np.ndarray, origin: np.ndarray, axis: np.ndarray):
    rel = points - origin
    t = rel @ axis
    radial = np.linalg.norm(rel - np.outer(t, axis), axis=1)
    return t, radial


def point_in_cone(p, beam: ConeBeam, tol: float = BOUNDARY_TOL):
    """Containment test; accepts one point or an ``(n, 3)`` array."""
    pts = np.asarray(p, dtype=float)
    single = pts.ndim == 1
    t, radial = _axial_radial(np.atleast_2d(pts), beam.apex, beam.axis)
    inside = (t > 0.0) & (t <= beam.length + tol) & (radial <= t * math.tan(beam.half_angle) + tol)
    return bool(inside[0]) if single else inside


def point_in_cylinder(p, beam: CylinderBeam, tol: float = BOUNDARY_TOL):
    """Containment test; accepts one point or an ``(n, 3)`` array."""
    pts = np.asarray(p, dtype=float)
    single = pts.ndim == 1
    t, radial = _axial_radial(np.atleast_2d(pts), beam.base_center, beam.axis)
    inside = (t > 0.0) & (t <= beam.length + tol) & (radial <= beam.radius + tol)
    return bool(inside[0]) if single else inside


def point_in_beam(p, beam) -> bool:
    if isinstance(beam, ConeBeam):
        return point_in_cone(p, beam)
    return point_in_cylinder(p, beam)


def circle_intersection_area(c1, r1: float, c2, r2: float) -> float:
    """Area of the lens shared by two circles in a plane."""
    check_nonnegative(r1, "r1")
    check_nonnegative(r2, "r2")
    d = math.dist(tuple(c1), tuple(c2))
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2) or d * min(r1, r2) == 0.0:  # nested, or d underflows
        r = min(r1, r2)
        return math.pi * r * r
    # clip guards acos against rounding just outside [-1, 1]
    a1 = math.acos(min(1.0, max(-1.0, (d * d + r1 * r1 - r2 * r2) / (2 * d * r1))))
    a2 = math.acos(min(1.0, max(-1.0, (d * d + r2 * r2 - r1 * r1) / (2 * d * r2))))
    k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)
    return r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * math.sqrt(max(k, 0.0))


def interfered_element_count(
    panel: RisPanel,
    own: IlluminatedArea,
    interferer_hit_center,
    interferer_radius: float,
) -> int:
    """Elements lit both by the victim's beam and by an interfering beam.

    The victim's illuminated circle sits at the panel centre (the origin of
    the 2-D panel coordinates); the interferer's circle is centred at
    ``interferer_hit_center``.
    """
    other = illuminated_by_radius(panel, interferer_radius)
    overlap = circle_intersection_area((0.0, 0.0), own.radius, interferer_hit_center, interferer_radius)
    n = panel.count_elements(overlap)
    return min(n, own.element_count, other.element_count)


def plane_basis(normal) -> tuple[np.ndarray, np.ndarray]:
    """Two orthonormal vectors spanning the plane with the given normal."""
    n = unit(normal)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(n, u)


def beam_hit_on_panel(beam, center, normal) -> tuple[tuple[float, float], float] | None:
    """Where ``beam`` lands on the panel plane through ``center``.

    Returns ``((x, y), radius)`` in panel coordinates, or None when the panel
    centre is outside the beam. If the beam axis does not cross the plane
    within the beam length, the hit is treated as concentric.
    """
    center = check_vec3(center)
    if not point_in_beam(center, beam):
        return None
    n = unit(normal)
    origin = beam.origin
    denom = float(n @ beam.axis)
    t_center = float((center - origin) @ beam.axis)
    if abs(denom) > 1e-12:
        t = float(n @ (center - origin)) / denom
        if 0.0 < t <= beam.length + BOUNDARY_TOL:
            u, v = plane_basis(n)
            rel = origin + t * beam.axis - center
            return (float(rel @ u), float(rel @ v)), beam.radius_at(t)
    return (0.0, 0.0), beam.radius_at(t_center)
