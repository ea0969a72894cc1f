from abc import ABC, abstractmethod

import numpy as np

from core.exceptions import GeometryError

# Points closer than this to the focal set have no well-defined projection.
FOCAL_TOLERANCE = 1e-8


class TargetManifold(ABC):
    """Compact submanifold N of R^d with its nearest-point projection."""

    name = "target"
    kind = "abstract"

    @property
    @abstractmethod
    def ambient_dim(self):
        ...

    @abstractmethod
    def project(self, points):
        """Nearest point on N for an array of shape (..., d)."""

    @abstractmethod
    def normals(self, points):
        """Unit normal frame at points of N, shape (..., d, codim)."""

    def tangent_project(self, points, vectors):
        frame = self.normals(points)
        coefficients = np.einsum("...dk,...d->...k", frame, vectors)
        return vectors - np.einsum("...dk,...k->...d", frame, coefficients)

    def distance_to(self, points):
        points = np.asarray(points, dtype=float)
        return np.linalg.norm(self.project(points) - points, axis=-1)

    def describe(self):
        return {"name": self.name, "kind": self.kind, "ambient_dim": self.ambient_dim}


class Sphere(TargetManifold):
    kind = "sphere"

    def __init__(self, radius=1.0, ambient_dim=3, name=None):
        self.radius = float(radius)
        self._dim = int(ambient_dim)
        self.name = name or f"sphere{self._dim - 1}"

    @property
    def ambient_dim(self):
        return self._dim

    def project(self, points):
        points = np.asarray(points, dtype=float)
        norms = np.linalg.norm(points, axis=-1, keepdims=True)
        if np.any(norms < FOCAL_TOLERANCE):
            raise GeometryError("Projection onto the sphere is undefined at the origin")
        return self.radius * points / norms

    def normals(self, points):
        points = np.asarray(points, dtype=float)
        return (points / np.linalg.norm(points, axis=-1, keepdims=True))[..., None]

    def describe(self):
        return {**super().describe(), "radius": self.radius}


class FlatTorusProduct(TargetManifold):
    """Product of round circles, circle k living in coordinates (2k, 2k+1)."""

    kind = "flat_torus_product"

    def __init__(self, radii=(2 ** -0.5, 2 ** -0.5), name="clifford-torus"):
        self.radii = tuple(float(r) for r in radii)
        self.name = name

    @property
    def ambient_dim(self):
        return 2 * len(self.radii)

    def _pairs(self, points):
        points = np.asarray(points, dtype=float)
        return points.reshape(points.shape[:-1] + (len(self.radii), 2))

    def project(self, points):
        pairs = self._pairs(points)
        norms = np.linalg.norm(pairs, axis=-1, keepdims=True)
        if np.any(norms < FOCAL_TOLERANCE):
            raise GeometryError("Projection onto the flat torus is undefined on a circle axis")
        radii = np.asarray(self.radii)[:, None]
        projected = radii * pairs / norms
        return projected.reshape(np.shape(points))

    def normals(self, points):
        pairs = self._pairs(points)
        unit = pairs / np.linalg.norm(pairs, axis=-1, keepdims=True)
        count = len(self.radii)
        frame = np.zeros(pairs.shape[:-2] + (2 * count, count))
        for k in range(count):
            frame[..., 2 * k:2 * k + 2, k] = unit[..., k, :]
        return frame

    def describe(self):
        return {**super().describe(), "radii": list(self.radii)}


class Ellipsoid(TargetManifold):
    """Ellipsoid sum (x_i / a_i)^2 = 1 with nearest-point projection by bisection."""

    kind = "ellipsoid"

    def __init__(self, semi_axes=(1.0, 1.0, 0.8), name="ellipsoid", steps=200):
        self.semi_axes = np.asarray(semi_axes, dtype=float)
        self.name = name
        self.steps = steps

    @property
    def ambient_dim(self):
        return len(self.semi_axes)

    def project(self, points):
        points = np.asarray(points, dtype=float)
        a2 = self.semi_axes ** 2
        if np.any(np.linalg.norm(points, axis=-1) < FOCAL_TOLERANCE):
            raise GeometryError("Projection onto the ellipsoid is undefined at the center")
        # Root of sum (x_i a_i / (a_i^2 + t))^2 = 1 on (-min a^2, max a |x|].
        lo = np.full(points.shape[:-1], -a2.min())
        hi = np.maximum(self.semi_axes.max() * np.linalg.norm(points, axis=-1), 0.0)
        for _ in range(self.steps):
            mid = 0.5 * (lo + hi)
            value = np.sum((points * self.semi_axes / (a2 + mid[..., None])) ** 2, axis=-1) - 1.0
            lo = np.where(value > 0, mid, lo)
            hi = np.where(value > 0, hi, mid)
        t = 0.5 * (lo + hi)
        foot = points * a2 / (a2 + t[..., None])
        scale = np.sqrt(np.sum((foot / self.semi_axes) ** 2, axis=-1, keepdims=True))
        return foot / scale

    def normals(self, points):
        points = np.asarray(points, dtype=float)
        gradient = points / self.semi_axes ** 2
        return (gradient / np.linalg.norm(gradient, axis=-1, keepdims=True))[..., None]

    def describe(self):
        return {**super().describe(), "semi_axes": self.semi_axes.tolist()}


TARGETS = {
    "sphere2": lambda: Sphere(1.0, 3),
    "sphere3": lambda: Sphere(1.0, 4),
    "sphere4": lambda: Sphere(1.0, 5),
    "clifford-torus": lambda: FlatTorusProduct(),
    "ellipsoid": lambda: Ellipsoid(),
}


def get_target(name):
    """Build a target manifold by registry name."""
    try:
        return TARGETS[name]()
    except KeyError:
        raise ValueError(f"Unknown target '{name}'. Available: {', '.join(sorted(TARGETS))}") from None


def target_from_description(data):
    """Inverse of ``TargetManifold.describe``."""
    kind = data.get("kind")
    try:
        if kind == "sphere":
            return Sphere(data.get("radius", 1.0), data["ambient_dim"], name=data.get("name"))
        if kind == "flat_torus_product":
            return FlatTorusProduct(data["radii"], name=data.get("name", "clifford-torus"))
        if kind == "ellipsoid":
            return Ellipsoid(data["semi_axes"], name=data.get("name", "ellipsoid"))
    except KeyError as e:
        raise ValueError(f"Target description {data} is missing {e}") from e
    return get_target(data.get("name"))
