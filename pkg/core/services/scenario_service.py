"""
Module core.services.scenario_service

Library of initial sweepouts and synthetic slice sequences.

Every scenario joins constant maps with mark i. The S^3 families are written in
C^2 coordinates (z1, z2) = (x1 + i x2, x3 + i x4).

Scenarios:
    constant: every slice is the same point of the configured target.
    bump: a spatial bump on S^2 switched on and off in time.
    clifford: a great circle opens into the Clifford torus and closes again.
    shear-clifford: the same with unequal radii and the second circle along s + t.
    degenerate: Clifford tori whose second radius collapses geometrically.
"""

import logging

import numpy as np

from core.exceptions import ScenarioError
from core.models import Lattice, MapSlice, ScenarioSpec, Sweepout, get_target

logger = logging.getLogger(__name__)

BUMP_CENTER = (0.625, 0.625)
BUMP_RADIUS = 0.1
BUMP_AMPLITUDE = 0.22
SHEAR_FIRST_RADIUS = 0.5
DEGENERATE_MAX_FREQUENCY = 128


def _grid(grid):
    s, t = np.meshgrid(np.arange(grid) / grid, np.arange(grid) / grid, indexing="ij")
    return s, t


def _c2(z1, z2):
    return np.stack([np.real(z1), np.imag(z1), np.real(z2), np.imag(z2)], axis=-1)


def _tent(t):
    return max(0.0, 1.0 - abs(2.0 * t - 1.0))


def _bump_profile(distance, radius):
    r2 = (distance / radius) ** 2
    return np.where(r2 < 1.0, (1.0 - r2) ** 2, 0.0)


def _constant_point(target):
    return target.project(np.ones(target.ambient_dim) / np.sqrt(target.ambient_dim))


class ScenarioService:

    @staticmethod
    def bump_slice(grid, amplitude, center=BUMP_CENTER, radius=BUMP_RADIUS, lattice=None):
        """Pi(p + amplitude * psi * e1) on S^2 with p the north pole and psi = (1 - r^2/rho^2)^2."""
        target = get_target("sphere2")
        lattice = lattice or Lattice()
        s, t = _grid(grid)
        psi = _bump_profile(np.abs(lattice.minimal_displacement(s - center[0], t - center[1])), radius)
        points = np.zeros((grid, grid, 3))
        points[..., 2] = 1.0
        points[..., 0] = amplitude * psi
        return MapSlice.from_points(lattice, points, target)

    @staticmethod
    def circle_slice(grid, opening, phase="s"):
        """
        (a e^{2 pi i phase}, sqrt(1 - a^2)): from the point (0, 1) at a = 0 to a
        great circle at a = 1. ``phase`` is ``"s"`` or ``"s+t"``.
        """
        s, t = _grid(grid)
        angle = 2 * np.pi * (s if phase == "s" else s + t)
        z = opening * np.exp(1j * angle)
        if phase == "s":
            return MapSlice.from_points(Lattice(), _c2(z, np.full_like(z, np.sqrt(1.0 - opening ** 2))), get_target("sphere3"))
        return MapSlice.from_points(Lattice(), _c2(np.full_like(z, np.sqrt(1.0 - opening ** 2)), z), get_target("sphere3"))

    @staticmethod
    def clifford_slice(grid, phi=np.pi / 4, shear=0, frequency=1):
        """
        (cos phi e^{2 pi i s}, sin phi e^{2 pi i (shear s + frequency t)}).

        For shear 0 the pullback metric is 4 pi^2 diag(cos^2 phi, frequency^2 sin^2 phi);
        phi = pi/4 with frequency 1 is the conformal Clifford torus with E = Area = 2 pi^2.
        """
        s, t = _grid(grid)
        z1 = np.cos(phi) * np.exp(2j * np.pi * s)
        z2 = np.sin(phi) * np.exp(2j * np.pi * (shear * s + frequency * t))
        return MapSlice.from_points(Lattice(), _c2(z1, z2), get_target("sphere3"))

    @staticmethod
    def shear_mark():
        """Mark of the shear-clifford plateau: b^2 + i a b with a = 1/2, b = sqrt(3)/2."""
        a = SHEAR_FIRST_RADIUS
        b = np.sqrt(1.0 - a ** 2)
        return complex(b ** 2, a * b)

    @staticmethod
    def _constant(grid, time_samples, target):
        target = target or get_target("sphere3")
        point = _constant_point(target)
        return Sweepout.uniform([MapSlice.constant((grid, grid), point, target) for _ in range(time_samples)])

    @staticmethod
    def _bump(grid, time_samples, target):
        times = np.linspace(0.0, 1.0, time_samples)
        return Sweepout.uniform([ScenarioService.bump_slice(grid, BUMP_AMPLITUDE * _tent(t)) for t in times])

    @staticmethod
    def _clifford_profile(grid, t, phi_end, shear):
        # Sixths: open the circle, rotate phi, hold, then the mirror image.
        x = min(t, 1.0 - t)
        if x <= 1.0 / 6.0:
            return ScenarioService.circle_slice(grid, 6.0 * x, phase="s" if shear == 0 else "s+t")
        if x <= 1.0 / 3.0:
            progress = 6.0 * x - 1.0
        else:
            progress = 1.0
        if shear == 0:
            return ScenarioService.clifford_slice(grid, phi_end * progress)
        # The circle along s + t sits at phi = pi/2; phi then falls to phi_end.
        return ScenarioService.clifford_slice(grid, np.pi / 2 + (phi_end - np.pi / 2) * progress, shear=1)

    @staticmethod
    def _clifford(grid, time_samples, target):
        times = np.linspace(0.0, 1.0, time_samples)
        return Sweepout.uniform([ScenarioService._clifford_profile(grid, t, np.pi / 4, 0) for t in times])

    @staticmethod
    def _shear_clifford(grid, time_samples, target):
        phi_end = np.arccos(SHEAR_FIRST_RADIUS)
        times = np.linspace(0.0, 1.0, time_samples)
        return Sweepout.uniform([ScenarioService._clifford_profile(grid, t, phi_end, 1) for t in times])

    @staticmethod
    def degenerate_phi(t):
        """
        phi(t) on the collapsing half: tan phi = 2^(-7 x) for x = 4t - 2 in [0, 1],
        so the marks i cot phi climb from i to 128 i.
        """
        x = np.clip(4.0 * t - 2.0, 0.0, 1.0)
        return float(np.arctan(2.0 ** (-np.log2(DEGENERATE_MAX_FREQUENCY) * x)))

    @staticmethod
    def _degenerate(grid, time_samples, target):
        slices = []
        for t in np.linspace(0.0, 1.0, time_samples):
            if t <= 0.25:
                slices.append(ScenarioService.circle_slice(grid, 4.0 * t))
            elif t <= 0.5:
                slices.append(ScenarioService.clifford_slice(grid, np.pi / 4 * (4.0 * t - 1.0)))
            elif t <= 0.75:
                slices.append(ScenarioService.clifford_slice(grid, ScenarioService.degenerate_phi(t)))
            elif t <= 0.875:
                phi = ScenarioService.degenerate_phi(0.75) * (7.0 - 8.0 * t)
                slices.append(ScenarioService.clifford_slice(grid, phi))
            else:
                slices.append(ScenarioService.circle_slice(grid, 8.0 * (1.0 - t)))
        return Sweepout.uniform(slices)

    @staticmethod
    def scenario_library():
        """All scenarios, in listing order."""
        return [
            ScenarioSpec("constant", "constant maps into the configured target", ScenarioService._constant, "trivial"),
            ScenarioSpec(
                "bump", "time-localized bump on S^2 at (0.625, 0.625)", ScenarioService._bump, "tightens", "sphere2"
            ),
            ScenarioSpec(
                "clifford", "great circle -> Clifford torus -> great circle in S^3",
                ScenarioService._clifford, "conformal-harmonic", "sphere3",
            ),
            ScenarioSpec(
                "shear-clifford", "unequal radii, second circle along s + t; plateau mark reduces to i sqrt(3)",
                ScenarioService._shear_clifford, "converged", "sphere3",
            ),
            ScenarioSpec(
                "degenerate", "Clifford tori whose marks run to 128 i",
                ScenarioService._degenerate, "degenerate", "sphere3", analysis_window=(0.5, 0.75),
            ),
        ]

    @staticmethod
    def get_scenario(name) -> ScenarioSpec:
        library = ScenarioService.scenario_library()
        for spec in library:
            if spec.name == name:
                return spec
        raise ScenarioError(name, [spec.name for spec in library])

    @staticmethod
    def build(name, grid, time_samples, target=None) -> Sweepout:
        spec = ScenarioService.get_scenario(name)
        logger.info("building scenario %s on %dx%d with %d slices", name, grid, grid, time_samples)
        return spec.build(grid, time_samples, target)

    @staticmethod
    def glued_bubble_sequence(grid=64, centers=((0.5, 0.5),), scales=(0.2, 0.1, 0.05, 0.025, 0.0125), amplitude=3.0):
        """
        Constant body at the north pole of S^2 with bumps of radius rho_n glued in.

        The bump energy does not depend on rho_n, so the sequence concentrates
        a fixed amount of energy at each center.
        """
        target = get_target("sphere2")
        lattice = Lattice()
        grid_s, grid_t = _grid(grid)
        sequence = []
        for rho in scales:
            bump = np.zeros((grid, grid))
            for center in centers:
                distance = np.abs(lattice.minimal_displacement(grid_s - center[0], grid_t - center[1]))
                bump += _bump_profile(distance, rho)
            points = np.zeros((grid, grid, 3))
            points[..., 2] = 1.0
            points[..., 0] = amplitude * bump
            sequence.append(MapSlice.from_points(lattice, points, target))
        return sequence
