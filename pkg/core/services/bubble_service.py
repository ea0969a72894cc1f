"""
Module core.services.bubble_service

Energy concentration, bubble extraction with region-partition energy
accounting, neck diagnostics on cylinder charts and a simplified varifold
distance.

Functions:
    concentration_radii: r(x) = sup{r : E(u, B(x, r)) <= eps1}.
    extract_bubbles: bubble tree of a near-critical sequence.
    neck_report: theta share of the energy on a cylinder chart.
    nu_almost_harmonic_check: replacement test on sampled balls of an annulus.
    varifold_distance_simplified: Gaussian test functions against area measures.
"""

import logging
import math

import numpy as np
from scipy.stats import qmc

from core.config import minmax_settings
from core.exceptions import GeometryError, PreconditionError
from core.models import Ball, BallCollection, Bubble, BubbleTree, CylinderRegion, Lattice, MapSlice
from core.utils import Utils
from .energy_service import EnergyService
from .moduli_service import ModuliService
from .replacement_service import ReplacementService
from .spectral_service import SpectralService

logger = logging.getLogger(__name__)

TREND_FACTOR = 0.25
MIN_TREND_SAMPLES = 3


def _cfg():
    return minmax_settings()


def _cell_inclusion_radii(u: MapSlice, center):
    """Distance from ``center`` to the farthest corner of every cell."""
    d = Ball(center, 0.0).distances(u.lattice, u.shape)
    up = np.roll(d, -1, axis=0)
    return np.maximum.reduce([d, up, np.roll(d, -1, axis=1), np.roll(up, -1, axis=1)])


def _domain_cells(u: MapSlice):
    if u.domain_mask is None:
        return np.ones(u.shape, dtype=bool)
    return EnergyService.region_cells(u.domain_mask)


class BubbleService:

    @staticmethod
    def radius_cap(u: MapSlice):
        """Half the shortest period of the slice's lattice."""
        return 0.5 * u.lattice.shortest_period()

    @staticmethod
    def default_centers(shape, stride=4):
        rows, cols = shape
        s, t = np.meshgrid(np.arange(0, rows, stride) / rows, np.arange(0, cols, stride) / cols, indexing="ij")
        return np.column_stack([s.ravel(), t.ravel()])

    @staticmethod
    def concentration_radius(u: MapSlice, center, eps1=None, cell_energies=None):
        """
        Exact sup of the radii whose ball energy stays at most ``eps1``.

        A cell belongs to B(x, r) when all its corners do, so the ball energy is
        a step function of r; the sup is the inclusion radius of the cell at
        which the sorted cumulative energy first exceeds ``eps1``.
        """
        eps1 = _cfg()["EPSILON_1"] if eps1 is None else eps1
        energies = EnergyService.cell_energies(u.values, u.lattice) if cell_energies is None else cell_energies
        cap = BubbleService.radius_cap(u)
        cells = _domain_cells(u)
        radii = _cell_inclusion_radii(u, center)[cells]
        values = energies[cells]
        order = np.argsort(radii, kind="stable")
        cumulative = np.cumsum(values[order])
        beyond = np.flatnonzero(cumulative > eps1)
        if beyond.size == 0:
            return cap
        return float(min(radii[order][beyond[0]], cap))

    @staticmethod
    def concentration_radii(u: MapSlice, eps1=None, centers=None):
        """
        Concentration radius at each center (parameter coordinates, shape (k, 2)).

        Defaults to every fourth grid node in both directions.
        """
        eps1 = _cfg()["EPSILON_1"] if eps1 is None else eps1
        if not eps1 > 0:
            raise PreconditionError(f"eps1 must be positive, got {eps1}", "bubbling-moduli")
        centers = BubbleService.default_centers(u.shape) if centers is None else np.asarray(centers, dtype=float)
        energies = EnergyService.cell_energies(u.values, u.lattice)
        return np.array([BubbleService.concentration_radius(u, tuple(c), eps1, energies) for c in centers])

    @staticmethod
    def rescaled_patch(u: MapSlice, center, radius, shape=None) -> MapSlice:
        """
        u on B(center, radius) pulled back to the unit square with a disk domain.

        The patch node p sits at center + 2 radius ((p_s - 1/2) + i (p_t - 1/2)),
        so the disk of radius 1/2 around (1/2, 1/2) is the ball; values come from
        cubic periodic interpolation followed by projection.
        """
        rows, cols = u.shape if shape is None else shape
        p_s, p_t = np.meshgrid(np.arange(rows) / rows, np.arange(cols) / cols, indexing="ij")
        offset = (p_s - 0.5) + 1j * (p_t - 0.5)
        origin = u.lattice.to_physical(center[0], center[1])
        s, t = u.lattice.to_parameter(origin + 2.0 * radius * offset)
        values = u.target.project(SpectralService.sample_at(u.values, s % 1.0, t % 1.0, order=3))
        disk = np.abs(offset) < 0.5
        return MapSlice(Lattice(), values, u.target, domain_mask=disk)

    @staticmethod
    def _candidates(sequence, eps1, centers):
        profiles = np.array([BubbleService.concentration_radii(u, eps1, centers) for u in sequence])
        first, last = profiles[0], profiles[-1]
        monotone = np.all(np.diff(profiles, axis=0) <= 0.0, axis=0)
        shrinking = (last < TREND_FACTOR * first) & monotone
        return profiles, np.flatnonzero(shrinking)

    @staticmethod
    def extract_bubbles(sequence, eps1=None, verdict=None, centers=None, depth=1, max_depth=None) -> BubbleTree:
        """
        Bubble tree of a sequence of slices sharing one target.

        Concentration points are the centers whose radius falls below a quarter
        of its first value, monotonically, along the sequence. Each point gets a
        bubble region B(x, R) with R = factor * r capped at an eighth of the
        shortest period, a neck B(x, 2R) minus B(x, R), and the rest is body;
        cells are assigned whole, so the energies add up to the total. A
        degenerate mark sequence has no body and its remaining energy counts as
        neck energy. Bubbles recurse on rescaled patches up to
        ceil(total / eps1) levels.

        Raises:
            PreconditionError: for fewer than three slices.
        """
        cfg = _cfg()
        eps1 = cfg["EPSILON_1"] if eps1 is None else eps1
        sequence = list(sequence)
        if len(sequence) < MIN_TREND_SAMPLES:
            raise PreconditionError(
                f"extract_bubbles needs at least {MIN_TREND_SAMPLES} slices, got {len(sequence)}", "bubbling-moduli"
            )
        last = sequence[-1]
        if verdict is None and last.domain_mask is None:
            verdict = ModuliService.classify_sequence([u.mark.tau for u in sequence])
        cell_energies = EnergyService.cell_energies(last.values, last.lattice)
        cells = _domain_cells(last)
        total = float(np.sum(cell_energies[cells]))
        limit = max(1, math.ceil(total / eps1)) if total > 0 else 0
        max_depth = limit if max_depth is None else max_depth

        centers = BubbleService.default_centers(last.shape) if centers is None else np.asarray(centers, dtype=float)
        profiles, candidates = BubbleService._candidates(sequence, eps1, centers)
        factor = cfg["BUBBLE_RADIUS_FACTOR"]
        ceiling = last.lattice.shortest_period() / 8.0

        chosen = []
        for index in sorted(candidates, key=lambda i: profiles[-1, i]):
            if len(chosen) >= limit:
                break
            center = tuple(centers[index])
            region = min(factor * profiles[-1, index], ceiling)
            clash = any(
                abs(last.lattice.minimal_displacement(center[0] - c[0], center[1] - c[1])) < region + r
                for c, r, _ in chosen
            )
            if not clash:
                chosen.append((center, region, index))

        unassigned = cells.copy()
        bubbles = []
        neck_energy = 0.0
        for center, region, index in chosen:
            inclusion = _cell_inclusion_radii(last, center)
            inner = unassigned & (inclusion < region)
            neck = unassigned & ~inner & (inclusion < 2.0 * region)
            unassigned &= ~(inner | neck)
            neck_energy += float(np.sum(cell_energies[neck]))
            scales = [float(r) for r in profiles[:, index]]
            bubble = Bubble(center, scales, float(np.sum(cell_energies[inner])), depth=depth)
            bubble.patch = BubbleService.rescaled_patch(last, center, region)
            if depth < max_depth:
                patches = [
                    BubbleService.rescaled_patch(u, center, min(factor * r, ceiling))
                    for u, r in zip(sequence, profiles[:, index])
                ]
                child_tree = BubbleService.extract_bubbles(
                    patches, eps1, verdict=verdict, depth=depth + 1, max_depth=max_depth
                )
                bubble.children = child_tree.bubbles
            bubbles.append(bubble)

        body_energy = float(np.sum(cell_energies[unassigned]))
        tree = BubbleTree(total_energy=total, bubbles=bubbles, residual_neck_energy=neck_energy, verdict=verdict)
        if verdict is not None and verdict.kind == "degenerate":
            tree.residual_neck_energy += body_energy
        else:
            tree.body, tree.body_energy = last, body_energy
        logger.info(
            "bubble tree at depth %d: %d bubbles, body %.4g, neck %.4g of %.4g",
            depth, len(bubbles), tree.body_energy, tree.residual_neck_energy, total,
        )
        return tree

    @staticmethod
    def cylinder_samples(u: MapSlice, region: CylinderRegion, t_samples=64, theta_samples=128):
        """
        Values of u on the cylinder chart, shape (t_samples, theta_samples, d),
        with the t and theta grids.

        Raises:
            GeometryError: when the annulus does not fit in the torus.
        """
        if 2.0 * region.outer_radius >= u.lattice.shortest_period():
            raise GeometryError(
                f"Annulus of outer radius {region.outer_radius:.4g} does not fit in the torus", "bubbling-moduli"
            )
        t = np.linspace(region.t_min, region.t_max, t_samples)
        theta = np.arange(theta_samples) / theta_samples * region.theta_period
        tt, th = np.meshgrid(t, theta, indexing="ij")
        origin = u.lattice.to_physical(region.center[0], region.center[1])
        points = origin + region.scale * np.exp(-tt) * np.exp(2j * np.pi * th / region.theta_period)
        s, r = u.lattice.to_parameter(points)
        values = SpectralService.sample_at(u.values, s % 1.0, r % 1.0, order=3)
        return values, t, theta

    @staticmethod
    def neck_report(u: MapSlice, region: CylinderRegion, t_samples=64, theta_samples=128):
        """
        Energies of u in the cylinder chart (t, phi), phi = 2 pi theta / period.

        Returns:
            dict: ``E_total`` = 1/2 int |u_t|^2 + |u_phi|^2, ``E_theta`` = 1/2 int
            |u_phi|^2, ``ratio`` = E_theta / E_total and ``defect_lower_bound`` =
            1/8 int |u_t|^2 - |u_phi|^2.
        """
        values, t, _ = BubbleService.cylinder_samples(u, region, t_samples, theta_samples)
        dt = t[1] - t[0]
        u_t = np.gradient(values, dt, axis=0)
        frequencies = np.fft.fftfreq(theta_samples, d=1.0 / theta_samples)
        u_phi = np.fft.ifft(1j * frequencies[None, :, None] * np.fft.fft(values, axis=1), axis=1).real
        dphi = 2.0 * np.pi / theta_samples
        weights = np.full(len(t), dt)
        weights[[0, -1]] *= 0.5
        t_density = np.sum(u_t ** 2, axis=(1, 2)) * dphi
        phi_density = np.sum(u_phi ** 2, axis=(1, 2)) * dphi
        e_t = 0.5 * float(np.sum(t_density * weights))
        e_phi = 0.5 * float(np.sum(phi_density * weights))
        total = e_t + e_phi
        return {
            "E_total": total,
            "E_theta": e_phi,
            "ratio": e_phi / total if total > 0 else 0.0,
            "defect_lower_bound": 0.25 * (e_t - e_phi),
        }

    @staticmethod
    def nu_almost_harmonic_check(u: MapSlice, region: CylinderRegion, nu=None, samples=None, seed=None, balls=None, tol=None):
        """
        Check int_{B/8} |grad u - grad v|^2 <= nu int_C |grad u|^2 with v = H(u, B/8)
        over sampled balls inside the annulus (or the given ``balls``).

        Returns:
            tuple: (holds, worst sample dict or None).
        """
        cfg = _cfg()
        nu = cfg["NU"] if nu is None else nu
        samples = cfg["PROPERTY_STAR_SAMPLES"] if samples is None else samples
        tol = cfg["PROBE_REPLACE_TOL"] if tol is None else tol
        allowance = nu * 2.0 * BubbleService.neck_report(u, region)["E_total"]

        if balls is None:
            rng = Utils.make_rng(seed)
            origin = u.lattice.to_physical(region.center[0], region.center[1])
            balls = []
            for _ in range(samples):
                rho = rng.uniform(region.inner_radius, region.outer_radius)
                gap = min(rho - region.inner_radius, region.outer_radius - rho)
                if gap <= 0:
                    continue
                s, t = u.lattice.to_parameter(origin + rho * np.exp(2j * np.pi * rng.uniform()))
                balls.append(BallCollection.single((float(s) % 1.0, float(t) % 1.0), 0.9 * gap))

        worst = None
        holds = True
        for collection in balls:
            small = collection.scaled(0.125)
            v = ReplacementService.harmonic_replace(u, small, tol=tol, check_energy=False)
            value = 2.0 * EnergyService.difference_energy(u, v, small)
            sample = {"balls": collection.to_list(), "value": value, "allowance": allowance}
            if worst is None or value > worst["value"]:
                worst = sample
            if value > allowance:
                holds = False
        return holds, worst

    @staticmethod
    def varifold_distance_simplified(u: MapSlice, v: MapSlice, test_count=32, width=0.5):
        """
        max_k |int phi_k dA_u - int phi_k dA_v| / max(Area u, Area v) over Gaussian
        test functions phi_k centered at Halton points of the ambient box.
        """
        if u.target.ambient_dim != v.target.ambient_dim:
            raise PreconditionError("Slices must share the ambient space", "bubbling-moduli")
        dim = u.target.ambient_dim
        reach = 1.1 * max(np.max(np.linalg.norm(u.values, axis=-1)), np.max(np.linalg.norm(v.values, axis=-1)))
        centers = (2.0 * qmc.Halton(d=dim, scramble=False).random(test_count) - 1.0) * reach

        def integrals(m):
            corners = m.values
            up = np.roll(corners, -1, axis=0)
            mid = 0.25 * (corners + up + np.roll(corners, -1, axis=1) + np.roll(up, -1, axis=1))
            areas = EnergyService.cell_areas(m.values, m.lattice)
            cells = _domain_cells(m)
            points = mid[cells]
            weights = areas[cells]
            squared = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=-1)
            return np.exp(-squared / (2.0 * width ** 2)).T @ weights, float(np.sum(weights))

        first, area_u = integrals(u)
        second, area_v = integrals(v)
        scale = max(area_u, area_v)
        if scale <= 0:
            return 0.0
        return float(np.max(np.abs(first - second)) / scale)
