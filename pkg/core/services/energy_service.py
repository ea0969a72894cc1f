"""
Module core.services.energy_service

Discrete Dirichlet energy and mapping area of sampled maps on marked tori.

Every grid cell (i, j) has corners (i, j), (i+1, j), (i, j+1), (i+1, j+1) with
edge differences e_b, e_t (along s) and f_l, f_r (along t). With h_s = 1/rows,
h_t = 1/cols and the lattice coefficients (a, b, c) of the Euclidean gradient,

    S = (|e_b|^2 + |e_t|^2) / (2 h_s^2)
    T = (|f_l|^2 + |f_r|^2) / (2 h_t^2)
    X = mean(e) . mean(f) / (h_s h_t)
    cell energy = 1/2 (a S + c T - 2 b X) * tau2 h_s h_t

The area of a cell uses the averaged derivatives, so energy >= area holds cell
by cell. The energy is an exact quadratic form in the node values; its node
gradient and diagonal are what the replacement solver relaxes.

Constants:
    EMPTY_REGION: returned (with a warning) when a region contains no cell.
"""

import logging

import numpy as np

from core.models import BallCollection, MapSlice, PeriodicField
from .spectral_service import SpectralService

logger = logging.getLogger(__name__)

EMPTY_REGION = 0.0


def _edges(values):
    up_s = np.roll(values, -1, axis=0)
    e_b = up_s - values
    e_t = np.roll(up_s, -1, axis=1) - np.roll(values, -1, axis=1)
    f_l = np.roll(values, -1, axis=1) - values
    f_r = np.roll(up_s, -1, axis=1) - up_s
    return e_b, e_t, f_l, f_r


def _dot(x, y):
    return np.sum(x * y, axis=-1)


class EnergyService:

    @staticmethod
    def steps(shape, lattice):
        """(h_s, h_t, cell area) for a grid of the given shape."""
        rows, cols = shape
        hs, ht = 1.0 / rows, 1.0 / cols
        return hs, ht, lattice.tau.imag * hs * ht

    @staticmethod
    def cell_energies(values, lattice, grid_shape=None):
        """Energy of every cell; ``values`` is any (rows, cols, d) array, on a target or not."""
        values = np.asarray(values, dtype=float)
        a, b, c = lattice.metric_coefficients()
        hs, ht, cell = EnergyService.steps(grid_shape or values.shape[:2], lattice)
        e_b, e_t, f_l, f_r = _edges(values)
        s_term = 0.5 * (_dot(e_b, e_b) + _dot(e_t, e_t)) / hs ** 2
        t_term = 0.5 * (_dot(f_l, f_l) + _dot(f_r, f_r)) / ht ** 2
        x_term = _dot(0.5 * (e_b + e_t), 0.5 * (f_l + f_r)) / (hs * ht)
        return 0.5 * (a * s_term + c * t_term - 2.0 * b * x_term) * cell

    @staticmethod
    def cell_areas(values, lattice):
        values = np.asarray(values, dtype=float)
        hs, ht, _ = EnergyService.steps(values.shape[:2], lattice)
        e_b, e_t, f_l, f_r = _edges(values)
        us = 0.5 * (e_b + e_t) / hs
        ut = 0.5 * (f_l + f_r) / ht
        gram = _dot(us, us) * _dot(ut, ut) - _dot(us, ut) ** 2
        # Area is parametrization invariant: no lattice factor.
        return np.sqrt(np.maximum(gram, 0.0)) * hs * ht

    @staticmethod
    def region_cells(node_mask):
        """Cells whose four corners all lie in ``node_mask``."""
        m = np.asarray(node_mask, dtype=bool)
        up = np.roll(m, -1, axis=0)
        return m & up & np.roll(m, -1, axis=1) & np.roll(up, -1, axis=1)

    @staticmethod
    def node_mask(u: MapSlice, region=None):
        """Node mask of ``region`` (None, a BallCollection or a boolean array) inside the slice domain."""
        if region is None:
            mask = np.ones(u.shape, dtype=bool)
        elif isinstance(region, BallCollection):
            mask = region.mask(u.lattice, u.shape)
        else:
            mask = np.asarray(region, dtype=bool)
        if u.domain_mask is not None:
            mask = mask & u.domain_mask
        return mask

    @staticmethod
    def _sum_over(u, per_cell, region):
        if region is None and u.domain_mask is None:
            return float(np.sum(per_cell))
        cells = EnergyService.region_cells(EnergyService.node_mask(u, region))
        if not np.any(cells):
            logger.warning("Region contains no complete grid cell; reporting %s", EMPTY_REGION)
            return EMPTY_REGION
        return float(np.sum(per_cell[cells]))

    @staticmethod
    def energy(u: MapSlice, region=None):
        """Dirichlet energy 1/2 int |grad u|^2 over the whole domain or a region."""
        return EnergyService._sum_over(u, EnergyService.cell_energies(u.values, u.lattice), region)

    @staticmethod
    def area(u: MapSlice, region=None):
        return EnergyService._sum_over(u, EnergyService.cell_areas(u.values, u.lattice), region)

    @staticmethod
    def quadratic_energy(values, lattice, node_mask=None):
        """Energy of an arbitrary vector field, e.g. the difference of two maps."""
        per_cell = EnergyService.cell_energies(values, lattice)
        if node_mask is None:
            return float(np.sum(per_cell))
        return float(np.sum(per_cell[EnergyService.region_cells(node_mask)]))

    @staticmethod
    def difference_energy(u: MapSlice, v: MapSlice, region=None):
        """1/2 int |grad u - grad v|^2 over a region."""
        mask = None if region is None and u.domain_mask is None else EnergyService.node_mask(u, region)
        return EnergyService.quadratic_energy(u.values - v.values, u.lattice, mask)

    @staticmethod
    def node_gradient(values, lattice, grid_shape=None):
        """Gradient of the total energy with respect to every node value."""
        values = np.asarray(values, dtype=float)
        a, b, c = lattice.metric_coefficients()
        hs, ht, cell = EnergyService.steps(grid_shape or values.shape[:2], lattice)
        e_b, e_t, f_l, f_r = _edges(values)
        e_bar = 0.5 * (e_b + e_t)
        f_bar = 0.5 * (f_l + f_r)
        w = 0.5 * cell
        mixed = 2.0 * b / (hs * ht)
        d00 = w * (-a * e_b / hs ** 2 - c * f_l / ht ** 2 + mixed * (0.5 * f_bar + 0.5 * e_bar))
        d10 = w * (a * e_b / hs ** 2 - c * f_r / ht ** 2 - mixed * (0.5 * f_bar - 0.5 * e_bar))
        d01 = w * (-a * e_t / hs ** 2 + c * f_l / ht ** 2 - mixed * (-0.5 * f_bar + 0.5 * e_bar))
        d11 = w * (a * e_t / hs ** 2 + c * f_r / ht ** 2 - mixed * (0.5 * f_bar + 0.5 * e_bar))
        return (
            d00
            + np.roll(d10, 1, axis=0)
            + np.roll(d01, 1, axis=1)
            + np.roll(np.roll(d11, 1, axis=0), 1, axis=1)
        )

    @staticmethod
    def nodal_stiffness(shape, lattice):
        """alpha such that the energy restricted to one node is alpha |u_p|^2 + linear terms."""
        a, _, c = lattice.metric_coefficients()
        hs, ht, cell = EnergyService.steps(shape, lattice)
        return cell * (a / hs ** 2 + c / ht ** 2)

    @staticmethod
    def harmonicity_residual(u: MapSlice, node_mask=None):
        """
        Largest tangential part of the discrete Laplacian at the selected nodes.

        The energy gradient is divided by the cell area so the value scales like
        a Laplacian; harmonic maps into N make it vanish up to the solver tolerance.
        """
        gradient = EnergyService.node_gradient(u.values, u.lattice)
        _, _, cell = EnergyService.steps(u.shape, u.lattice)
        tangential = u.target.tangent_project(u.values, gradient) / cell
        norms = np.linalg.norm(tangential, axis=-1)
        if node_mask is not None:
            norms = norms[np.asarray(node_mask, dtype=bool)]
        return float(np.max(norms)) if norms.size else 0.0

    @staticmethod
    def spectral_derivatives(u: MapSlice):
        field = PeriodicField(u.lattice, np.asarray(u.values, dtype=float))
        return SpectralService.gradient(field)

    @staticmethod
    def spectral_energy(u: MapSlice):
        """Energy from exact Fourier derivatives; exact for band-limited maps."""
        ux, uy = EnergyService.spectral_derivatives(u)
        return float(0.5 * np.mean(_dot(ux, ux) + _dot(uy, uy)) * u.lattice.tau.imag)

    @staticmethod
    def spectral_area(u: MapSlice):
        ux, uy = EnergyService.spectral_derivatives(u)
        gram = _dot(ux, ux) * _dot(uy, uy) - _dot(ux, uy) ** 2
        return float(np.mean(np.sqrt(np.maximum(gram, 0.0))) * u.lattice.tau.imag)
