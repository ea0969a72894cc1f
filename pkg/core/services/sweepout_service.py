"""
Module core.services.sweepout_service

Sweepout preparation and almost-conformal reparametrization.

Functions:
    smooth_sweepout: periodic mollification plus a constant patch per slice.
    reparametrize_conformal: uniformize each slice's pullback metric and move
        the slice onto its conformal mark.
    continuity_measure: adjacent-slice sup plus gradient distance.
"""

import logging

import numpy as np
from scipy import ndimage

from core.config import minmax_settings
from core.exceptions import GeometryError, MinmaxError, UniformizationError
from core.models import Ball, Lattice, MapSlice, Sweepout
from core.utils import Utils
from .beltrami_service import BeltramiService
from .energy_service import EnergyService
from .spectral_service import SpectralService

logger = logging.getLogger(__name__)


class SweepoutService:

    @staticmethod
    def energies(s: Sweepout):
        return np.array([EnergyService.energy(u) for u in s.slices])

    @staticmethod
    def areas(s: Sweepout):
        return np.array([EnergyService.area(u) for u in s.slices])

    @staticmethod
    def constant_patch(u: MapSlice, center=None, radius=None) -> MapSlice:
        """
        Blend ``u`` to the projected mean of its values on B(center, radius).

        Weight 1 inside the radius, falling linearly to 0 at twice the radius.
        Constant slices come back unchanged.
        """
        cfg = minmax_settings()
        center = tuple(cfg["PATCH_CENTER"]) if center is None else center
        radius = cfg["PATCH_RADIUS"] if radius is None else radius
        if u.is_constant() or radius <= 0:
            return u
        distance = Ball(center, 2.0 * radius).distances(u.lattice, u.shape)
        inside = distance < radius
        if not inside.any():
            return u
        try:
            point = u.target.project(u.values[inside].mean(axis=0))
            weight = np.clip(2.0 - distance / radius, 0.0, 1.0)[..., None]
            return u.with_values(u.target.project((1.0 - weight) * u.values + weight * point))
        except GeometryError as e:
            logger.warning("Constant patch skipped: %s", e)
            return u

    @staticmethod
    def smooth_slice(u: MapSlice, width, patch=True) -> MapSlice:
        """Gaussian mollification with standard deviation ``width`` (parameter units)."""
        if width > 0 and not u.is_constant():
            rows, cols = u.shape
            sigma = (width * rows, width * cols, 0)
            u = u.with_values(u.target.project(ndimage.gaussian_filter(u.values, sigma=sigma, mode="wrap")))
        return SweepoutService.constant_patch(u) if patch else u

    @staticmethod
    def smooth_sweepout(s: Sweepout, width=None, full_output=False):
        """
        Mollify every interior slice and impose the constant patch.

        Endpoint slices are kept as they are.

        Raises:
            ValueError: when ``width`` is negative.
        """
        width = minmax_settings()["SMOOTH_WIDTH"] if width is None else width
        if width < 0:
            raise ValueError(f"Smoothing width must be non-negative, got {width}")
        slices = list(s.slices)
        for k in s.interior:
            slices[k] = SweepoutService.smooth_slice(slices[k], width)
        smoothed = s.with_slices(slices)
        if not full_output:
            return smoothed
        before, after = SweepoutService.energies(s), SweepoutService.energies(smoothed)
        logger.debug("smoothing changed max energy %.6g -> %.6g", before.max(), after.max())
        return smoothed, {"energies_before": before, "energies_after": after}

    @staticmethod
    def reparametrize_slice(u: MapSlice, delta, tol=None):
        """
        Uniformize the pullback metric of ``u`` and resample it on T^2_tau.

        The parameter square of the slice is taken as T^2_0. Returns the new
        slice and the uniformization result.
        """
        if u.is_constant():
            return u.with_values(u.values, Lattice()), None
        metric = BeltramiService.pullback_metric(u.values)
        result = BeltramiService.uniformize(metric, delta=delta, tol=tol)
        h = result.h_grid
        values = SpectralService.sample_at(u.values, h.real % 1.0, h.imag % 1.0, order=3)
        return MapSlice(Lattice(result.tau), u.target.project(values), u.target), result

    @staticmethod
    def reparametrize_conformal(s: Sweepout, delta=None, tol=None, threads=None, full_output=False):
        """
        Move every interior slice onto its conformal mark.

        Reports the per-slice defect E - Area and the constant C of the envelope
        E <= Area + C sqrt(delta).

        Raises:
            UniformizationError: carrying the index of the failing slice.
        """
        delta = minmax_settings()["DELTA"] if delta is None else delta

        def _one(k):
            try:
                return SweepoutService.reparametrize_slice(s.slices[k], delta, tol)[0]
            except MinmaxError as e:
                raise UniformizationError(f"Uniformization of slice {k} failed: {e}", slice_index=k) from e

        interior = list(s.interior)
        slices = list(s.slices)
        for k, new in zip(interior, Utils.parallel_map(_one, interior, threads)):
            slices[k] = new
        result = s.with_slices(slices)
        if not full_output:
            return result
        defects = SweepoutService.energies(result) - SweepoutService.areas(result)
        envelope = float(np.max(defects) / np.sqrt(delta)) if delta > 0 else np.inf
        logger.info("reparametrized with delta=%.3g: max defect %.3e", delta, float(np.max(defects)))
        return result, {"defects": defects, "envelope_constant": envelope, "marks": result.marks}

    @staticmethod
    def continuity_measure(s: Sweepout):
        """
        max over adjacent slices of sup |u_k - u_(k+1)| + ||grad u_k - grad u_(k+1)||_2.

        Slices are compared through their parameter squares with the metric of
        the earlier slice's lattice.
        """
        worst = 0.0
        for first, second in zip(s.slices[:-1], s.slices[1:]):
            sup = Utils.max_distance(first.values, second.values)
            grad = np.sqrt(2.0 * EnergyService.quadratic_energy(first.values - second.values, first.lattice))
            worst = max(worst, sup + float(grad))
        return worst

    @staticmethod
    def continuity_modulus(s: Sweepout, factor=None):
        """Threshold factor * (max slice energy)^(1/2) for the continuity measure."""
        factor = minmax_settings()["CONTINUITY_FACTOR"] if factor is None else factor
        return factor * float(np.sqrt(np.max(SweepoutService.energies(s))))
