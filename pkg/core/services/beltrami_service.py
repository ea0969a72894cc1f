"""
Module core.services.beltrami_service

Metric to Beltrami coefficient, the periodic Beltrami solver, inversion of the
forward map and torus uniformization.

The forward map on T^2_0 is

    w(z) = A (z + c conj(z) + s(z)),   A = 1 / (1 + c),

with s periodic and s(0) = 0. Writing h = s_z, the Beltrami equation
w_zbar = mu w_z becomes the fixed point h = B(P0[mu (1 + h)]) with B the
periodic Beurling multiplier and P0 the mean-removing projection; c is the
removed mean. The periods of w are 1 and tau = i (1 - c) / (1 + c).
"""

import logging

import numpy as np
from scipy.interpolate import LinearNDInterpolator

from core.config import minmax_settings
from core.exceptions import DegeneracyError, FoldoverError, GeometryError, NonConvergenceError, PreconditionError
from core.models import BeltramiField, Lattice, Mark, MetricField, PeriodicField, UniformizationResult
from .spectral_service import SpectralService

logger = logging.getLogger(__name__)

# Lattice-coordinate margin kept around the unit square when inverting.
INVERSION_MARGIN = 0.2


def _rms(values):
    return float(np.sqrt(np.mean(np.abs(values) ** 2)))


def _defaults():
    return minmax_settings()


class BeltramiService:

    @staticmethod
    def metric_to_beltrami(g: MetricField) -> BeltramiField:
        """
        Write g = lambda |dz + mu dzbar|^2.

        Nodewise mu = (g11 - g22 + 2i g12) / (g11 + g22 + 2 sqrt(det g)) and
        lambda = (g11 + g22 + 2 sqrt(det g)) / 4.

        Raises:
            DegeneracyError: at the first node where g is not positive definite.
        """
        g11, g12, g22 = g.arrays()
        det = g.determinant()
        bad = (g11 <= 0) | (det <= 0)
        if np.any(bad):
            node = tuple(int(i) for i in np.argwhere(bad)[0])
            raise DegeneracyError(
                f"Metric is not positive definite at node {node} (det={det[node]:.3e}); regularize first",
                node=node,
            )
        denominator = g11 + g22 + 2.0 * np.sqrt(det)
        mu = (g11 - g22 + 2j * g12) / denominator
        lam = denominator / 4.0
        lattice = g.g11.lattice
        return BeltramiField(PeriodicField(lattice, mu), PeriodicField(lattice, lam), float(np.max(np.abs(mu))))

    @staticmethod
    def regularize(g: MetricField, delta) -> MetricField:
        """g + delta * g0 with g0 the flat metric of T^2_0."""
        if not delta > 0:
            raise PreconditionError(f"Regularization needs delta > 0, got {delta}", "beltrami-uniformize")
        g11, g12, g22 = g.arrays()
        return MetricField.from_arrays(g11 + delta, g12, g22 + delta, g.delta + delta)

    @staticmethod
    def pullback_metric(values) -> MetricField:
        """
        Gram matrix of central-difference parameter derivatives of a sampled map.

        ``values`` has shape (rows, cols, d); the result is positive semidefinite
        at every node.
        """
        values = np.asarray(values, dtype=float)
        rows, cols = values.shape[:2]
        us = (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0)) * (rows / 2.0)
        ut = (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1)) * (cols / 2.0)
        g11 = np.sum(us * us, axis=-1)
        g12 = np.sum(us * ut, axis=-1)
        g22 = np.sum(ut * ut, axis=-1)
        return MetricField.from_arrays(g11, g12, g22)

    @staticmethod
    def solve_periodic_beltrami(beltrami: BeltramiField, tol=None, max_iter=None) -> UniformizationResult:
        """
        Solve w_zbar = mu w_z on T^2_0 by the contraction h <- B(P0[mu (1 + h)]).

        Terminates when successive iterates differ by less than ``tol`` in the
        discrete L2 norm (root mean square).

        Raises:
            PreconditionError: when sup |mu| >= 1.
            NonConvergenceError: after ``max_iter`` iterations, carrying the last change.
        """
        tol = _defaults()["SOLVER_TOL"] if tol is None else tol
        max_iter = _defaults()["SOLVER_MAX_ITER"] if max_iter is None else max_iter
        mu = beltrami.mu.samples.astype(complex)
        k = float(np.max(np.abs(mu)))
        if k >= 1.0:
            raise PreconditionError(f"Beltrami coefficient must satisfy sup|mu| < 1, got {k}", "beltrami-uniformize")
        if not tol > 0:
            raise PreconditionError(f"Solver tolerance must be positive, got {tol}", "beltrami-uniformize")

        probe = beltrami.mu
        dz = SpectralService.dz_multiplier(probe)
        dzbar = SpectralService.dzbar_multiplier(probe)
        nonzero = dzbar != 0
        beurling = np.zeros_like(dz)
        beurling[nonzero] = dz[nonzero] / dzbar[nonzero]

        h = np.zeros_like(mu)
        rates = []
        previous = None
        change = np.inf
        iterations = 0
        while change >= tol:
            if iterations >= max_iter:
                raise NonConvergenceError(
                    f"Beltrami iteration did not converge in {max_iter} steps (last change {change:.3e})",
                    residual=change,
                    provenance="beltrami-uniformize",
                )
            q = mu * (1.0 + h)
            h_next = np.fft.ifft2(np.fft.fft2(q - q.mean()) * beurling)
            change = _rms(h_next - h)
            if previous:
                rates.append(change / previous)
            previous = change
            h = h_next
            iterations += 1
        logger.debug("Beltrami fixed point converged in %d iterations (k=%.3f)", iterations, k)

        q = mu * (1.0 + h)
        c = complex(q.mean())
        inverse = np.zeros_like(dzbar)
        inverse[nonzero] = 1.0 / dzbar[nonzero]
        s = np.fft.ifft2(np.fft.fft2(q - c) * inverse)
        s = s - s[0, 0]
        amplitude = 1.0 / (1.0 + c)
        tau = 1j * (1.0 - c) / (1.0 + c)

        rows, cols = mu.shape
        x, y = np.meshgrid(np.arange(rows) / rows, np.arange(cols) / cols, indexing="ij")
        z = x + 1j * y
        w = amplitude * (z + c * np.conj(z) + s)

        spectrum = np.fft.fft2(s)
        s_z = np.fft.ifft2(spectrum * dz)
        s_zbar = np.fft.ifft2(spectrum * dzbar)
        w_z = amplitude * (1.0 + s_z)
        w_zbar = amplitude * (c + s_zbar)
        residual = _rms(w_zbar - mu * w_z) / _rms(w_z)

        result = UniformizationResult(
            mark=Mark(tau),
            g0_mean=c,
            amplitude=amplitude,
            periodic_part=s,
            w_grid=w,
            residual=residual,
            iterations=iterations,
            contraction_rates=rates,
            beltrami=beltrami,
        )
        result.conformal_defect = BeltramiService.conformal_defect(result)
        return result

    @staticmethod
    def forward_jacobian(result: UniformizationResult):
        """Returns (w_z, w_zbar, J) on the T^2_0 grid; J = |w_z|^2 - |w_zbar|^2."""
        probe = PeriodicField(Lattice(), result.periodic_part)
        s_z = SpectralService.d_z(probe).samples
        s_zbar = SpectralService.d_zbar(probe).samples
        w_z = result.amplitude * (1.0 + s_z)
        w_zbar = result.amplitude * (result.g0_mean + s_zbar)
        return w_z, w_zbar, np.abs(w_z) ** 2 - np.abs(w_zbar) ** 2

    @staticmethod
    def conformal_defect(result: UniformizationResult):
        """
        E(h) - Area(h) for the inverse h: T^2_tau -> (T^2_0, g), evaluated on the
        forward grid by change of variables; g is rebuilt from (lambda, mu).
        """
        g11, g12, g22 = result.beltrami.reconstruct()
        w_z, w_zbar, jac = BeltramiService.forward_jacobian(result)
        w_x = w_z + w_zbar
        w_y = 1j * (w_z - w_zbar)
        # Dw = [[a, b], [c, d]] with columns w_x, w_y as real vectors.
        a, c = w_x.real, w_x.imag
        b, d = w_y.real, w_y.imag
        # adj(Dw^T Dw) for M = Dw^T Dw = [[p, r], [r, q]] is [[q, -r], [-r, p]].
        p = a * a + c * c
        q = b * b + d * d
        r = a * b + c * d
        density = 0.5 * (g11 * q - 2.0 * g12 * r + g22 * p) / jac
        area = np.sqrt(np.maximum(g11 * g22 - g12 ** 2, 0.0))
        return float(np.mean(density) - np.mean(area))

    @staticmethod
    def invert_map(result: UniformizationResult, jacobian_floor=None) -> UniformizationResult:
        """
        Inverse h: T^2_tau -> T^2_0 by linear interpolation of the forward graph.

        The forward samples and their lattice translates are expressed in the
        lattice coordinates (a, b) of w = a + b tau and interpolated onto the
        uniform (a, b) grid. Fills ``h_grid`` and the residual of
        h_zetabar + mu(h) conj(h_zeta) = 0 relative to |h_zeta|.

        Raises:
            FoldoverError: when the forward Jacobian falls below the floor.
        """
        floor = _defaults()["JACOBIAN_FLOOR"] if jacobian_floor is None else jacobian_floor
        _, _, jac = BeltramiService.forward_jacobian(result)
        scale = float(np.mean(np.abs(jac)))
        if np.min(jac) <= floor * scale:
            node = tuple(int(i) for i in np.unravel_index(np.argmin(jac), jac.shape))
            raise FoldoverError(
                f"Forward map folds over at node {node} (J={jac[node]:.3e})", location=node
            )

        tau = result.tau
        rows, cols = result.shape
        x, y = np.meshgrid(np.arange(rows) / rows, np.arange(cols) / cols, indexing="ij")
        z = (x + 1j * y).ravel()
        w = result.w_grid.ravel()
        points, values = [], []
        for p in (-1, 0, 1):
            for q in (-1, 0, 1):
                image = w + p + q * tau
                b = image.imag / tau.imag
                a = image.real - b * tau.real
                keep = (
                    (a > -INVERSION_MARGIN) & (a < 1 + INVERSION_MARGIN)
                    & (b > -INVERSION_MARGIN) & (b < 1 + INVERSION_MARGIN)
                )
                points.append(np.column_stack([a[keep], b[keep]]))
                values.append(z[keep] + p + 1j * q)
        interpolator = LinearNDInterpolator(np.vstack(points), np.concatenate(values))
        grid_a, grid_b = np.meshgrid(np.arange(rows) / rows, np.arange(cols) / cols, indexing="ij")
        h = interpolator(grid_a, grid_b)
        if np.any(np.isnan(h)):
            raise GeometryError("Inverse map target grid is not covered by the forward image")

        result.h_grid = h
        result.inverse_residual = BeltramiService.inverse_residual(result)
        return result

    @staticmethod
    def inverse_residual(result: UniformizationResult):
        h = result.h_grid
        tau = result.tau
        rows, cols = h.shape
        a, b = np.meshgrid(np.arange(rows) / rows, np.arange(cols) / cols, indexing="ij")
        periodic = h - (a + 1j * b)
        p_a = (np.roll(periodic, -1, axis=0) - np.roll(periodic, 1, axis=0)) * (rows / 2.0)
        p_b = (np.roll(periodic, -1, axis=1) - np.roll(periodic, 1, axis=1)) * (cols / 2.0)
        p_x = p_a
        p_y = (p_b - tau.real * p_a) / tau.imag
        # Linear part a + i b written in the physical coordinate zeta.
        l_zeta = 0.5 * (1.0 + (1.0 + 1j * tau.real) / tau.imag)
        l_zetabar = 0.5 * (1.0 - (1.0 + 1j * tau.real) / tau.imag)
        h_zeta = l_zeta + 0.5 * (p_x - 1j * p_y)
        h_zetabar = l_zetabar + 0.5 * (p_x + 1j * p_y)
        mu = result.beltrami.mu.samples
        mu_at_h = SpectralService.sample_at(mu, h.real % 1.0, h.imag % 1.0, order=1)
        return _rms(h_zetabar + mu_at_h * np.conj(h_zeta)) / _rms(h_zeta)

    @staticmethod
    def uniformize(g: MetricField, delta=None, tol=None, max_iter=None) -> UniformizationResult:
        """
        Mark tau and conformal diffeomorphism h: T^2_tau -> (T^2_0, g + delta g0),
        normalized by 0 -> 0, 1 -> 1, tau -> i. ``delta = 0`` skips regularization.
        """
        delta = _defaults()["DELTA"] if delta is None else delta
        metric = BeltramiService.regularize(g, delta) if delta > 0 else g
        beltrami = BeltramiService.metric_to_beltrami(metric)
        result = BeltramiService.solve_periodic_beltrami(beltrami, tol=tol, max_iter=max_iter)
        result = BeltramiService.invert_map(result)
        logger.debug(
            "uniformized: tau=%s residual=%.2e defect=%.2e iterations=%d",
            result.tau, result.residual, result.conformal_defect, result.iterations,
        )
        return result

    @staticmethod
    def continuity_probe(mu_a: BeltramiField, mu_b: BeltramiField, tol=None):
        """
        Distances between the solutions for two coefficients.

        Returns:
            dict: ``d_sup_w`` (forward maps), ``d_sup_h`` (inverse maps) and
            ``d_Lp_grad`` (L2 distance of the inverses' parameter gradients).
        """
        k = max(mu_a.bound_k, mu_b.bound_k)
        if k >= 1.0:
            raise PreconditionError(f"Both coefficients need sup|mu| < 1, got {k}", "beltrami-uniformize")
        first = BeltramiService.invert_map(BeltramiService.solve_periodic_beltrami(mu_a, tol=tol))
        second = BeltramiService.invert_map(BeltramiService.solve_periodic_beltrami(mu_b, tol=tol))
        rows, cols = first.shape
        difference = first.h_grid - second.h_grid
        d_a = (np.roll(difference, -1, axis=0) - np.roll(difference, 1, axis=0)) * (rows / 2.0)
        d_b = (np.roll(difference, -1, axis=1) - np.roll(difference, 1, axis=1)) * (cols / 2.0)
        return {
            "d_sup_w": float(np.max(np.abs(first.w_grid - second.w_grid))),
            "d_sup_h": float(np.max(np.abs(difference))),
            "d_Lp_grad": float(np.sqrt(np.mean(np.abs(d_a) ** 2 + np.abs(d_b) ** 2))),
            "tau_a": first.tau,
            "tau_b": second.tau,
        }
