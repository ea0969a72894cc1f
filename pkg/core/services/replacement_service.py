"""
Module core.services.replacement_service

Harmonic replacement on ball collections and the energy inequalities built on it.

Functions:
    harmonic_replace: energy-minimizing replacement with frozen boundary ring.
    energy_gap_defect: (E(u) - E(v)) - 1/2 E(u - v).
    replacement_continuity_probe: energy change of replacements under data change.
    shrinking_radius_probe: replacements on r B as r -> 1.
    courant_lebesgue_radius: good radius in [3R/4, R] with small circle energy.
    collar_interpolate: annulus map joining two nearby boundary loops.
    concentration_map: E(u, B(x, r)) at every grid node x.
    candidate_family: sublattice, concentration-point and greedy multi-ball collections.
    max_energy_decrease: best drop over a finite family of ball collections.
    decrease_continuity_ratio: e_{eps/2}(s) / e_eps(t) for two slices.
    comparison_probe: the two comparison inequalities with fitted constants.

Constants:
    RELAXATION: over-relaxation factor of the nodal updates.
    MAX_HALVINGS: step halvings tried before a nodal update is skipped.
    PEAKS_PER_RADIUS: concentration points kept per candidate radius.
"""

import logging

import numpy as np
from scipy import ndimage

from core.config import minmax_settings
from core.exceptions import GeometryError, PreconditionError
from core.models import Ball, BallCollection, MapSlice
from .energy_service import EnergyService
from .spectral_service import SpectralService

logger = logging.getLogger(__name__)

RELAXATION = 1.7
MAX_HALVINGS = 8
PEAKS_PER_RADIUS = 4
AGREEMENT_TOLERANCE = 1e-10
CIRCLE_SAMPLES = 256


def _defaults():
    return minmax_settings()


def _as_collection(balls):
    if isinstance(balls, Ball):
        return BallCollection((balls,))
    return balls


def _overlap(lattice, first, second):
    gap = abs(lattice.minimal_displacement(
        first.center[0] - second.center[0], first.center[1] - second.center[1]
    ))
    return gap < first.radius + second.radius


def _free_nodes(mask, boundary_mask=None):
    """Mask nodes whose eight neighbours are all in the mask."""
    free = mask.copy()
    for ds in (-1, 0, 1):
        for dt in (-1, 0, 1):
            if ds or dt:
                free &= np.roll(np.roll(mask, ds, axis=0), dt, axis=1)
    if boundary_mask is not None:
        free &= ~boundary_mask
    return free


def _axis_window(center, extent, n):
    half = int(np.ceil(extent * n)) + 2
    if 2 * half + 1 >= n:
        return np.arange(n), True
    middle = int(np.round(center * n))
    return (middle + np.arange(-half, half + 1)) % n, False


def _window(ball, lattice, shape):
    """Wrapped index ranges covering ``ball`` plus a two-node margin."""
    tau = lattice.tau
    extent_s = ball.radius * (1.0 + abs(tau.real) / tau.imag)
    extent_t = ball.radius / tau.imag
    rows_idx, full_s = _axis_window(ball.center[0], extent_s, shape[0])
    cols_idx, full_t = _axis_window(ball.center[1], extent_t, shape[1])
    valid = np.ones((len(rows_idx), len(cols_idx)), dtype=bool)
    if not full_s:
        valid[0, :] = valid[-1, :] = False
    if not full_t:
        valid[:, 0] = valid[:, -1] = False
    return rows_idx, cols_idx, valid


def _nodal_update(old, gradient, alpha, target, relaxation):
    """
    Projected nodal minimization with step halving.

    A node moves only if its exact energy change G.d + alpha |d|^2 is not
    positive, so every accepted update lowers the energy.
    """
    new = old.copy()
    step = np.full(len(old), relaxation)
    pending = np.ones(len(old), dtype=bool)
    for _ in range(MAX_HALVINGS):
        idx = np.flatnonzero(pending)
        candidate = target.project(old[idx] - (step[idx] / (2.0 * alpha))[:, None] * gradient[idx])
        d = candidate - old[idx]
        change = np.sum(gradient[idx] * d, axis=-1) + alpha * np.sum(d * d, axis=-1)
        accepted = change <= 0.0
        new[idx[accepted]] = candidate[accepted]
        pending[idx[accepted]] = False
        if not pending.any():
            break
        step[pending] *= 0.5
    return new, np.linalg.norm(new - old, axis=-1)


class ReplacementService:

    @staticmethod
    def harmonic_replace(u: MapSlice, balls, tol=None, max_iter=None, eps1=None,
                         check_energy=True, full_output=False, relaxation=RELAXATION):
        """
        Replace ``u`` on ``balls`` by the discrete energy minimizer with the same boundary.

        Nodes of the ball masks whose eight neighbours are in the mask are free;
        the rest of the mask is the frozen ring and nothing outside the mask is
        touched. Free nodes are relaxed by projected Gauss-Seidel in a four-colour
        index-parity order until the largest nodal move drops below ``tol``.

        Args:
            u: Slice to replace.
            balls: Ball or BallCollection.
            tol: Stop when the largest move in a sweep is below this.
            max_iter: Sweep limit; the best (last) iterate is returned when hit.
            eps1: Small-energy threshold for the precondition E(u, balls) <= eps1.
            full_output: Also return a report dict.

        Raises:
            PreconditionError: when the energy on the balls exceeds ``eps1``.
        """
        cfg = _defaults()
        tol = cfg["REPLACE_TOL"] if tol is None else tol
        max_iter = cfg["REPLACE_MAX_ITER"] if max_iter is None else max_iter
        eps1 = cfg["EPSILON_1"] if eps1 is None else eps1
        balls = _as_collection(balls)

        mask = EnergyService.node_mask(u, balls)
        local_energy = EnergyService.quadratic_energy(u.values, u.lattice, mask)
        if check_energy and local_energy > eps1 * (1.0 + 1e-12):
            raise PreconditionError(
                f"Harmonic replacement needs E(u, B) <= {eps1}, measured {local_energy:.6g}",
                "harmonic-core",
            )

        report = {"converged": True, "iterations": 0, "max_move": 0.0, "energy_before": local_energy}
        free = _free_nodes(mask, u.boundary_mask)
        if not free.any():
            report["energy_after"] = local_energy
            return (u, report) if full_output else u

        rows_parity = np.arange(u.shape[0]) % 2
        cols_parity = np.arange(u.shape[1]) % 2
        windows = []
        for ball in balls:
            rows_idx, cols_idx, valid = _window(ball, u.lattice, u.shape)
            local_free = free[np.ix_(rows_idx, cols_idx)] & valid
            colours = []
            for p in (0, 1):
                for q in (0, 1):
                    colour = local_free & (rows_parity[rows_idx][:, None] == p) & (cols_parity[cols_idx][None, :] == q)
                    if colour.any():
                        colours.append(colour)
            if colours:
                windows.append((np.ix_(rows_idx, cols_idx), colours))

        alpha = EnergyService.nodal_stiffness(u.shape, u.lattice)
        values = np.array(u.values, copy=True)
        max_move = np.inf
        iterations = 0
        while iterations < max_iter and max_move >= tol:
            max_move = 0.0
            for index, colours in windows:
                local = values[index]
                for colour in colours:
                    gradient = EnergyService.node_gradient(local, u.lattice, grid_shape=u.shape)[colour]
                    updated, moves = _nodal_update(local[colour], gradient, alpha, u.target, relaxation)
                    local[colour] = updated
                    max_move = max(max_move, float(np.max(moves)))
                values[index] = local
            iterations += 1

        report.update(iterations=iterations, max_move=max_move, converged=max_move < tol)
        if not report["converged"]:
            logger.warning("Harmonic replacement stopped after %d sweeps (max move %.3e)", iterations, max_move)
        v = u.with_values(values)
        report["energy_after"] = EnergyService.quadratic_energy(v.values, v.lattice, mask)
        return (v, report) if full_output else v

    @staticmethod
    def energy_gap_defect(u: MapSlice, v: MapSlice, region=None):
        """
        (E(u) - E(v)) - 1/2 E(u - v) on ``region``.

        Non-negative when v is the small-energy replacement of u.
        """
        gap = EnergyService.energy(u, region) - EnergyService.energy(v, region)
        return gap - 0.5 * EnergyService.difference_energy(u, v, region)

    @staticmethod
    def replacement_continuity_probe(u1: MapSlice, u2: MapSlice, balls, tol=None):
        """
        Energy change of replacements against the sup and gradient distance of the data.

        ``bound_shape`` is ||u1 - u2||_sup E + ||grad u1 - grad u2||_2 E^(1/2) on the
        balls; ``ratio`` is the constant that bound would need.
        """
        tol = _defaults()["PROBE_REPLACE_TOL"] if tol is None else tol
        balls = _as_collection(balls)
        w1 = ReplacementService.harmonic_replace(u1, balls, tol=tol)
        w2 = ReplacementService.harmonic_replace(u2, balls, tol=tol)
        mask = EnergyService.node_mask(u1, balls)
        energy_difference = abs(EnergyService.energy(w1, balls) - EnergyService.energy(w2, balls))
        sup_distance = float(np.max(np.linalg.norm(u1.values - u2.values, axis=-1)[mask])) if mask.any() else 0.0
        grad_distance = float(np.sqrt(2.0 * EnergyService.difference_energy(u1, u2, balls)))
        local = max(EnergyService.energy(u1, balls), EnergyService.energy(u2, balls))
        bound_shape = sup_distance * local + grad_distance * np.sqrt(local)
        return {
            "energy_difference": energy_difference,
            "sup_distance": sup_distance,
            "grad_distance": grad_distance,
            "bound_shape": float(bound_shape),
            "ratio": energy_difference / bound_shape if bound_shape > 0 else 0.0,
        }

    @staticmethod
    def shrinking_radius_probe(u: MapSlice, balls, factors=(0.8, 0.9, 0.95, 1.0), tol=None):
        """Energies of H(u, r B) for the radius factors ``r``; they approach E(H(u, B))."""
        tol = _defaults()["PROBE_REPLACE_TOL"] if tol is None else tol
        balls = _as_collection(balls)
        return [
            (float(r), EnergyService.energy(ReplacementService.harmonic_replace(u, balls.scaled(r), tol=tol)))
            for r in factors
        ]

    @staticmethod
    def nodal_gradient_density(u: MapSlice):
        """|grad u|^2 at the nodes from central differences."""
        rows, cols = u.shape
        us = (np.roll(u.values, -1, axis=0) - np.roll(u.values, 1, axis=0)) * (rows / 2.0)
        ut = (np.roll(u.values, -1, axis=1) - np.roll(u.values, 1, axis=1)) * (cols / 2.0)
        a, b, c = u.lattice.metric_coefficients()
        return a * np.sum(us * us, -1) - 2.0 * b * np.sum(us * ut, -1) + c * np.sum(ut * ut, -1)

    @staticmethod
    def circle_integral(u: MapSlice, center, radius, density=None, samples=CIRCLE_SAMPLES):
        """Line integral of |grad u|^2 over the physical circle of ``radius`` around ``center``."""
        density = ReplacementService.nodal_gradient_density(u) if density is None else density
        theta = 2.0 * np.pi * np.arange(samples) / samples
        origin = u.lattice.to_physical(center[0], center[1])
        s, t = u.lattice.to_parameter(origin + radius * np.exp(1j * theta))
        values = SpectralService.sample_at(density, s % 1.0, t % 1.0, order=1)
        return float(np.mean(values) * 2.0 * np.pi * radius)

    @staticmethod
    def courant_lebesgue_radius(u: MapSlice, center, R, samples=33, strict=False, full_output=False):
        """
        Radius r in [3R/4, R] minimizing the circle integral of |grad u|^2.

        The minimum over the sampled radii should satisfy
        int_{dB_r} |grad u|^2 <= (9 / r) int_{B_R} |grad u|^2. When it does not,
        the grid is too coarse for the ball: ``strict`` turns that into an error,
        otherwise it is logged and reported through ``full_output``.

        Returns:
            tuple: (r, boundary integral at r); with ``full_output`` a third
            item, a dict with ``bound`` and ``holds``.

        Raises:
            GeometryError: when B(center, R) wraps around the torus.
            PreconditionError: under ``strict`` when the bound fails.
        """
        if 2.0 * R >= u.lattice.shortest_period():
            raise GeometryError(f"Ball of radius {R} does not fit in the torus")
        density = ReplacementService.nodal_gradient_density(u)
        best_r, best = None, np.inf
        for r in np.linspace(0.75 * R, R, samples):
            value = ReplacementService.circle_integral(u, center, r, density)
            if value < best:
                best_r, best = float(r), value
        bound = 9.0 / best_r * 2.0 * EnergyService.energy(u, BallCollection.single(center, R))
        holds = best <= bound
        if not holds:
            message = f"Circle integral {best:.3e} at r={best_r:.4g} exceeds the mean-value bound {bound:.3e}"
            if strict:
                raise PreconditionError(message, "harmonic-core")
            logger.warning(message)
        if full_output:
            return best_r, best, {"bound": float(bound), "holds": bool(holds)}
        return best_r, best

    @staticmethod
    def collar_interpolate(target, f, g, R, rho=None, radial_samples=17, delta=None):
        """
        Annulus map joining the boundary loop g on the inner circle to f on the outer one.

        w(r, theta) = project((1 - l) g(theta) + l f(theta)) with l running from 0
        on the inner circle to 1 on the outer one. Without ``rho`` the width is
        R min(1/2, sqrt(D / F)) where D = R int |f' - g'|^2 and
        F = R int (|f'|^2 + |g'|^2), which balances radial against angular energy.

        Returns:
            dict: ``values`` (radial_samples, n, d), ``radii``, ``rho``,
            ``dirichlet_integral`` (int |grad w|^2) and ``bound_shape``.

        Raises:
            PreconditionError: when f and g agree at no sample, or D > delta^2.
        """
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float)
        if f.shape != g.shape:
            raise PreconditionError("Boundary loops must have the same sampling", "harmonic-core")
        if np.min(np.linalg.norm(f - g, axis=-1)) > AGREEMENT_TOLERANCE:
            raise PreconditionError("Boundary loops must agree at some sample", "harmonic-core")
        n = len(f)
        d_theta = 2.0 * np.pi / n
        f_prime = (np.roll(f, -1, axis=0) - f) / d_theta
        g_prime = (np.roll(g, -1, axis=0) - g) / d_theta
        # R times the arc-length integral of |f'|^2 is the angular integral of |f_theta|^2.
        outer = float(np.sum(f_prime ** 2) * d_theta)
        inner = float(np.sum(g_prime ** 2) * d_theta)
        mismatch = float(np.sum((f_prime - g_prime) ** 2) * d_theta)
        if delta is not None and mismatch > delta ** 2:
            raise PreconditionError(
                f"Boundary loops differ by {mismatch:.3e} > delta^2 = {delta ** 2:.3e}", "harmonic-core"
            )
        if rho is None:
            scale = np.sqrt(mismatch / (outer + inner)) if outer + inner > 0 else 0.0
            rho = R * min(0.5, scale)
        if not 0.0 <= rho <= 0.5 * R:
            raise PreconditionError(f"Collar width must lie in (0, R/2], got {rho}", "harmonic-core")
        rho = max(rho, R * 1e-14)

        weights = np.linspace(0.0, 1.0, radial_samples)[:, None, None]
        values = target.project((1.0 - weights) * g[None] + weights * f[None])
        radii = R - rho + rho * np.linspace(0.0, 1.0, radial_samples)
        dr = rho / (radial_samples - 1)
        radial = values[1:] - values[:-1]
        radial = 0.5 * (radial + np.roll(radial, -1, axis=1))
        angular = np.roll(values, -1, axis=1) - values
        angular = 0.5 * (angular[1:] + angular[:-1])
        r_mid = 0.5 * (radii[1:] + radii[:-1])[:, None]
        density = np.sum(radial ** 2, -1) / dr ** 2 + np.sum(angular ** 2, -1) / (r_mid * d_theta) ** 2
        integral = float(np.sum(density * r_mid) * dr * d_theta)
        return {
            "values": values,
            "radii": radii,
            "rho": float(rho),
            "dirichlet_integral": integral,
            "bound_shape": float(np.sqrt(outer + inner) * np.sqrt(mismatch)),
        }

    @staticmethod
    def concentration_map(u: MapSlice, radius):
        """E(u, B(node, radius)) for the ball centered at every grid node."""
        cells = EnergyService.cell_energies(u.values, u.lattice)
        kernel = EnergyService.region_cells(Ball((0.0, 0.0), radius).mask(u.lattice, u.shape))
        spectrum = np.fft.fft2(cells) * np.conj(np.fft.fft2(kernel.astype(float)))
        return np.real(np.fft.ifft2(spectrum))

    @staticmethod
    def concentration_points(u: MapSlice, radius, count=PEAKS_PER_RADIUS):
        """Parameter points of the ``count`` largest local maxima of the concentration map."""
        density = ReplacementService.concentration_map(u, radius)
        peaks = (density >= ndimage.maximum_filter(density, size=3, mode="wrap")) & (density > 0.0)
        nodes = np.argwhere(peaks)
        order = np.argsort(-density[peaks], kind="stable")[:count]
        rows, cols = u.shape
        return [(i / rows, j / cols) for i, j in nodes[order]]

    @staticmethod
    def candidate_family(u: MapSlice, peaks=PEAKS_PER_RADIUS, epsilon=None):
        """
        Ball collections for the energy-decrease search, radii D/4 and D/8 with
        D the shortest period.

        Per radius r the family holds single balls on a 4 x 4 parameter
        sublattice, single balls at the ``peaks`` strongest concentration points
        of E(u, B(x, r/2)), and one greedy collection of pairwise disjoint balls
        taken from those singles in order of E(u, B/2). The greedy collection
        skips balls that would lift E(u, B) above ``epsilon``.
        """
        period = u.lattice.shortest_period()
        family = []
        for radius in (period / 4.0, period / 8.0):
            centers = [((i + 0.5) / 4.0, (j + 0.5) / 4.0) for i in range(4) for j in range(4)]
            centers += ReplacementService.concentration_points(u, 0.5 * radius, peaks)
            singles = [Ball(center, radius) for center in centers]
            family.extend(BallCollection((ball,)) for ball in singles)

            ranked = sorted(singles, key=lambda ball: -EnergyService.energy(u, BallCollection((ball.scaled(0.5),))))
            chosen = []
            for ball in ranked:
                if any(_overlap(u.lattice, ball, other) for other in chosen):
                    continue
                trial = BallCollection(tuple(chosen) + (ball,))
                if epsilon is not None and EnergyService.energy(u, trial) > epsilon:
                    continue
                chosen.append(ball)
            if len(chosen) > 1:
                family.append(BallCollection(tuple(chosen)))
        return family

    @staticmethod
    def max_energy_decrease(u: MapSlice, epsilon, candidate_family=None, tol=None):
        """
        Lower bound for sup_B {E(u) - E(H(u, B/2))} over admissible collections
        with E(u, B) <= epsilon.

        Candidates are visited by decreasing E(u, B/2), which bounds their drop,
        so the search stops as soon as no remaining candidate can win.

        Returns:
            tuple: (best drop, achieving collection B); the collection is None
            when no candidate is admissible.
        """
        eps1 = _defaults()["EPSILON_1"]
        if epsilon > eps1 * (1.0 + 1e-12):
            raise PreconditionError(f"max_energy_decrease needs epsilon <= {eps1}, got {epsilon}", "harmonic-core")
        tol = _defaults()["PROBE_REPLACE_TOL"] if tol is None else tol
        if candidate_family is None:
            family = ReplacementService.candidate_family(u, epsilon=epsilon)
        else:
            family = candidate_family

        admissible = []
        for balls in family:
            if EnergyService.energy(u, balls) <= epsilon:
                admissible.append((EnergyService.energy(u, balls.scaled(0.5)), balls))
        if not admissible:
            logger.warning("No admissible ball collection for epsilon=%.3g", epsilon)
            return 0.0, None

        total = EnergyService.energy(u)
        best, argmax = 0.0, None
        for bound, balls in sorted(admissible, key=lambda item: -item[0]):
            if bound <= best:
                break
            v = ReplacementService.harmonic_replace(u, balls.scaled(0.5), tol=tol, eps1=epsilon)
            drop = total - EnergyService.energy(v)
            if drop > best:
                best, argmax = drop, balls
        if argmax is None:
            argmax = admissible[0][1]
        return best, argmax

    @staticmethod
    def decrease_continuity_ratio(u_s: MapSlice, u_t: MapSlice, epsilon, tol=None):
        """e_{eps/2}(u_s) / e_eps(u_t); 0 when both vanish."""
        numerator, _ = ReplacementService.max_energy_decrease(u_s, 0.5 * epsilon, tol=tol)
        denominator, _ = ReplacementService.max_energy_decrease(u_t, epsilon, tol=tol)
        if denominator <= 0.0:
            return 0.0 if numerator <= 0.0 else np.inf
        return numerator / denominator

    @staticmethod
    def comparison_probe(u: MapSlice, first, second, factors=(0.125, 0.25, 0.5), tol=None, eps1=None):
        """
        Energies of repeated replacements and the constants the comparison
        inequalities need.

        ``k_first`` is the largest k with E(u) - E[H(u,B1,B2)] >= k (E(u) - E[H(u,B2/2)])^2;
        ``inverse_k_second[mu]`` is the smallest 1/k with
        (1/k) (E(u) - E[H(u,B1)])^(1/2) + E(u) - E[H(u,2 mu B2)] >= E[H(u,B1)] - E[H(u,B1,mu B2)].

        Raises:
            PreconditionError: unless E(u, B_i) <= eps1 / 3 for both collections.
        """
        eps1 = _defaults()["EPSILON_1"] if eps1 is None else eps1
        tol = _defaults()["PROBE_REPLACE_TOL"] if tol is None else tol
        first, second = _as_collection(first), _as_collection(second)
        for name, balls in (("B1", first), ("B2", second)):
            local = EnergyService.energy(u, balls)
            if local > eps1 / 3.0:
                raise PreconditionError(
                    f"comparison_probe needs E(u, {name}) <= eps1/3 = {eps1 / 3.0:.4g}, measured {local:.4g}",
                    "harmonic-core",
                )

        def replace(m, balls):
            return ReplacementService.harmonic_replace(m, balls, tol=tol, eps1=eps1)

        e_u = EnergyService.energy(u)
        h1 = replace(u, first)
        e_1 = EnergyService.energy(h1)
        e_12 = EnergyService.energy(replace(h1, second))
        e_half2 = EnergyService.energy(replace(u, second.scaled(0.5)))

        gap_12 = e_u - e_12
        gap_half2 = e_u - e_half2
        k_first = gap_12 / gap_half2 ** 2 if gap_half2 > 0 else np.inf
        scaled = {}
        inverse_k_second = {}
        for mu in factors:
            e_2mu = EnergyService.energy(replace(u, second.scaled(2.0 * mu)))
            e_1mu = EnergyService.energy(replace(h1, second.scaled(mu)))
            scaled[mu] = {"H(u,2muB2)": e_2mu, "H(u,B1,muB2)": e_1mu}
            excess = (e_1 - e_1mu) - (e_u - e_2mu)
            gap_1 = e_u - e_1
            if excess <= 0:
                inverse_k_second[mu] = 0.0
            else:
                inverse_k_second[mu] = excess / np.sqrt(gap_1) if gap_1 > 0 else np.inf
        return {
            "E(u)": e_u,
            "H(u,B1)": e_1,
            "H(u,B1,B2)": e_12,
            "H(u,B2/2)": e_half2,
            "scaled": scaled,
            "k_first": k_first,
            "inverse_k_second": inverse_k_second,
        }
