"""
Module core.services.tightening_service

Covering construction, harmonic-replacement tightening, property (*) checks and
the min-max driver.

Functions:
    build_covering: tents r_j(t) B_j over the near-critical slices.
    tighten: apply H(., r_j(t) B_j) for j = 1..m at every slice.
    verify_property_star: int over B/8 of |grad rho - grad v|^2 on sampled small-energy balls.
    calibrate_psi: fit C_psi in Psi(x) = C_psi sqrt(x) on half of the samples.
    minmax_drive: smooth -> reparametrize -> cover -> tighten, round by round.
"""

import logging

import numpy as np

from core.config import minmax_settings
from core.exceptions import GeometryError, HarmonicSliceError, MinmaxError, PreconditionError, TighteningError
from core.models import (
    Ball,
    BallCollection,
    CoveringEntry,
    CoveringSchedule,
    DriveHistory,
    PropertyStarReport,
    RoundRecord,
    Sweepout,
    TighteningReport,
)
from core.utils import Utils
from .energy_service import EnergyService
from .replacement_service import ReplacementService
from .sweepout_service import SweepoutService

logger = logging.getLogger(__name__)

PROPERTY_STAR_RADII = (0.15, 0.45)
PROPERTY_STAR_SHRINKS = 6
PSI_VALIDATION_SLACK = 0.1


def _cfg():
    return minmax_settings()


def _eps0(eps1=None):
    cfg = _cfg()
    if cfg.get("EPSILON_0") is not None:
        return cfg["EPSILON_0"]
    return (cfg["EPSILON_1"] if eps1 is None else eps1) / 12.0


def _energy_on(u, balls):
    try:
        return EnergyService.energy(u, balls)
    except GeometryError:
        return np.inf


class TighteningService:

    @staticmethod
    def build_covering(s: Sweepout, eps1=None, w_estimate=None, strict=True, tol=None) -> CoveringSchedule:
        """
        Cover I = {t: E(t) >= W/2} by intervals carrying a ball collection.

        For each uncovered t in I the argmax collection B_t of the maximal energy
        decrease at level eps1/4 anchors an interval, grown to neighbours s while
        e_{eps/2}(s) <= 2 e_eps(t) and E(s, B_t) <= eps1/3. Cores are disjoint;
        each tent is 1 on its core and falls linearly to 0 at twice the core,
        clipped at the neighbouring cores, so at most two tents are positive at
        any time.

        Raises:
            HarmonicSliceError: in strict mode, when a slice of I admits no decrease.
        """
        cfg = _cfg()
        eps1 = cfg["EPSILON_1"] if eps1 is None else eps1
        epsilon = eps1 / 4.0
        size = len(s)
        energies = SweepoutService.energies(s)
        w_estimate = float(np.max(energies)) if w_estimate is None else w_estimate
        schedule = CoveringSchedule(size=size, eps1=eps1)
        if w_estimate <= cfg["NOISE_FLOOR"]:
            return schedule

        interior = list(s.interior)
        near = [k for k in interior if energies[k] >= 0.5 * w_estimate]
        schedule.near_critical = near
        cache = {}

        def decrease(k, level):
            if (k, level) not in cache:
                cache[(k, level)] = ReplacementService.max_energy_decrease(s.slices[k], level, tol=tol)
            return cache[(k, level)]

        usable = []
        for k in near:
            drop, balls = decrease(k, epsilon)
            if balls is None or drop <= cfg["NOISE_FLOOR"] * max(1.0, energies[k]):
                message = f"Slice {k} in the near-critical set admits no energy decrease (e={drop:.3e})"
                if strict:
                    raise HarmonicSliceError(message, slice_index=k)
                logger.warning("%s; skipped", message)
                schedule.skipped.append(k)
                continue
            usable.append(k)

        usable_set = set(usable)
        covered = set()
        cores = []
        for k in usable:
            if k in covered:
                continue
            drop, balls = decrease(k, epsilon)

            def admits(j):
                if j not in usable_set or j in covered:
                    return False
                if _energy_on(s.slices[j], balls) > eps1 / 3.0:
                    return False
                return decrease(j, epsilon / 2.0)[0] <= 2.0 * drop

            lo = hi = k
            while admits(hi + 1):
                hi += 1
            covered.update(range(lo, hi + 1))
            cores.append((lo, hi, k, balls, drop))

        cores.sort(key=lambda c: c[0])
        for index, (lo, hi, anchor, balls, drop) in enumerate(cores):
            length = hi - lo + 1
            left_limit = cores[index - 1][1] if index > 0 else 0
            right_limit = cores[index + 1][0] if index + 1 < len(cores) else size - 1
            support_lo = max(lo - length, left_limit)
            support_hi = min(hi + length, right_limit)
            weights = np.zeros(size)
            weights[lo:hi + 1] = 1.0
            for j in range(lo - 1, support_lo, -1):
                r = (j - support_lo) / (lo - support_lo)
                if _energy_on(s.slices[j], balls.scaled(r)) > eps1 / 3.0:
                    support_lo = j
                    break
                weights[j] = r
            for j in range(hi + 1, support_hi):
                r = (support_hi - j) / (support_hi - hi)
                if _energy_on(s.slices[j], balls.scaled(r)) > eps1 / 3.0:
                    support_hi = j
                    break
                weights[j] = r
            weights[support_hi:] = 0.0
            weights[:support_lo + 1] = 0.0
            weights[lo:hi + 1] = 1.0
            schedule.entries.append(CoveringEntry(balls, anchor, (lo, hi), (support_lo, support_hi), weights, drop))

        if schedule.entries and int(schedule.active_counts().max()) > 2:
            raise TighteningError("Covering has more than two active tents at some time")
        logger.info("covering: %d entries over %d near-critical slices", len(schedule), len(near))
        return schedule

    @staticmethod
    def _tighten_slice(u, schedule, index, tol, samples):
        steps = []
        v = u
        for k, entry in enumerate(schedule.entries):
            r = entry.radius_at(index)
            if r <= 0.0:
                continue
            try:
                replaced = ReplacementService.harmonic_replace(v, entry.balls.scaled(r), tol=tol)
            except (PreconditionError, GeometryError) as e:
                raise TighteningError(f"Replacement {k} at slice {index} failed: {e}", location=(k, index)) from e
            # Shrink family r s B for s from 1 to 0; adjacent members must stay close.
            family = [replaced]
            for factor in np.linspace(1.0, 0.0, samples)[1:-1]:
                family.append(ReplacementService.harmonic_replace(v, entry.balls.scaled(r * factor), tol=tol))
            family.append(v)
            for first, second in zip(family[:-1], family[1:]):
                grad = np.sqrt(2.0 * EnergyService.difference_energy(first, second))
                steps.append(Utils.max_distance(first.values, second.values) + float(grad))
            v = replaced
        return v, steps

    @staticmethod
    def tighten(s: Sweepout, schedule: CoveringSchedule, tol=None, threads=None, samples=None):
        """
        gamma^k(t) = H(gamma^(k-1)(t), r_k(t) B_k) for k = 1..m at every slice.

        Returns:
            tuple: (tightened Sweepout, TighteningReport).

        Raises:
            TighteningError: carrying (k, slice index) of a failed replacement.
        """
        samples = _cfg()["HOMOTOPY_SAMPLES"] if samples is None else samples
        before = SweepoutService.energies(s)
        continuity_before = SweepoutService.continuity_measure(s)
        if not schedule.entries:
            report = TighteningReport(before, before.copy(), SweepoutService.areas(s), continuity_before, continuity_before)
            return s, report

        active = [k for k in s.interior if any(e.radius_at(k) > 0 for e in schedule.entries)]
        results = Utils.parallel_map(
            lambda k: TighteningService._tighten_slice(s.slices[k], schedule, k, tol, max(samples, 2)),
            active,
            threads,
        )
        slices = list(s.slices)
        steps = []
        for k, (v, local_steps) in zip(active, results):
            slices[k] = v
            steps.extend(local_steps)
        tightened = s.with_slices(slices)
        after = SweepoutService.energies(tightened)
        report = TighteningReport(
            energies_before=before,
            energies_after=after,
            areas_after=SweepoutService.areas(tightened),
            continuity_before=continuity_before,
            continuity_after=SweepoutService.continuity_measure(tightened),
            deformation_steps=steps,
        )
        logger.info("tighten: max energy %.6g -> %.6g", before.max(), after.max())
        return tightened, report

    @staticmethod
    def verify_property_star(u, eps0=None, sample_count=None, energy_drop=None, seed=None, tol=None) -> PropertyStarReport:
        """
        Sample balls B with E(u, B) <= eps0 and measure int_{B/8} |grad u - grad v|^2
        for v = H(u, B/8).

        Radii start uniform in [0.15, 0.45] D (D the shortest period) and are
        halved until the ball is admissible.
        """
        cfg = _cfg()
        eps0 = _eps0() if eps0 is None else eps0
        sample_count = cfg["PROPERTY_STAR_SAMPLES"] if sample_count is None else sample_count
        tol = cfg["PROBE_REPLACE_TOL"] if tol is None else tol
        rng = Utils.make_rng(seed)
        period = u.lattice.shortest_period()
        report = PropertyStarReport(energy_drop=energy_drop)
        for _ in range(sample_count):
            center = tuple(rng.uniform(0.0, 1.0, size=2))
            radius = rng.uniform(*PROPERTY_STAR_RADII) * period
            balls = BallCollection((Ball(center, radius),))
            for _ in range(PROPERTY_STAR_SHRINKS):
                if EnergyService.energy(u, balls) <= eps0:
                    break
                balls = balls.scaled(0.5)
            else:
                continue
            small = balls.scaled(0.125)
            v = ReplacementService.harmonic_replace(u, small, tol=tol, eps1=eps0)
            value = 2.0 * EnergyService.difference_energy(u, v, small)
            report.samples.append({"center": list(center), "radius": balls.balls[0].radius, "value": value})
            report.worst = max(report.worst, value)
        return report

    @staticmethod
    def calibrate_psi(pairs, seed=None):
        """
        Fit C_psi on half of the (value, energy drop) pairs; validate on the rest.

        A held-out pair violates the envelope when value > (1 + 0.1) C_psi sqrt(drop).
        """
        pairs = [(float(v), float(d)) for v, d in pairs if d > 0]
        if len(pairs) < 2:
            raise PreconditionError("calibrate_psi needs at least two pairs with positive drop", "sweepout-tighten")
        order = Utils.make_rng(seed).permutation(len(pairs))
        half = len(pairs) // 2
        calibration = [pairs[i] for i in order[:half]]
        validation = [pairs[i] for i in order[half:]]
        c_psi = max(v / np.sqrt(d) for v, d in calibration)
        violations = sum(1 for v, d in validation if v > (1.0 + PSI_VALIDATION_SLACK) * c_psi * np.sqrt(d))
        return {
            "c_psi": float(c_psi),
            "violation_fraction": violations / len(validation),
            "calibration_size": len(calibration),
            "validation_size": len(validation),
        }

    @staticmethod
    def _accept_not_worse(old: Sweepout, new: Sweepout):
        """Keep a new slice only when its energy did not grow."""
        slices = list(old.slices)
        rejected = 0
        for k in old.interior:
            if EnergyService.energy(new.slices[k]) <= EnergyService.energy(old.slices[k]):
                slices[k] = new.slices[k]
            else:
                rejected += 1
        return old.with_slices(slices), rejected

    @staticmethod
    def _record(s: Sweepout, round_number, delta, covering_size=0, rejected=0, star=0.0):
        energies = SweepoutService.energies(s)
        areas = SweepoutService.areas(s)
        argmax = int(np.argmax(energies))
        near = energies >= 0.5 * energies.max()
        defect = float(np.max((energies - areas)[near])) if energies.max() > 0 else 0.0
        return RoundRecord(
            round=round_number,
            max_energy=float(energies.max()),
            max_area=float(areas.max()),
            gap=float(energies.max() - areas.max()),
            worst_property_star=float(star),
            delta=float(delta),
            argmax=argmax,
            mark_at_max=s.slices[argmax].lattice.tau,
            near_critical_defect=defect,
            covering_size=covering_size,
            rejected_reparametrizations=rejected,
        )

    @staticmethod
    def minmax_drive(initial: Sweepout, rounds=None, delta_schedule=None, eps1=None, threads=None, seed=None) -> DriveHistory:
        """
        Alternate smoothing, conformal reparametrization, covering and tightening.

        Row 0 of the history is the prepared sweepout (constant patch imposed).
        Smoothed and reparametrized slices replace the old ones only when their
        energy does not grow, so the max-energy history never increases. Covering
        runs in non-strict mode: harmonic near-critical slices are skipped.
        Property (*) is measured on the maximal slice of each round, and those
        maximal slices form the near-critical sequence.
        """
        cfg = _cfg()
        rounds = cfg["ROUNDS"] if rounds is None else rounds
        if delta_schedule is None:
            delta_schedule = [cfg["DELTA_0"] * cfg["DELTA_DECAY"] ** n for n in range(rounds)]
        delta_schedule = list(delta_schedule)
        if len(delta_schedule) < rounds:
            raise ValueError(f"delta schedule has {len(delta_schedule)} entries for {rounds} rounds")

        current, _ = TighteningService._accept_not_worse(initial, SweepoutService.smooth_sweepout(initial, width=0.0))
        history = DriveHistory()
        history.records.append(TighteningService._record(current, 0, float("nan")))
        history.near_critical.append(current.slices[history.records[-1].argmax])

        for n in range(1, rounds + 1):
            delta = delta_schedule[n - 1]
            logger.info("round %d: delta=%.3g", n, delta)
            current, _ = TighteningService._accept_not_worse(current, SweepoutService.smooth_sweepout(current))
            try:
                reparametrized = SweepoutService.reparametrize_conformal(current, delta=delta, threads=threads)
                current, rejected = TighteningService._accept_not_worse(current, reparametrized)
            except MinmaxError as e:
                logger.warning("round %d: reparametrization skipped: %s", n, e)
                rejected = len(current.interior)
            schedule = TighteningService.build_covering(current, eps1=eps1, strict=False)
            history.schedules.append(len(schedule))
            current, report = TighteningService.tighten(current, schedule, threads=threads)

            energies = report.energies_after
            argmax = int(np.argmax(energies))
            star = TighteningService.verify_property_star(
                current.slices[argmax], energy_drop=float(report.drops[argmax]), seed=seed
            )
            history.property_star.append(star)
            record = TighteningService._record(current, n, delta, len(schedule), rejected, star.worst)
            history.records.append(record)
            history.near_critical.append(current.slices[record.argmax])
            logger.info(
                "round %d: maxE=%.6g maxArea=%.6g gap=%.3e", n, record.max_energy, record.max_area, record.gap
            )
        history.sweepout = current
        return history
