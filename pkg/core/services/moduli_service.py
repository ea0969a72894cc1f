"""
Module core.services.moduli_service

Marks up to the modular group: reduction to the fundamental domain, the action
of PSL(2, Z) on marks and slices, and classification of mark sequences.

The fundamental domain is -1/2 < Re tau <= 1/2, |tau| >= 1, with Re tau >= 0
on the unit circle. T is tau -> tau + 1 and S is tau -> -1/tau.
"""

import logging
import math

import numpy as np

from core.config import minmax_settings
from core.models import Lattice, MapSlice, Mark, ModuliPoint, SequenceVerdict
from .spectral_service import SpectralService

logger = logging.getLogger(__name__)

MAX_REDUCTION_STEPS = 10_000
CIRCLE_TOLERANCE = 1e-15

S_MATRIX = np.array([[0, -1], [1, 0]], dtype=np.int64)


def _t_matrix(n):
    return np.array([[1, n], [0, 1]], dtype=np.int64)


class ModuliService:

    @staticmethod
    def apply_matrix(matrix, tau):
        """Moebius action (a tau + b) / (c tau + d)."""
        (a, b), (c, d) = np.asarray(matrix)
        tau = complex(tau)
        return (a * tau + b) / (c * tau + d)

    @staticmethod
    def reduce_to_fundamental_domain(tau) -> ModuliPoint:
        """
        Gauss reduction of a mark.

        Shifts Re tau into (-1/2, 1/2] and inverts while |tau| < 1. Returns the
        reduced mark, the generator word (e.g. ``("T^-5",)`` or ``("S", "T^1")``)
        and the unimodular matrix taking the original mark to the reduced one.
        """
        original = tau.tau if isinstance(tau, Mark) else complex(tau)
        z = Mark(original).tau
        matrix = np.eye(2, dtype=np.int64)
        word = []
        for _ in range(MAX_REDUCTION_STEPS):
            shift = -math.ceil(z.real - 0.5)
            if shift:
                z = z + shift
                matrix = _t_matrix(shift) @ matrix
                word.append(f"T^{shift}")
            norm = abs(z) ** 2
            if norm < 1.0 - CIRCLE_TOLERANCE:
                z = -1.0 / z
                matrix = S_MATRIX @ matrix
                word.append("S")
                continue
            if abs(norm - 1.0) <= CIRCLE_TOLERANCE and z.real < 0:
                z = -1.0 / z
                matrix = S_MATRIX @ matrix
                word.append("S")
            break
        else:
            raise RuntimeError(f"Reduction of {original} failed: no fixed point after {MAX_REDUCTION_STEPS} steps")
        return ModuliPoint(Mark(z), tuple(word), matrix, original)

    @staticmethod
    def in_fundamental_domain(tau):
        tau = complex(tau)
        norm = abs(tau) ** 2
        if not (-0.5 < tau.real <= 0.5 and norm >= 1.0 - CIRCLE_TOLERANCE):
            return False
        return not (abs(norm - 1.0) <= CIRCLE_TOLERANCE and tau.real < 0)

    @staticmethod
    def resample_for_mark(u: MapSlice, matrix) -> MapSlice:
        """
        The same map seen on the equivalent torus {1, M tau}.

        The node (s', t') of the new lattice is the point (d s' + b t', c s' + a t')
        of the old one, since (c tau + d)(s' + t' M tau) = (d s' + b t') + (c s' + a t') tau.
        On square grids this is an exact index permutation.
        """
        (a, b), (c, d) = np.asarray(matrix, dtype=np.int64)
        lattice = Lattice(ModuliService.apply_matrix(matrix, u.lattice.tau))
        rows, cols = u.shape
        i, j = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
        if rows == cols:
            values = u.values[(d * i + b * j) % rows, (c * i + a * j) % cols]
        else:
            s, t = i / rows, j / cols
            values = u.target.project(
                SpectralService.sample_at(u.values, (d * s + b * t) % 1.0, (c * s + a * t) % 1.0)
            )
        return MapSlice(lattice, values, u.target)

    @staticmethod
    def classify_sequence(taus, threshold=None, window=None, cauchy_tol=None) -> SequenceVerdict:
        """
        Decide whether the conformal structures of a sequence converge or degenerate.

        Degenerate: the last reduced Im tau exceeds ``threshold`` and the last
        ``window`` values increase strictly. Converged: the last ``window`` reduced
        marks differ pairwise-adjacently by at most ``cauchy_tol``; the limit is
        their mean. Anything else is inconclusive.
        """
        if not taus:
            raise ValueError("classify_sequence needs a nonempty sequence")
        cfg = minmax_settings()
        threshold = cfg["DEGENERATE_THRESHOLD"] if threshold is None else threshold
        window = cfg["TREND_WINDOW"] if window is None else window
        cauchy_tol = cfg["CAUCHY_TOL"] if cauchy_tol is None else cauchy_tol

        reduced = [ModuliService.reduce_to_fundamental_domain(t) for t in taus]
        imaginary = np.array([p.tau.im for p in reduced])
        systoles = [p.tau.systole() for p in reduced]
        tail = imaginary[-min(window, len(imaginary)):]
        verdict = SequenceVerdict("inconclusive", reduced=reduced, systoles=systoles)

        if imaginary[-1] > threshold and len(tail) >= 2 and np.all(np.diff(tail) > 0):
            verdict.kind = "degenerate"
        else:
            values = np.array([p.tau.tau for p in reduced[-min(window, len(reduced)):]])
            if len(values) == 1 or np.max(np.abs(np.diff(values))) <= cauchy_tol:
                verdict.kind = "converged"
                verdict.limit = complex(np.mean(values))
        logger.info("Mark sequence of length %d classified as %s", len(taus), verdict.kind)
        return verdict
