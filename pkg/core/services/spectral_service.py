"""
Periodic Cauchy-Riemann calculus on torus grids.

All derivatives are exact Fourier multipliers. On the lattice {1, tau}, with
a = (n - tau1 m) / tau2, the multipliers are

    d/dz    : pi (a + i m)
    d/dzbar : pi (-a + i m)

which for tau = i are pi (n + i m) and pi (-n + i m).
"""

import logging

import numpy as np
from scipy import ndimage

from core.exceptions import PreconditionError
from core.models import PeriodicField, SpectralField

logger = logging.getLogger(__name__)

MEAN_TOLERANCE = 1e-10


def _broadcast(multiplier, samples):
    if samples.ndim == 3:
        return multiplier[..., None]
    return multiplier


class SpectralService:

    @staticmethod
    def forward_transform(f: PeriodicField) -> SpectralField:
        """Discrete Fourier coefficients normalized so a pure mode has coefficient 1."""
        rows, cols = f.shape
        coefficients = np.fft.fft2(f.samples, axes=(0, 1)) / (rows * cols)
        return SpectralField(f.lattice, coefficients)

    @staticmethod
    def inverse_transform(spectrum: SpectralField, real=False) -> PeriodicField:
        rows, cols = spectrum.shape
        samples = np.fft.ifft2(spectrum.coefficients * (rows * cols), axes=(0, 1))
        if real:
            samples = samples.real
        return PeriodicField(spectrum.lattice, samples)

    @staticmethod
    def wavenumbers(f):
        """
        Physical-direction symbols (k_x, k_y) so that d/dx is 2 pi i k_x and
        d/dy is 2 pi i k_y.
        """
        m, n = SpectralField(f.lattice, np.empty(f.shape)).frequencies()
        tau = f.lattice.tau
        return m, (n - tau.real * m) / tau.imag

    @staticmethod
    def dz_multiplier(f):
        kx, ky = SpectralService.wavenumbers(f)
        return np.pi * (ky + 1j * kx)

    @staticmethod
    def dzbar_multiplier(f):
        kx, ky = SpectralService.wavenumbers(f)
        return np.pi * (-ky + 1j * kx)

    @staticmethod
    def _apply(f, multiplier):
        coefficients = np.fft.fft2(f.samples, axes=(0, 1))
        out = np.fft.ifft2(coefficients * _broadcast(multiplier, f.samples), axes=(0, 1))
        return PeriodicField(f.lattice, out)

    @staticmethod
    def d_z(f: PeriodicField) -> PeriodicField:
        return SpectralService._apply(f, SpectralService.dz_multiplier(f))

    @staticmethod
    def d_zbar(f: PeriodicField) -> PeriodicField:
        return SpectralService._apply(f, SpectralService.dzbar_multiplier(f))

    @staticmethod
    def gradient(f: PeriodicField):
        """Return (f_x, f_y) as arrays; real input gives real output."""
        kx, ky = SpectralService.wavenumbers(f)
        coefficients = np.fft.fft2(f.samples, axes=(0, 1))
        fx = np.fft.ifft2(coefficients * _broadcast(2j * np.pi * kx, f.samples), axes=(0, 1))
        fy = np.fft.ifft2(coefficients * _broadcast(2j * np.pi * ky, f.samples), axes=(0, 1))
        if not f.is_complex:
            return fx.real, fy.real
        return fx, fy

    @staticmethod
    def dbar_inverse(f: PeriodicField) -> PeriodicField:
        """
        Zero-mean solution s of d_zbar(s) = f.

        Raises:
            PreconditionError: when the mean of ``f`` exceeds 1e-10.
        """
        if not f.zero_mean(MEAN_TOLERANCE):
            raise PreconditionError(
                f"dbar_inverse needs a zero-mean field, mean is {f.mean()}", "periodic-fields"
            )
        multiplier = SpectralService.dzbar_multiplier(f)
        inverse = np.zeros_like(multiplier)
        nonzero = multiplier != 0
        inverse[nonzero] = 1.0 / multiplier[nonzero]
        return SpectralService._apply(f, inverse)

    @staticmethod
    def beurling(f: PeriodicField) -> PeriodicField:
        """Unimodular multiplier (a + i m) / (-a + i m); the zero mode is dropped."""
        numerator = SpectralService.dz_multiplier(f)
        denominator = SpectralService.dzbar_multiplier(f)
        multiplier = np.zeros_like(numerator)
        nonzero = denominator != 0
        multiplier[nonzero] = numerator[nonzero] / denominator[nonzero]
        return SpectralService._apply(f, multiplier)

    @staticmethod
    def sample_at(samples, s, t, order=3):
        """
        Periodic spline interpolation of grid samples at parameter points (s, t).

        Works on real or complex, scalar or vector samples; the output has the
        shape of ``s`` plus the component axis when present.
        """
        samples = np.asarray(samples)
        rows, cols = samples.shape[:2]
        coords = np.array([np.asarray(s, dtype=float) * rows, np.asarray(t, dtype=float) * cols])
        flat = coords.reshape(2, -1)

        def _one(channel):
            if np.iscomplexobj(channel):
                return _one(channel.real) + 1j * _one(channel.imag)
            return ndimage.map_coordinates(channel, flat, order=order, mode="grid-wrap")

        if samples.ndim == 2:
            return _one(samples).reshape(np.shape(s))
        out = np.stack([_one(samples[:, :, k]) for k in range(samples.shape[2])], axis=-1)
        return out.reshape(np.shape(s) + (samples.shape[2],))
