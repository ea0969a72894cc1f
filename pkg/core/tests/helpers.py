import numpy as np

from core.models import Lattice, MapSlice, Sweepout, get_target


def wavy_slice(grid, amplitude, tau=1j):
    """Smooth map into S^2 near the north pole."""
    s, t = np.meshgrid(np.arange(grid) / grid, np.arange(grid) / grid, indexing="ij")
    points = np.stack(
        [
            amplitude * np.sin(2 * np.pi * s),
            amplitude * np.cos(2 * np.pi * t) * np.sin(2 * np.pi * s + 0.3),
            np.ones_like(s),
        ],
        axis=-1,
    )
    return MapSlice.from_points(Lattice(tau), points, get_target("sphere2"))


def wavy_sweepout(grid, time_samples, amplitude):
    """Wavy slices with amplitude amplitude * sin(pi t); both ends are the north pole."""
    amplitudes = amplitude * np.sin(np.pi * np.linspace(0.0, 1.0, time_samples))
    amplitudes[0] = amplitudes[-1] = 0.0
    return Sweepout.uniform([wavy_slice(grid, a) for a in amplitudes])


def random_slice(grid, amplitude, rng, modes=3):
    """Smooth random map into S^2 near the north pole, a few random Fourier modes per channel."""
    s, t = np.meshgrid(np.arange(grid) / grid, np.arange(grid) / grid, indexing="ij")
    channels = []
    for _ in range(2):
        field = np.zeros_like(s)
        for _ in range(modes):
            j, k = rng.integers(-2, 3, size=2)
            phase = rng.uniform(0.0, 2 * np.pi)
            field += rng.normal() * np.cos(2 * np.pi * (j * s + k * t) + phase)
        channels.append(amplitude * field / modes)
    points = np.stack(channels + [np.ones_like(s)], axis=-1)
    return MapSlice.from_points(Lattice(), points, get_target("sphere2"))
