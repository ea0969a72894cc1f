from dataclasses import dataclass
import itertools

import numpy as np


MAX_REDUCTION_STEPS = 10_000


def _reduced_basis(tau):
    """
    Gauss-reduced basis (v1, v2) of the lattice {1, tau}: |v1| <= |v2| and
    |Re(v2 conj v1)| <= |v1|^2 / 2, so v1 is a shortest nonzero vector.
    """
    v1, v2 = 1.0 + 0.0j, complex(tau)
    if abs(v2) < abs(v1):
        v1, v2 = v2, v1
    for _ in range(MAX_REDUCTION_STEPS):
        m = round((v2 * v1.conjugate()).real / abs(v1) ** 2)
        v2 = v2 - m * v1
        if abs(v2) >= abs(v1):
            return v1, v2
        v1, v2 = v2, v1
    raise RuntimeError(f"Basis reduction of {tau} did not terminate")


def _shortest_vector(tau):
    return float(abs(_reduced_basis(tau)[0]))


@dataclass(frozen=True)
class Mark:
    """A point tau in the upper half plane labelling the flat torus {1, tau}."""

    tau: complex

    def __post_init__(self):
        tau = complex(self.tau)
        if not tau.imag > 0:
            raise ValueError(f"Mark must lie in the upper half plane, got {tau}")
        object.__setattr__(self, "tau", tau)

    @property
    def re(self):
        return self.tau.real

    @property
    def im(self):
        return self.tau.imag

    def area_normalized_basis(self):
        """Basis (1/sqrt(tau2), tau1/sqrt(tau2) + i sqrt(tau2)) of the unit-area torus."""
        root = np.sqrt(self.im)
        return complex(1.0 / root), complex(self.re / root + 1j * root)

    def systole(self):
        """
        Length of the shortest closed geodesic of the unit-area torus.

        Tends to zero exactly when the reduced tau2 tends to infinity.
        """
        return _shortest_vector(self.tau) / float(np.sqrt(self.im))


@dataclass(frozen=True)
class Lattice:
    """
    Lattice generated by omega1 = 1 and omega2 = tau.

    Parameter coordinates (s, t) in [0, 1)^2 map to the physical point
    s + t * tau; every grid in the toolkit is uniform in (s, t).
    """

    omega2: complex = 1j

    def __post_init__(self):
        omega2 = complex(self.omega2)
        if not omega2.imag > 0:
            raise ValueError(f"Im(omega2) must be positive, got {omega2}")
        object.__setattr__(self, "omega2", omega2)

    @property
    def tau(self):
        return self.omega2

    @property
    def mark(self):
        return Mark(self.omega2)

    @property
    def is_square(self):
        return self.omega2 == 1j

    def metric_coefficients(self):
        """
        Coefficients (a, b, c) of the Euclidean gradient in parameter derivatives:
        |grad u|^2 = a|u_s|^2 - 2b u_s.u_t + c|u_t|^2.
        """
        t1, t2 = self.omega2.real, self.omega2.imag
        return 1.0 + (t1 / t2) ** 2, t1 / t2 ** 2, 1.0 / t2 ** 2

    def to_physical(self, s, t):
        return np.asarray(s) + np.asarray(t) * self.omega2

    def to_parameter(self, z):
        z = np.asarray(z, dtype=complex)
        t = z.imag / self.omega2.imag
        s = z.real - t * self.omega2.real
        return s, t

    def shortest_period(self):
        return _shortest_vector(self.omega2)

    def minimal_displacement(self, ds, dt):
        """
        Shortest physical vector among the translates of the parameter offset (ds, dt).
        """
        ds = np.asarray(ds, dtype=float)
        dt = np.asarray(dt, dtype=float)
        z0 = (ds - np.round(ds)) + (dt - np.round(dt)) * self.omega2
        # Round in the reduced basis; the nearest translate is then one of its 3 x 3 neighbours.
        v1, v2 = _reduced_basis(self.omega2)
        det = (v1.conjugate() * v2).imag
        a = np.round(-(v2.conjugate() * z0).imag / det)
        b = np.round((v1.conjugate() * z0).imag / det)
        z0 = z0 - a * v1 - b * v2
        best = None
        for p, q in itertools.product((-1, 0, 1), repeat=2):
            z = z0 + p * v1 + q * v2
            if best is None:
                best = z
            else:
                best = np.where(np.abs(z) < np.abs(best), z, best)
        return best
