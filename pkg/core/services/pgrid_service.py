"""
Module core.services.pgrid_service

Reads and writes the PGRID1 binary grid format.

Layout (little endian, no padding):
- 8-byte magic ``PGRID1\\0\\0``
- u32 rows, u32 cols, u32 component count
- f64 Re(tau), f64 Im(tau)
- rows * cols * components f64 samples, row-major, components interleaved

Complex scalar fields are stored as two components (real, imaginary).
"""

import logging
from pathlib import Path

import numpy as np

from core.exceptions import GridFileError
from core.models import Lattice, PeriodicField

logger = logging.getLogger(__name__)

MAGIC = b"PGRID1\x00\x00"

HEADER = np.dtype([
    ("magic", "S8"),
    ("rows", "<u4"),
    ("cols", "<u4"),
    ("components", "<u4"),
    ("tau_re", "<f8"),
    ("tau_im", "<f8"),
])


class GridFileService:

    @staticmethod
    def encode(field: PeriodicField) -> bytes:
        samples = field.samples
        if np.iscomplexobj(samples):
            if samples.ndim == 3:
                raise GridFileError("Complex vector fields cannot be stored in PGRID1")
            samples = np.stack([samples.real, samples.imag], axis=-1)
        if samples.ndim == 2:
            samples = samples[..., None]
        rows, cols, components = samples.shape
        header = np.zeros(1, dtype=HEADER)
        header["magic"] = MAGIC
        header["rows"] = rows
        header["cols"] = cols
        header["components"] = components
        header["tau_re"] = field.lattice.tau.real
        header["tau_im"] = field.lattice.tau.imag
        body = np.ascontiguousarray(samples, dtype="<f8")
        return header.tobytes() + body.tobytes()

    @staticmethod
    def decode(payload: bytes, as_complex=False) -> PeriodicField:
        if len(payload) < HEADER.itemsize:
            raise GridFileError("PGRID1 payload shorter than its header")
        header = np.frombuffer(payload[:HEADER.itemsize], dtype=HEADER)[0]
        if bytes(header["magic"]).ljust(8, b"\x00") != MAGIC:
            raise GridFileError(f"Bad PGRID1 magic {bytes(header['magic'])!r}")
        rows, cols, components = int(header["rows"]), int(header["cols"]), int(header["components"])
        expected = rows * cols * components * 8
        body = payload[HEADER.itemsize:]
        if len(body) != expected:
            raise GridFileError(f"PGRID1 body has {len(body)} bytes, expected {expected}")
        samples = np.frombuffer(body, dtype="<f8").astype(float).reshape(rows, cols, components)
        if as_complex:
            if components != 2:
                raise GridFileError(f"Complex read needs 2 components, file has {components}")
            samples = samples[..., 0] + 1j * samples[..., 1]
        elif components == 1:
            samples = samples[..., 0]
        lattice = Lattice(complex(float(header["tau_re"]), float(header["tau_im"])))
        return PeriodicField(lattice, samples)

    @staticmethod
    def write(path, field: PeriodicField):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(GridFileService.encode(field))
        logger.debug("wrote %s (%sx%s)", path, *field.shape)
        return path

    @staticmethod
    def read(path, as_complex=False) -> PeriodicField:
        try:
            payload = Path(path).read_bytes()
        except OSError as e:
            raise GridFileError(f"Reading grid file {path} failed: {e}") from e
        return GridFileService.decode(payload, as_complex=as_complex)
