"""
Module core.services.manifest_service

Saves and loads sweepouts as a directory holding ``manifest.json`` and one
PGRID1 file per slice under ``slices/``. Samples are stored as f64, so a
save/load round trip is bit-identical.
"""

import json
import logging
from pathlib import Path

from core.exceptions import GridFileError
from core.models import Lattice, MapSlice, PeriodicField, Sweepout, target_from_description
from core.serializers import ManifestSerializer
from core.utils import Utils
from .pgrid_service import GridFileService

logger = logging.getLogger(__name__)

MANIFEST_FORMAT = "minmax-sweepout/1"
MANIFEST_NAME = "manifest.json"


class ManifestService:

    @staticmethod
    def write_json(path, payload):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as handle:
            json.dump(Utils.to_jsonable(payload), handle, indent=2, sort_keys=True)
            handle.write("\n")
        return path

    @staticmethod
    def save_slices(slices, directory, prefix="slice"):
        """Write each slice as ``<prefix>_NNNN.pgrid``; returns the file names."""
        directory = Path(directory)
        names = []
        for k, u in enumerate(slices):
            name = f"{prefix}_{k:04d}.pgrid"
            GridFileService.write(directory / name, PeriodicField(u.lattice, u.values))
            names.append(name)
        return names

    @staticmethod
    def load_slices(directory, target, pattern="*.pgrid"):
        """Read every PGRID1 file of ``directory`` in name order as slices of ``target``."""
        paths = sorted(Path(directory).glob(pattern))
        if not paths:
            raise GridFileError(f"No grid files matching {pattern} in {directory}")
        return [ManifestService._slice_from_file(path, target) for path in paths]

    @staticmethod
    def _slice_from_file(path, target):
        grid = GridFileService.read(path)
        samples = grid.samples if grid.samples.ndim == 3 else grid.samples[..., None]
        return MapSlice(grid.lattice, samples, target)

    @staticmethod
    def save(sweepout: Sweepout, directory):
        """
        Write ``manifest.json`` and ``slices/slice_NNNN.pgrid`` under ``directory``.

        Returns the manifest path.
        """
        directory = Path(directory)
        names = ManifestService.save_slices(sweepout.slices, directory / "slices")
        manifest = {
            "format": MANIFEST_FORMAT,
            "grid": list(sweepout.slices[0].shape),
            "times": sweepout.times,
            "marks": [mark.tau for mark in sweepout.marks],
            "slices": [f"slices/{name}" for name in names],
            "endpoint_kinds": list(sweepout.endpoint_kinds),
            "target": sweepout.target.describe(),
        }
        path = ManifestService.write_json(directory / MANIFEST_NAME, manifest)
        logger.info("saved sweepout of %d slices to %s", len(sweepout), directory)
        return path

    @staticmethod
    def load(directory) -> Sweepout:
        """
        Rebuild a sweepout written by :meth:`save`.

        Raises:
            GridFileError: on a missing or invalid manifest, or when a slice file
                disagrees with the manifest.
        """
        directory = Path(directory)
        try:
            with (directory / MANIFEST_NAME).open() as handle:
                raw = json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            raise GridFileError(f"Reading manifest in {directory} failed: {e}") from e
        serializer = ManifestSerializer(data=raw)
        if not serializer.is_valid():
            raise GridFileError(f"Invalid manifest in {directory}: {dict(serializer.errors)}")
        manifest = serializer.validated_data

        target = target_from_description(manifest["target"])
        slices = []
        for name, (re, im) in zip(manifest["slices"], manifest["marks"]):
            u = ManifestService._slice_from_file(directory / name, target)
            if u.lattice != Lattice(complex(re, im)):
                raise GridFileError(f"Slice {name} has mark {u.lattice.tau}, manifest says {complex(re, im)}")
            slices.append(u)
        return Sweepout(manifest["times"], tuple(slices), tuple(manifest["endpoint_kinds"]))
