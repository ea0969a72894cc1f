"""
Base class for the toolkit's management commands.

Adds the global flags ``--config``, ``--threads``, ``--seed`` and ``--out`` and
turns toolkit errors into ``CommandError`` so the process exits non-zero.
"""

import logging

from django.core.management.base import BaseCommand, CommandError

from core.config import load_config
from core.exceptions import MinmaxError
from core.services import ManifestService

logger = logging.getLogger(__name__)


class MinmaxCommand(BaseCommand):
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument("--config", help="KEY=value configuration file")
        parser.add_argument("--threads", type=int, help="worker threads for per-slice work")
        parser.add_argument("--seed", type=int, help="seed for the Monte Carlo probes")
        parser.add_argument("--out", help="output directory")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def config_overrides(self, options):
        """Extra overrides taken from command-specific flags."""
        return {}

    def handle(self, *args, **options):
        try:
            config = load_config(
                options.get("config"),
                threads=options.get("threads"),
                seed=options.get("seed"),
                output_dir=options.get("out"),
                **self.config_overrides(options),
            )
            return self.run(config, **options)
        except MinmaxError as e:
            logger.error("%s failed in %s: %s", self.__module__.rsplit(".", 1)[-1], e.provenance, e)
            raise CommandError(f"[{e.provenance}] {e}") from e
        except OSError as e:
            raise CommandError(f"I/O error: {e}") from e

    def run(self, config, **options):
        raise NotImplementedError("subclasses of MinmaxCommand must provide a run() method")

    def write_report(self, path, report):
        path = ManifestService.write_json(path, report)
        self.stdout.write(self.style.SUCCESS(f"wrote {path}"))
        return path
