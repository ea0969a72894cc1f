import tempfile
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase, override_settings

from core.config import applied, load_config, minmax_settings, read_config_file
from core.exceptions import ConfigError
from core.utils import Utils


class LoadConfigTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, text):
        path = Path(self.tmp.name) / "run.env"
        path.write_text(text)
        return path

    def test_defaults_come_from_settings(self):
        config = load_config()
        self.assertEqual(config.grid_size, settings.MINMAX["GRID_SIZE"])
        self.assertEqual(config.epsilon_1, 0.5)
        self.assertIsNone(config.epsilon_0)
        self.assertAlmostEqual(config.eps0, 0.5 / 12.0)

    def test_settings_round_trip(self):
        config = load_config()
        self.assertEqual(set(config.to_settings()), set(settings.MINMAX))
        self.assertIsInstance(config.to_dict()["patch_center"], list)

    def test_overrides_win_and_none_is_ignored(self):
        config = load_config(grid_size=16, seed=None, rounds=2)
        self.assertEqual(config.grid_size, 16)
        self.assertEqual(config.seed, settings.MINMAX["SEED"])
        self.assertEqual(len(config.delta_schedule), 2)
        self.assertAlmostEqual(config.delta_schedule[1], config.delta_0 * config.delta_decay)

    def test_file_values_with_and_without_prefix(self):
        path = self.write("# small run\nMINMAX_GRID_SIZE=32\nROUNDS=2\nPATCH_CENTER=0.5,0.5\nEPSILON_0=\n")
        config = load_config(path)
        self.assertEqual(config.grid_size, 32)
        self.assertEqual(config.rounds, 2)
        self.assertEqual(config.patch_center, (0.5, 0.5))
        self.assertIsNone(config.epsilon_0)

    def test_overrides_beat_the_file(self):
        config = load_config(self.write("GRID_SIZE=32\n"), grid_size=16)
        self.assertEqual(config.grid_size, 16)

    def test_read_config_file_strips_the_prefix(self):
        data = read_config_file(self.write("MINMAX_SEED=7\nnu=0.2\n"))
        self.assertEqual(data, {"SEED": "7", "NU": "0.2"})

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config(Path(self.tmp.name) / "absent.env")

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as raised:
            load_config(self.write("GRID=32\n"))
        self.assertIn("GRID", str(raised.exception))

    def test_grid_must_be_a_power_of_two(self):
        with self.assertRaises(ConfigError):
            load_config(grid_size=24)

    def test_epsilon_order(self):
        with self.assertRaises(ConfigError):
            load_config(epsilon_1=1.5)
        with self.assertRaises(ConfigError):
            load_config(epsilon_0=0.6)
        self.assertEqual(load_config(epsilon_0=0.1).eps0, 0.1)

    def test_tolerances_must_be_positive(self):
        with self.assertRaises(ConfigError):
            load_config(solver_tol=0.0)

    def test_unknown_target(self):
        with self.assertRaises(ConfigError):
            load_config(target="klein-bottle")

    @override_settings(MINMAX={**settings.MINMAX, "ROUNDS": 3})
    def test_settings_changes_are_picked_up(self):
        self.assertEqual(load_config().rounds, 3)


class AppliedConfigTests(SimpleTestCase):
    def test_values_hold_inside_the_block_only(self):
        default = settings.MINMAX["ROUNDS"]
        config = load_config(rounds=default + 3)
        with applied(config) as active:
            self.assertIs(active, config)
            self.assertEqual(minmax_settings()["ROUNDS"], default + 3)
            self.assertEqual(settings.MINMAX["ROUNDS"], default)
        self.assertEqual(minmax_settings()["ROUNDS"], default)

    def test_blocks_nest(self):
        with applied(load_config(rounds=2)):
            with applied(load_config(rounds=4)):
                self.assertEqual(minmax_settings()["ROUNDS"], 4)
            self.assertEqual(minmax_settings()["ROUNDS"], 2)

    def test_worker_threads_see_the_applied_values(self):
        with applied(load_config(rounds=3)):
            rounds = Utils.parallel_map(lambda _: minmax_settings()["ROUNDS"], range(4), threads=2)
        self.assertEqual(rounds, [3, 3, 3, 3])

    def test_values_are_restored_after_an_error(self):
        default = settings.MINMAX["ROUNDS"]
        with self.assertRaises(RuntimeError):
            with applied(load_config(rounds=default + 1)):
                raise RuntimeError("stop")
        self.assertEqual(minmax_settings()["ROUNDS"], default)
