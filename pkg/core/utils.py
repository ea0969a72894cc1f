import contextvars
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from core.config import minmax_settings

logger = logging.getLogger(__name__)


class Utils:
    @staticmethod
    def parallel_map(func, items, threads=None) -> list:
        """
        Apply ``func`` to every item, keeping input order.

        @param func Callable of one argument
        @param items Iterable of arguments
        @param threads Worker count; 1 runs inline, None reads MINMAX["THREADS"]
        @return List of results in the order of ``items``
        """
        items = list(items)
        threads = minmax_settings()["THREADS"] if threads is None else int(threads)
        if threads <= 1 or len(items) <= 1:
            return [func(item) for item in items]
        # Workers see the caller's applied configuration.
        context = contextvars.copy_context()
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda item: context.copy().run(func, item), items))

    @staticmethod
    def make_rng(seed=None) -> np.random.Generator:
        """ Seeded generator; the only source of randomness in the toolkit """
        seed = minmax_settings()["SEED"] if seed is None else seed
        return np.random.default_rng(seed)

    @staticmethod
    def max_distance(first, second) -> float:
        """Largest pointwise Euclidean distance between two sampled maps."""
        return float(np.max(np.linalg.norm(np.asarray(first) - np.asarray(second), axis=-1)))

    @staticmethod
    def to_jsonable(value):
        """
        Convert numpy scalars, arrays and complex numbers for json.dump.

        Complex numbers become [re, im]; floats keep full precision through repr.
        """
        if isinstance(value, dict):
            return {str(k): Utils.to_jsonable(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [Utils.to_jsonable(v) for v in value]
        if isinstance(value, np.ndarray):
            return Utils.to_jsonable(value.tolist())
        if isinstance(value, (complex, np.complexfloating)):
            return [float(value.real), float(value.imag)]
        if isinstance(value, np.integer):
            return int(value)
        if isinstance(value, np.floating):
            return float(value)
        return value
