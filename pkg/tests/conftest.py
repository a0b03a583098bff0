import numpy as np
import pytest


class FakeRng:
    """Deterministic stand-in for numpy Generator: plays back scripted draws.

    Each entry of ``script`` is (method_name, value); values are returned in
    order and the method name is asserted.
    """

    def __init__(self, script):
        self.script = list(script)

    def _next(self, name):
        if not self.script:
            raise AssertionError(f"unexpected extra draw: {name}")
        want, value = self.script.pop(0)
        if want != name:
            raise AssertionError(f"expected draw {want}, sampler asked for {name}")
        return value

    def standard_normal(self, size=None):
        val = self._next("standard_normal")
        if size is None:
            return val
        return np.asarray(val, dtype=float)

    def random(self, size=None):
        val = self._next("random")
        if size is None:
            return val
        return np.asarray(val, dtype=float)

    def uniform(self, lo=0.0, hi=1.0):
        return self._next("uniform")

    def integers(self, n):
        return self._next("integers")


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)
