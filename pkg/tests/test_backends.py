import numpy as np
import pytest

from coinwalk import backend
from coinwalk.core import fidelity, random_target
from coinwalk.engine import run
from coinwalk.logcoin import synthesize_logcoin
from coinwalk.stepwise import synthesize_stepwise

needs_cython = pytest.mark.skipif(
    "cython" not in backend.available(), reason="compiled kernels not built"
)


@pytest.fixture
def restore_backend():
    previous = backend.name
    yield
    backend.select(previous)


@needs_cython
class TestBackendParity:
    def test_same_final_state(self, restore_backend):
        for c, d, synth in [
            (2, 7, synthesize_stepwise),
            (2, 16, synthesize_logcoin),
            (3, 4, synthesize_stepwise),
        ]:
            target = random_target(c, d, 99)
            sched = synth(target)
            backend.select("python")
            via_python = run(sched)
            backend.select("cython")
            via_cython = run(sched)
            assert np.array_equal(via_python.codes, via_cython.codes)
            diff = np.max(np.abs(via_python.amps - via_cython.amps))
            assert diff <= 1e-13
            assert fidelity(via_cython, target) >= 1 - 1e-12

    def test_kernel_shift_agreement(self, restore_backend):
        from coinwalk import _kernels_cy, _kernels_py

        rng = np.random.default_rng(5)
        c, d = 3, 5
        m = 2**c
        # positions with every coordinate below d - 1, so a unit shift stays in
        safe = sorted(
            {
                x + d * y + d * d * z
                for x, y, z in rng.integers(0, d - 1, size=(20, 3))
            }
        )[:12]
        codes = np.array(safe, dtype=np.int64)
        amps = rng.standard_normal((12, m)) + 1j * rng.standard_normal((12, m))
        amps /= np.linalg.norm(amps)
        # zero a few cells so the sparsity handling is exercised
        amps[rng.random((12, m)) < 0.3] = 0
        amps /= np.linalg.norm(amps)
        py_codes, py_amps = _kernels_py.shift_state(codes, amps.copy(), 1, d, c)
        cy_codes, cy_amps = _kernels_cy.shift_state(codes, amps.copy(), 1, d, c)
        assert np.array_equal(py_codes, cy_codes)
        assert np.max(np.abs(py_amps - cy_amps)) == 0


class TestSelection:
    def test_select_python(self, restore_backend):
        assert backend.select("python") == "python"
        assert backend.kernels.__name__.endswith("_kernels_py")

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError):
            backend.select("fortran")

    def test_python_backend_runs(self, restore_backend):
        backend.select("python")
        target = random_target(2, 5, 1)
        assert fidelity(run(synthesize_stepwise(target)), target) >= 1 - 1e-12
