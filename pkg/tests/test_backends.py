import numpy as np
import pytest

from masw import io, kernels
from masw.batched import fill_grid
from masw.dispersion import evaluate_model
from masw.model import LayeredEarthModel
from masw.stiffness import assemble, banded_determinant, dense_determinant, determinant

pytestmark = pytest.mark.skipif(not kernels.COMPILED_AVAILABLE, reason="compiled extension not built")

py = kernels.get_backend("python")


def compiled():
    return kernels.get_backend("compiled")


def test_auto_prefers_compiled():
    assert kernels.get_backend("auto") is compiled()
    assert compiled().NAME == "compiled" and py.NAME == "python"
    with pytest.raises(ValueError):
        kernels.get_backend("gpu")


def test_assembly_and_determinants_bitwise_equal():
    rng = np.random.default_rng(2)
    for _ in range(300):
        n = int(rng.integers(1, 11))
        vs = rng.uniform(50, 400, n + 1)
        vp = vs * rng.uniform(1.5, 2.5, n + 1)
        m = LayeredEarthModel(n, rng.uniform(0.5, 10, n), rng.uniform(1500, 2300, n + 1), vp, vs)
        w, c = rng.uniform(0.5, 100), rng.uniform(40, 500)
        a, b = assemble(m, w, c, backend=compiled()), assemble(m, w, c, backend=py)
        assert a.bands.tobytes() == b.bands.tobytes()
        assert banded_determinant(a, compiled()) == banded_determinant(a, py)
        assert determinant(m, w, c, backend=compiled()) == determinant(m, w, c, backend=py)
        assert compiled().dense_det(a.to_dense()) == dense_determinant(a.to_dense())


def test_engine_results_equal_across_backends(ref_model, ref_sweep):
    curve = io.gen_variable(8)
    a = evaluate_model(ref_model, curve, ref_sweep, backend=compiled())
    b = evaluate_model(ref_model, curve, ref_sweep, backend=py)
    assert a == b
    ga = fill_grid(ref_model, curve.wavelengths[:2], ref_sweep, backend=compiled())
    gb = fill_grid(ref_model, curve.wavelengths[:2], ref_sweep, backend=py)
    assert ga.values.tobytes() == gb.values.tobytes()
