import numpy as np
import pytest

from holevolab import _optim
from holevolab.channels import holevo_quantity, make_channel, tensor_channels
from holevolab.solvers import ensemble_from_psi
from holevolab.states import random_state


def _directional_check(obj, param, seed):
    rng = np.random.default_rng(seed)
    z = param.random(rng)
    dz = param.random(rng)
    val = lambda zz: obj.value_grad(param.psi(zz), with_grad=False)[0]
    _, g = obj.value_grad(param.psi(z))
    analytic = float(np.sum((param.pullback(z, g).conj() * dz).real))
    eps = 1e-6
    numeric = (val(z + eps * dz) - val(z - eps * dz)) / (2 * eps)
    return analytic, numeric


@pytest.mark.parametrize("seed", range(3))
def test_free_param_gradient(seed):
    ch = make_channel("random", dim_in=2, dim_out=3, seed=seed)
    lin = np.array([[0.2, 0.1j], [-0.1j, -0.3]])
    obj = _optim.EnsembleObjective(2, (ch.kraus,), (ch.kraus,), 1.0, lin)
    analytic, numeric = _directional_check(obj, _optim.FreeParam(4, 2), seed)
    assert analytic == pytest.approx(numeric, rel=1e-5, abs=1e-7)


@pytest.mark.parametrize("factor", [0, 1])
def test_marginal_param_gradient(factor):
    joint = tensor_channels(make_channel("amplitude_damping", gamma=0.3), make_channel("depolarizing", p=0.2))
    obj = _optim.EnsembleObjective(4, (joint.kraus,), (joint.kraus,), 1.0)
    param = _optim.MarginalParam(random_state(2, None, 3), (2, 2), factor, 6)
    analytic, numeric = _directional_check(obj, param, 5)
    assert analytic == pytest.approx(numeric, rel=1e-5, abs=1e-7)


def test_marginal_param_fixes_the_marginal():
    rho = random_state(2, None, 9)
    param = _optim.MarginalParam(rho, (2, 3), 0, 4)
    psi = param.psi(param.random(np.random.default_rng(0)))
    sigma = psi.T @ psi.conj()
    assert np.allclose(_optim.marginal(sigma, (2, 3), 0), rho, atol=1e-12)


def test_objective_value_is_holevo_quantity():
    ch = make_channel("random", dim_in=2, dim_out=2, seed=4)
    obj = _optim.EnsembleObjective(2, (ch.kraus,), (ch.kraus,), 1.0)
    psi = _optim.FreeParam(3, 2).psi(_optim.FreeParam(3, 2).random(np.random.default_rng(2)))
    val, _ = obj.value_grad(psi)
    assert val == pytest.approx(holevo_quantity(ch, ensemble_from_psi(psi)), abs=1e-10)


def test_maximize_is_deterministic_per_seed():
    ch = make_channel("amplitude_damping", gamma=0.4)
    obj = _optim.EnsembleObjective(2, (ch.kraus,), (ch.kraus,), 1.0)
    a = _optim.maximize(obj, _optim.FreeParam(4, 2), 3, 11)
    b = _optim.maximize(obj, _optim.FreeParam(4, 2), 3, 11)
    assert a.value == b.value and np.array_equal(a.psi, b.psi)
