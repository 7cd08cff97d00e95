import numpy as np
import pytest

from conftest import flat, numeric_grad, relative_error
from wsn_track.agents.nn import Mlp, mlp_backward, mlp_forward


def test_zero_weights_give_zero_output():
    net = Mlp((9, 64, 64, 5))
    x = np.random.default_rng(0).standard_normal((4, 9))
    np.testing.assert_array_equal(mlp_forward(net, x), np.zeros((4, 5)))


def test_init_scale():
    net = Mlp((9, 64, 64, 5), np.random.default_rng(0), scale=0.5)
    for W in net.W:
        assert np.abs(W).max() <= 0.5 / np.sqrt(W.shape[0])
        assert np.abs(W).max() > 0.4 / np.sqrt(W.shape[0])
    assert all(np.all(b == 0) for b in net.b)


def test_output_is_continuous_in_weights():
    net = Mlp((3, 6, 2), np.random.default_rng(1))
    x = np.random.default_rng(2).standard_normal((5, 3))
    y0 = net(x)
    for delta in (1e-3, 1e-5, 1e-7):
        net.W[0][1, 2] += delta
        change = np.abs(net(x) - y0).max()
        net.W[0][1, 2] -= delta
        assert change <= 10 * delta


def test_zero_output_gradient_gives_zero_weight_gradients():
    net = Mlp((3, 6, 2), np.random.default_rng(1))
    x = np.ones((2, 3))
    for g in mlp_backward(net, x, np.zeros((2, 2))):
        assert not g.any()


def test_single_linear_layer_squared_loss():
    rng = np.random.default_rng(3)
    net = Mlp((4, 1), rng)
    x = rng.standard_normal((1, 4))
    target = 0.7
    pred = net(x)[0, 0]
    gW, gb = mlp_backward(net, x, np.array([[2 * (pred - target)]]))
    np.testing.assert_allclose(gW[:, 0], 2 * (pred - target) * x[0], rtol=1e-14)
    assert gb[0] == pytest.approx(2 * (pred - target))


@pytest.mark.parametrize("sizes", [(3, 6, 5, 2), (4, 8, 1), (2, 5, 5, 5, 3)])
def test_gradient_matches_finite_differences(sizes):
    rng = np.random.default_rng(sum(sizes))
    net = Mlp(sizes, rng, scale=2.0)
    assert net.n_params <= 200
    x = rng.standard_normal((7, sizes[0]))
    c = rng.standard_normal((7, sizes[-1]))
    loss = lambda: float(np.sum(c * net(x)) + 0.5 * np.sum(net(x) ** 2))
    y, cache = net.forward(x)
    grads, g_in = net.backward(cache, c + y)
    assert relative_error(flat(grads), numeric_grad(net, loss)) < 1e-4
    # input gradient too
    eps = 1e-5
    num_in = np.zeros_like(x)
    for i in np.ndindex(x.shape):
        x[i] += eps
        up = loss()
        x[i] -= 2 * eps
        down = loss()
        x[i] += eps
        num_in[i] = (up - down) / (2 * eps)
    assert relative_error(g_in, num_in) < 1e-4


def test_flat_round_trip_and_soft_update():
    rng = np.random.default_rng(4)
    a, b = Mlp((3, 4, 2), rng), Mlp((3, 4, 2), rng)
    theta = a.get_flat()
    a.set_flat(theta * 2)
    np.testing.assert_array_equal(a.get_flat(), theta * 2)
    c = b.clone()
    c.soft_update(a, 1.0)
    np.testing.assert_array_equal(c.get_flat(), a.get_flat())
    c = b.clone()
    c.soft_update(a, 0.0)
    np.testing.assert_array_equal(c.get_flat(), b.get_flat())


def test_soft_update_scalar_example():
    online, target = Mlp((1, 1)), Mlp((1, 1))
    online.W[0][0, 0], target.W[0][0, 0] = 1.0, 0.0
    target.soft_update(online, 0.01)
    assert target.W[0][0, 0] == pytest.approx(0.01)
