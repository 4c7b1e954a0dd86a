"""Central finite-difference gradient checks for :class:`DenseNet`."""
import numpy as np


def numeric_param_grads(net, x, grad_out, h=1e-5):
    """Finite-difference gradient of ``sum(grad_out * net(x))`` for every parameter."""
    grads = []
    for p in net.params():
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            old = p[idx]
            p[idx] = old + h
            up = np.sum(grad_out * net(x))
            p[idx] = old - h
            down = np.sum(grad_out * net(x))
            p[idx] = old
            g[idx] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def numeric_input_grad(net, x, grad_out, h=1e-5):
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        old = x[idx]
        x[idx] = old + h
        up = np.sum(grad_out * net(x))
        x[idx] = old - h
        down = np.sum(grad_out * net(x))
        x[idx] = old
        g[idx] = (up - down) / (2 * h)
    return g


def max_relative_error(analytic, numeric, floor=1e-8):
    """Largest ``|a - n| / max(|a| + |n|, floor)`` over a list of arrays."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        err = np.abs(a - n) / np.maximum(np.abs(a) + np.abs(n), floor)
        worst = max(worst, float(err.max(initial=0.0)))
    return worst


def check_gradients(net, x, grad_out, h=1e-5):
    """Max relative error between analytic and numeric gradients (params and input)."""
    _, cache = net.forward(x)
    pgrads, ginput = net.backward(cache, grad_out)
    num_p = numeric_param_grads(net, x, grad_out, h)
    num_x = numeric_input_grad(net, x, grad_out, h)
    return max_relative_error(pgrads + [ginput], num_p + [num_x])
