import numpy as np


def flat(grads):
    return np.concatenate([g.ravel() for g in grads])


def numeric_grad(net, loss_fn, h=1e-5):
    """Central differences of ``loss_fn()`` w.r.t. every parameter of ``net``."""
    theta = net.get_flat()
    out = np.empty_like(theta)
    for i in range(theta.size):
        t = theta.copy()
        t[i] += h
        net.set_flat(t)
        up = loss_fn()
        t[i] -= 2 * h
        net.set_flat(t)
        down = loss_fn()
        out[i] = (up - down) / (2 * h)
    net.set_flat(theta)
    return out


def relative_error(analytic, numeric) -> float:
    return float(np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12))


# acceptance verdicts, echoed again in the terminal summary so they survive output capture
VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
