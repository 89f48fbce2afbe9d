"""Shared manufactured fields and acceptance reporting hooks."""

import numpy as np

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def bump(t):
    return t ** 2 * (1 - t) ** 2


def bump1(t):
    return 2 * t - 6 * t ** 2 + 4 * t ** 3


def bump2(t):
    return 2 - 12 * t + 12 * t ** 2


def bump3(t):
    return -12 + 24 * t


def manufactured_u(p):
    """Clamped-square test deflection (x(1-x)y(1-y))^2."""
    return bump(p[:, 0]) * bump(p[:, 1])


def manufactured_grad(p):
    return np.stack([bump1(p[:, 0]) * bump(p[:, 1]),
                     bump(p[:, 0]) * bump1(p[:, 1])], axis=1)


def manufactured_M(p):
    """Moment -Hessian(u) of the manufactured deflection (identity law)."""
    out = np.empty((len(p), 2, 2))
    out[:, 0, 0] = -bump2(p[:, 0]) * bump(p[:, 1])
    out[:, 0, 1] = out[:, 1, 0] = -bump1(p[:, 0]) * bump1(p[:, 1])
    out[:, 1, 1] = -bump(p[:, 0]) * bump2(p[:, 1])
    return out


def manufactured_divM(p):
    return np.stack(
        [-bump3(p[:, 0]) * bump(p[:, 1]) - bump1(p[:, 0]) * bump2(p[:, 1]),
         -bump2(p[:, 0]) * bump1(p[:, 1]) - bump(p[:, 0]) * bump3(p[:, 1])],
        axis=1)


def manufactured_f(p):
    """divdiv(Hessian u) of the manufactured deflection."""
    return (24 * bump(p[:, 1]) + 2 * bump2(p[:, 0]) * bump2(p[:, 1])
            + 24 * bump(p[:, 0]))


def smooth_tensor(p):
    """A generic smooth symmetric tensor field for trace tests."""
    out = np.empty((len(p), 2, 2))
    out[:, 0, 0] = 1 + p[:, 0] ** 2 + 0.3 * p[:, 1]
    out[:, 0, 1] = out[:, 1, 0] = p[:, 0] * p[:, 1] - 0.2
    out[:, 1, 1] = 2 - p[:, 1] ** 2
    return out


def smooth_tensor_div(p):
    return np.stack([3 * p[:, 0], -p[:, 1]], axis=1)


def random_shape_regular_triangle(rng):
    base = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    tri = base + 0.15 * rng.uniform(-1, 1, size=(3, 2))
    return tri * 10.0 ** rng.uniform(-2, 2)
