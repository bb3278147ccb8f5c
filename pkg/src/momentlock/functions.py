"""Named scalar functions shared by the CLI, moment specs and experiments."""

import numpy as np

REGISTRY = {
    "exp_x": np.exp,
    "x_9_2": lambda x: np.power(x, 4.5),
    "inv_1px": lambda x: 1.0 / (1.0 + x),
    "sin_pi_x": lambda x: np.sin(np.pi * x),
    "log_1px": np.log1p,
}

# Integrals over [0, 1], i.e. expectations under the uniform density.
UNIFORM_EXACT = {
    "exp_x": np.e - 1.0,
    "x_9_2": 2.0 / 11.0,
    "inv_1px": np.log(2.0),
    "sin_pi_x": 2.0 / np.pi,
    "log_1px": 2.0 * np.log(2.0) - 1.0,
}


def lookup(name: str):
    from .errors import ConfigError

    try:
        return REGISTRY[name]
    except KeyError:
        raise ConfigError(
            f"unknown function {name!r}; choose from {', '.join(REGISTRY)}"
        ) from None
