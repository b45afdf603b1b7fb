"""Named analytic initial vorticity profiles (module-level so they pickle)."""

from __future__ import annotations

import numpy as np

__all__ = ["FAMILIES", "family", "gaussian", "odd_gaussian", "sech_cubed", "bump"]


def gaussian(y):
    return np.exp(-np.asarray(y, dtype=float) ** 2)


def odd_gaussian(y):
    y = np.asarray(y, dtype=float)
    return np.sinh(y) * np.exp(-y * y)


def sech_cubed(y):
    return 2.0 / np.cosh(np.asarray(y, dtype=float)) ** 3


def bump(y):
    y = np.asarray(y, dtype=float)
    return np.exp(-2.0 * (y - 0.5) ** 2)


FAMILIES = {"gaussian": gaussian, "odd_gaussian": odd_gaussian, "sech_cubed": sech_cubed, "bump": bump}


def family(name: str):
    try:
        return FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown initial-data family {name!r}; choose from {sorted(FAMILIES)}") from None
