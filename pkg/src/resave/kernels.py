"""Compactly supported smoothing kernels.

Two kernels are provided: the Epanechnikov kernel (second order) and a
fourth-order polynomial kernel, both supported on [-1, 1].  The fourth-order
one integrates to 1 with vanishing second moment, at the price of going
negative on part of its support — density estimates built from it can dip
below zero, which is why the ratio stage floors the density before dividing.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class Kernel:
    name: str
    support_radius: float
    profile: Callable[[np.ndarray], np.ndarray]  # evaluated only inside the support


def _epanechnikov_profile(u):
    return 0.75 * (1.0 - u * u)


def _quartic4_profile(u):
    uu = u * u
    return (15.0 / 32.0) * (1.0 - uu) * (3.0 - 7.0 * uu)


EPANECHNIKOV = Kernel("epanechnikov", 1.0, _epanechnikov_profile)
QUARTIC4 = Kernel("quartic4", 1.0, _quartic4_profile)

KERNELS = {k.name: k for k in (EPANECHNIKOV, QUARTIC4)}


def kernel_by_name(name):
    try:
        return KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}") from None


def evaluate(kernel, u):
    """K(u), vectorized; exactly zero outside the support."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) <= kernel.support_radius
    vals = np.where(inside, kernel.profile(np.where(inside, u, 0.0)), 0.0)
    return vals if vals.ndim else float(vals)


def moment(kernel, s, squared=False):
    """integral of u^s K(u) du (or u^s K(u)^2 du) over the support.

    Adaptive quadrature, absolute error below 1e-10.
    """
    if not (0 <= s <= 8) or int(s) != s:
        raise ValueError(f"moment order must be an integer in [0, 8], got {s}")
    r = kernel.support_radius

    def f(u):
        k = evaluate(kernel, u)
        return u**s * (k * k if squared else k)

    val, err = integrate.quad(f, -r, r, epsabs=1e-12, epsrel=1e-12, limit=200)
    if err > 1e-10:
        raise ArithmeticError(f"quadrature error {err} above tolerance for moment s={s}")
    return val
