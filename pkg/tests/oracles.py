"""Closed-form trajectory oracles for the example systems.

Each oracle returns exact (up to floating point) solution points of the
underlying inclusion, used to check outer soundness of the box maps.
All are vectorized over initial conditions.
"""

from __future__ import annotations

import numpy as np


def switching_flow(x0: np.ndarray, t: float, dwell: np.ndarray | None = None) -> np.ndarray:
    """Solutions of the 1-D switching field on [-1, 1].

    The field is 0 for x < 0 and 1 - x for x > 0, with F(0) = [0, 1].
    For x0 < 0 the point is frozen; for x0 > 0 the flow is
    x(t) = 1 - (1 - x0) e^{-t}.  From x0 = 0 a solution may rest at 0
    for any dwell time s in [0, t] before following the 1 - x branch;
    `dwell` selects that time per sample (default: leave immediately).
    """
    x0 = np.asarray(x0, dtype=float)
    out = np.where(x0 < 0, x0, 1.0 - (1.0 - x0) * np.exp(-t))
    if dwell is not None:
        rest = np.clip(np.asarray(dwell, dtype=float), 0.0, t)
        from_zero = 1.0 - np.exp(-(t - rest))
        out = np.where(x0 == 0.0, from_zero, out)
    return out


def drift_flow(x0: np.ndarray, t: float) -> np.ndarray:
    """Unit-drift translation; valid while x0 + t stays inside [0, 1]."""
    return np.asarray(x0, dtype=float) + t


def quadratic_flow(x0: np.ndarray, t: float, lam: float) -> np.ndarray:
    """Solutions of x' = x^2 + lam.

    lam = 0: x(t) = x0 / (1 - x0 t); lam > 0: sqrt(lam) tan(atan(x0/sqrt(lam)) + sqrt(lam) t).
    Blow-up (finite escape) yields inf; callers must restrict to samples
    that stay in the domain.
    """
    x0 = np.asarray(x0, dtype=float)
    if lam == 0.0:
        denom = 1.0 - x0 * t
        with np.errstate(divide="ignore"):
            out = np.where(denom > 0, x0 / np.where(denom > 0, denom, 1.0), np.inf)
        return out
    if lam < 0:
        raise ValueError("oracle covers lam >= 0 only")
    s = np.sqrt(lam)
    phase = np.arctan2(x0, s) + s * t
    out = np.where(np.abs(phase) < np.pi / 2, s * np.tan(np.clip(phase, -1.5707, 1.5707)), np.inf)
    return out


def circle_flow(xy0: np.ndarray, t: float, lam: float) -> np.ndarray:
    """Solutions of the planar family r' = r(1 + lam - r^2), theta' = 1.

    Closed form in u = r^2 (logistic):
    u(t) = (1+lam) u0 e^{2(1+lam)t} / ((1+lam) + u0 (e^{2(1+lam)t} - 1)).
    """
    xy0 = np.asarray(xy0, dtype=float)
    mu = 1.0 + lam
    u0 = (xy0 ** 2).sum(axis=-1)
    growth = np.exp(2.0 * mu * t)
    u = mu * u0 * growth / (mu + u0 * (growth - 1.0))
    r = np.sqrt(u)
    theta = np.arctan2(xy0[..., 1], xy0[..., 0]) + t
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)


def circle_stays_inside(xy0: np.ndarray, t: float, lam: float, box_half: float = 1.5,
                        nchecks: int = 64) -> np.ndarray:
    """Mask of samples whose exact trajectory stays in the square over [0, t]."""
    xy0 = np.asarray(xy0, dtype=float)
    ok = np.ones(xy0.shape[0], dtype=bool)
    for s in np.linspace(0.0, t, nchecks):
        p = circle_flow(xy0, float(s), lam)
        ok &= (np.abs(p) <= box_half).all(axis=-1)
    return ok
