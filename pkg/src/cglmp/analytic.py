"""Closed-form CGLMP values for the two-level-block settings, their maxima, and the qutrit fit.

The restricted settings fix Alice's blocks at zeta_1 = 0, zeta_2 = pi/4 and all
phases at 0, leaving Bob's angles eta_1, eta_2 free. The state is the diagonal
Schmidt state with angles theta_1, theta_2 (and further angles that drop out).

For d >= 4 two expressions are provided:

* :func:`id_closed_form` / :func:`restricted_bound` reproduce the published
  d >= 4 formula. It is d-independent and agrees with the CGLMP expression
  only if the k = 1 weight 1 - 2/(d-1) is replaced by 1 (its d -> infinity
  limit).
* :func:`restricted_value` / :func:`restricted_max` carry that weight,
  w = (d-3)/(d-1), and match the numerical pipeline exactly:

      I_d = 1/4 [2(1 + w) + (3 - w) J] cos^2 t2 + 2 sin^2 t2,
      J   = cos 2e1 - sin 2t1 sin 2e1 + cos 2e2 + sin 2t1 sin 2e2.

  w = 0 recovers the qutrit formula. Since (3 - w) > 0, both are maximized
  at the same eta, and restricted_max >= restricted_bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bell import SettingsQuad
from .measure import su2_block_matrix

ZETA1 = 0.0
ZETA2 = np.pi / 4

# published fit coefficients for the qutrit curves
_ROUGH_C0 = 0.5491
_ROUGH_C1, _ROUGH_P1 = 0.9344, 2.3682
_ROUGH_C2, _ROUGH_P2 = 2.5871, -0.031
_ROUGH_C3, _ROUGH_P3, _ROUGH_Q3 = 2.0636, 2.6375, -0.6455


@dataclass(frozen=True)
class RestrictedSetting:
    eta1: float
    eta2: float

    def settings(self, d: int) -> SettingsQuad:
        return SettingsQuad(
            su2_block_matrix(d, ZETA1, 0.0),
            su2_block_matrix(d, ZETA2, 0.0),
            su2_block_matrix(d, self.eta1, 0.0),
            su2_block_matrix(d, self.eta2, 0.0),
        )


def _two_level_part(theta1, eta1, eta2):
    s = np.sin(2 * theta1)
    return np.cos(2 * eta1) - s * np.sin(2 * eta1) + np.cos(2 * eta2) + s * np.sin(2 * eta2)


def i2_closed_form(theta1, eta1, eta2):
    return _two_level_part(theta1, eta1, eta2)


def i3_closed_form(theta1, theta2, eta1, eta2):
    # last trigonometric factor taken as sin 2*eta2 (the printed "sin eta2" breaks the stated bound)
    j = _two_level_part(theta1, eta1, eta2)
    return 0.25 * (2 + 3 * j) * np.cos(theta2) ** 2 + 2 * np.sin(theta2) ** 2


def id_closed_form(theta1, theta2, eta1, eta2, d: int = 4):
    """Published d >= 4 expression, verbatim; ``d`` does not enter."""
    if d < 4:
        raise ValueError("the d >= 4 expression needs d >= 4")
    j = _two_level_part(theta1, eta1, eta2)
    return 0.5 * (2 + j) * np.cos(theta2) ** 2 + 2 * np.sin(theta2) ** 2


def k1_weight(d: int) -> float:
    """Weight 1 - 2k/(d-1) of the k = 1 terms; zero for d <= 3."""
    return 0.0 if d <= 3 else (d - 3) / (d - 1)


def restricted_value(theta1, theta2, eta1, eta2, d: int):
    """Exact CGLMP value at the restricted settings for any d >= 2."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if d == 2:
        return i2_closed_form(theta1, eta1, eta2)
    w = k1_weight(d)
    j = _two_level_part(theta1, eta1, eta2)
    return 0.25 * (2 * (1 + w) + (3 - w) * j) * np.cos(theta2) ** 2 + 2 * np.sin(theta2) ** 2


def restricted_bound(theta1, theta2, d: int):
    """Published per-d maximum over (eta1, eta2); ``theta2`` is ignored for d = 2."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    r = np.sqrt(1 + np.sin(2 * theta1) ** 2)
    if d == 2:
        return 2 * r
    c2, s2 = np.cos(theta2) ** 2, np.sin(theta2) ** 2
    if d == 3:
        return 0.5 * (1 + 3 * r) * c2 + 2 * s2
    return (1 + r) * c2 + 2 * s2


def restricted_max(theta1, theta2, d: int):
    """Exact maximum of :func:`restricted_value` over (eta1, eta2)."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    r = np.sqrt(1 + np.sin(2 * theta1) ** 2)
    if d == 2:
        return 2 * r
    w = k1_weight(d)
    return 0.25 * (2 * (1 + w) + (3 - w) * 2 * r) * np.cos(theta2) ** 2 + 2 * np.sin(theta2) ** 2


def optimal_eta(theta1) -> tuple[float, float]:
    """Stationary point of the closed forms: tan 2*eta1 = -sin 2*theta1, eta2 = -eta1."""
    half = 0.5 * np.arctan(np.sin(2 * theta1))
    return -half, half


def literal_eta(theta1) -> tuple[float, float]:
    """eta1 = -eta2 = -arctan(sin 2*theta1), as printed; not a maximizer in general."""
    full = np.arctan(np.sin(2 * theta1))
    return -full, full


def rough_invariants(k0, k1, k2) -> tuple[float, float]:
    """Power sums (sum kappa^4, sum kappa^6)."""
    k = np.array([k0, k1, k2], dtype=float)
    return float(np.sum(k**4)), float(np.sum(k**6))


def empirical_i3_rough(k0, k1, k2) -> float:
    """Published empirical fit of the qutrit violation curves."""
    norm2 = k0**2 + k1**2 + k2**2
    if abs(norm2 - 1.0) > 1e-9:
        raise ValueError(f"Schmidt coefficients are not normalized: sum kappa^2 = {norm2!r}")
    p4, p6 = rough_invariants(k0, k1, k2)
    return (
        _ROUGH_C0
        + _ROUGH_C1 * p4**_ROUGH_P1
        + _ROUGH_C2 * p6**_ROUGH_P2
        - _ROUGH_C3 * p4**_ROUGH_P3 * p6**_ROUGH_Q3
    )
