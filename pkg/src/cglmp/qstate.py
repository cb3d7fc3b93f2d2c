"""Pure two-qudit states and the Schmidt-angle parametrizations used to build them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

NORM_TOL = 1e-12
KAPPA_NORM_TOL = 1e-9
RANK_TOL = 1e-9


@dataclass(frozen=True)
class PureTwoQuditState:
    """Normalized vector in C^d (x) C^d stored as its d x d amplitude matrix.

    ``amps[j, k]`` is the coefficient of ``|j>|k>``.
    """

    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.ndim != 2 or amps.shape[0] != amps.shape[1]:
            raise ValueError(f"amplitude matrix must be square, got shape {amps.shape}")
        if amps.shape[0] < 2:
            raise ValueError("dimension must be at least 2")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: sum |amps|^2 = {norm2!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def d(self) -> int:
        return self.amps.shape[0]

    def vector(self) -> np.ndarray:
        """Flattened state vector in the |j>|k> product-basis order (index j*d + k)."""
        return self.amps.reshape(-1).copy()

    @classmethod
    def from_vector(cls, psi: Sequence[complex], d: int | None = None) -> "PureTwoQuditState":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        if d is None:
            d = int(round(np.sqrt(psi.size)))
        if d * d != psi.size:
            raise ValueError(f"vector of length {psi.size} is not a two-qudit state")
        return cls(psi.reshape(d, d))


@dataclass(frozen=True)
class SchmidtAngles:
    """Hyperspherical angles theta_1 ... theta_{d-1} of the diagonal Schmidt state."""

    d: int
    theta: tuple = field(default=())

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("dimension must be at least 2")
        theta = tuple(float(t) for t in self.theta)
        if len(theta) != self.d - 1:
            raise ValueError(f"d={self.d} needs {self.d - 1} angles, got {len(theta)}")
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class QutritBetaXi:
    beta: float
    xi: float


def kappa_from_schmidt_angles(angles: SchmidtAngles) -> np.ndarray:
    """Expand the angle chain into the d Schmidt coefficients kappa_0 ... kappa_{d-1}.

    kappa_0 = cos t2 cos t1, kappa_1 = cos t2 sin t1 (d = 2: cos t1, sin t1);
    kappa_2 = sin t2 * prod_{j=3}^{d-1} sin tj and, for m = 3 ... d-1,
    kappa_m = sin t2 * cos t_{d+2-m} * prod_{j=3}^{d+1-m} sin tj.
    """
    d = angles.d
    t = (None,) + angles.theta  # 1-based: t[1] ... t[d-1]
    if d == 2:
        return np.array([np.cos(t[1]), np.sin(t[1])])
    kappa = np.empty(d)
    kappa[0] = np.cos(t[2]) * np.cos(t[1])
    kappa[1] = np.cos(t[2]) * np.sin(t[1])
    s2 = np.sin(t[2])
    kappa[2] = s2 * np.prod([np.sin(t[j]) for j in range(3, d)])
    for m in range(3, d):
        chain = np.prod([np.sin(t[j]) for j in range(3, d + 2 - m)])
        kappa[m] = s2 * np.cos(t[d + 2 - m]) * chain
    return kappa


def schmidt_angles_from_kappa(kappa: Sequence[float]) -> SchmidtAngles:
    """Invert :func:`kappa_from_schmidt_angles` for nonnegative coefficients.

    Angles land in [0, pi/2]. Angles left undetermined by a vanishing
    chain come out as 0.
    """
    kappa = np.abs(np.asarray(kappa, dtype=float))
    d = kappa.size
    if d < 2:
        raise ValueError("need at least two coefficients")
    theta = np.zeros(d)  # 1-based, theta[0] unused
    theta[1] = np.arctan2(kappa[1], kappa[0])
    if d == 2:
        return SchmidtAngles(2, tuple(theta[1:2]))
    head = np.hypot(kappa[0], kappa[1])
    tail = np.sqrt(np.sum(kappa[2:] ** 2))
    theta[2] = np.arctan2(tail, head)
    # peel the chain from kappa_{d-1} = sin t2 cos t3 downward
    for j in range(3, d):
        m = d + 2 - j
        rest = np.sqrt(np.sum(kappa[2:m] ** 2))
        theta[j] = np.arctan2(rest, kappa[m])
    return SchmidtAngles(d, tuple(theta[1:]))


def state_from_kappa(kappa: Sequence[float]) -> PureTwoQuditState:
    """Diagonal Schmidt-form state sum_m kappa_m |mm>."""
    kappa = np.asarray(kappa, dtype=float)
    if kappa.ndim != 1 or kappa.size < 2:
        raise ValueError("kappa must be a vector of length >= 2")
    norm2 = float(np.sum(kappa**2))
    if abs(norm2 - 1.0) > KAPPA_NORM_TOL:
        raise ValueError(f"Schmidt coefficients are not normalized: sum kappa^2 = {norm2!r}")
    # absorb residual float error so the stricter state invariant holds
    return PureTwoQuditState(np.diag(kappa / np.sqrt(norm2)).astype(complex))


def state_from_schmidt(angles: SchmidtAngles) -> PureTwoQuditState:
    return PureTwoQuditState(np.diag(kappa_from_schmidt_angles(angles)).astype(complex))


def kappa_from_beta_xi(p: QutritBetaXi) -> np.ndarray:
    """Qutrit coefficients (sin b cos x, sin b sin x, cos b)."""
    sb = np.sin(p.beta)
    return np.array([sb * np.cos(p.xi), sb * np.sin(p.xi), np.cos(p.beta)])


def schmidt_coefficients(state: PureTwoQuditState) -> np.ndarray:
    """Singular values of the amplitude matrix, descending."""
    return np.linalg.svd(state.amps, compute_uv=False)


def schmidt_rank(state: PureTwoQuditState, tol: float = RANK_TOL) -> int:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return int(np.sum(schmidt_coefficients(state) > tol))


def is_entangled(state: PureTwoQuditState, tol: float = RANK_TOL) -> bool:
    return schmidt_rank(state, tol) > 1


def canonical_order(kappa: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Sort |kappa| descending so the two largest coefficients sit on levels 0 and 1.

    Returns ``(sorted_kappa, perm)`` with ``sorted_kappa = |kappa|[perm]``.
    The sort is stable, so ties keep their input order.
    """
    mags = np.abs(np.asarray(kappa, dtype=float))
    perm = np.argsort(-mags, kind="stable")
    return mags[perm], perm


def sample_schmidt_kappa(d: int, rng: np.random.Generator) -> np.ndarray:
    """Draw kappa with kappa^2 uniform on the probability simplex."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return np.sqrt(rng.dirichlet(np.ones(d)))


def random_pure_state(d: int, rng: np.random.Generator) -> PureTwoQuditState:
    """Haar-random pure state of two qudits (not in Schmidt form)."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return PureTwoQuditState(z / np.linalg.norm(z))
