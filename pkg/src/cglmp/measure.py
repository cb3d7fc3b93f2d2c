"""Measurement unitaries: the SU(2)-block embedding and a full Givens factorization of U(d).

Outcome ``k`` of a measurement with unitary ``U`` is the projector onto
``U^dagger |k>``, i.e. the rows of ``U`` define the measured basis.

Conventions
-----------
The two-level block used in the analytic settings is

    B(zeta, phi) = [[cos z,  sin z e^{-i phi}],
                    [sin z e^{i phi},  -cos z]]

on levels {0, 1}, identity elsewhere. The plane rotation used by the
full parametrization is

    G_ij(t, p) = [[cos t, -sin t e^{-i p}],
                  [sin t e^{i p},  cos t]]

on levels {i, j}. The two are related by

    B(zeta, phi) = diag(1, -1, 1, ...) @ G_01(-zeta, phi)
                 = G_01(zeta, phi) @ diag(1, -1, 1, ...)

so the block is reached exactly by one rotation plus the diagonal phase
pi on level 1 (:func:`su2_block_to_full_params`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

UNITARY_TOL = 1e-12


def plane_pairs(d: int) -> list[tuple[int, int]]:
    """All (i, j) with 0 <= i < j < d in lexicographic order."""
    return [(i, j) for i in range(d) for j in range(i + 1, d)]


@dataclass(frozen=True)
class Su2BlockParams:
    zeta: float
    phi: float = 0.0


@dataclass(frozen=True)
class FullUnitaryParams:
    d: int
    givens: tuple  # ((i, j, angle, phase), ...) in lexicographic (i, j) order
    diag_phases: tuple

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("dimension must be at least 2")
        givens = tuple((int(i), int(j), float(t), float(p)) for i, j, t, p in self.givens)
        pairs = plane_pairs(self.d)
        if len(givens) != len(pairs):
            raise ValueError(f"d={self.d} needs {len(pairs)} plane rotations, got {len(givens)}")
        for (i, j, _, _), expected in zip(givens, pairs):
            if not (0 <= i < j < self.d):
                raise ValueError(f"plane ({i}, {j}) out of range for d={self.d}")
            if (i, j) != expected:
                raise ValueError(f"plane ({i}, {j}) out of lexicographic order, expected {expected}")
        diag = tuple(float(p) for p in self.diag_phases)
        if len(diag) != self.d:
            raise ValueError(f"d={self.d} needs {self.d} diagonal phases, got {len(diag)}")
        object.__setattr__(self, "givens", givens)
        object.__setattr__(self, "diag_phases", diag)

    @classmethod
    def identity(cls, d: int) -> "FullUnitaryParams":
        return cls(d, tuple((i, j, 0.0, 0.0) for i, j in plane_pairs(d)), (0.0,) * d)

    @classmethod
    def from_arrays(cls, d, angles, phases, diag_phases=None) -> "FullUnitaryParams":
        if diag_phases is None:
            diag_phases = np.zeros(d)
        givens = tuple((i, j, t, p) for (i, j), t, p in zip(plane_pairs(d), angles, phases))
        return cls(d, givens, tuple(diag_phases))

    @property
    def angles(self) -> np.ndarray:
        return np.array([g[2] for g in self.givens])

    @property
    def phases(self) -> np.ndarray:
        return np.array([g[3] for g in self.givens])


@dataclass(frozen=True)
class MeasurementUnitary:
    u: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError(f"unitary must be square, got shape {u.shape}")
        dev = verify_unitary(u)
        if dev > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary: max |u^dagger u - I| = {dev:.3e}")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def d(self) -> int:
        return self.u.shape[0]


def verify_unitary(m) -> float:
    """Max absolute entry of u^dagger u - I."""
    u = m.u if isinstance(m, MeasurementUnitary) else np.asarray(m, dtype=complex)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def su2_block_matrix(d: int, zeta: float, phi: float = 0.0) -> np.ndarray:
    if d < 2:
        raise ValueError("dimension must be at least 2")
    u = np.eye(d, dtype=complex)
    c, s = np.cos(zeta), np.sin(zeta)
    u[0, 0] = c
    u[0, 1] = s * np.exp(-1j * phi)
    u[1, 0] = s * np.exp(1j * phi)
    u[1, 1] = -c
    return u


def su2_block_unitary(d: int, p: Su2BlockParams) -> MeasurementUnitary:
    return MeasurementUnitary(su2_block_matrix(d, p.zeta, p.phi))


def givens_matrix(d: int, i: int, j: int, angle: float, phase: float) -> np.ndarray:
    g = np.eye(d, dtype=complex)
    c, s = np.cos(angle), np.sin(angle)
    g[i, i] = c
    g[i, j] = -s * np.exp(-1j * phase)
    g[j, i] = s * np.exp(1j * phase)
    g[j, j] = c
    return g


def givens_product(angles: np.ndarray, phases: np.ndarray, d: int) -> np.ndarray:
    """Batched G_01 @ G_02 @ ... @ G_{d-2,d-1} for leading batch axes.

    ``angles`` and ``phases`` have shape ``(..., d(d-1)/2)``; the result has
    shape ``(..., d, d)``. Each rotation is applied as a two-column update
    rather than a full matrix product.
    """
    angles = np.asarray(angles, dtype=float)
    phases = np.asarray(phases, dtype=float)
    batch = angles.shape[:-1]
    u = np.broadcast_to(np.eye(d, dtype=complex), batch + (d, d)).copy()
    c = np.cos(angles)
    s = np.sin(angles)
    e = np.exp(1j * phases)
    for n, (i, j) in enumerate(plane_pairs(d)):
        ci = u[..., :, i].copy()
        cj = u[..., :, j]
        cn = c[..., n, None]
        sn = s[..., n, None]
        en = e[..., n, None]
        u[..., :, i] = cn * ci + sn * en * cj
        u[..., :, j] = -sn * en.conj() * ci + cn * cj
    return u


def full_unitary(p: FullUnitaryParams) -> MeasurementUnitary:
    """u = diag(e^{i phi_k}) @ prod_{(i,j) lexicographic} G_ij(angle, phase)."""
    u = givens_product(p.angles, p.phases, p.d)
    u = np.exp(1j * np.asarray(p.diag_phases))[:, None] * u
    return MeasurementUnitary(u)


def su2_block_to_full_params(d: int, p: Su2BlockParams) -> FullUnitaryParams:
    """Full parameters reproducing ``su2_block_unitary(d, p)`` exactly."""
    givens = [(i, j, 0.0, 0.0) for i, j in plane_pairs(d)]
    givens[0] = (0, 1, -p.zeta, p.phi)
    diag = [0.0] * d
    diag[1] = np.pi
    return FullUnitaryParams(d, tuple(givens), tuple(diag))


def full_params_to_su2_block(p: FullUnitaryParams) -> Su2BlockParams:
    """Inverse of :func:`su2_block_to_full_params` for parameters of that form."""
    i, j, angle, phase = p.givens[0]
    rest = np.array([g[2] for g in p.givens[1:]])
    diag = np.asarray(p.diag_phases)
    expected = np.zeros(p.d)
    expected[1] = np.pi
    if np.any(np.abs(rest) > 1e-14) or np.any(np.abs(np.angle(np.exp(1j * (diag - expected)))) > 1e-14):
        raise ValueError("parameters do not describe a two-level block")
    return Su2BlockParams(-angle, phase)


def random_full_params(d: int, rng: np.random.Generator) -> FullUnitaryParams:
    npairs = d * (d - 1) // 2
    return FullUnitaryParams.from_arrays(
        d,
        rng.uniform(0.0, np.pi, npairs),
        rng.uniform(0.0, 2 * np.pi, npairs),
        rng.uniform(0.0, 2 * np.pi, d),
    )


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def fit_full_params(
    target: np.ndarray,
    rng: np.random.Generator,
    starts: int = 20,
    tol: float = 1e-6,
) -> tuple[FullUnitaryParams, float]:
    """Search the Givens parametrization for a unitary equal to ``target``.

    Returns the best parameters and their Frobenius distance to the target.
    Stops at the first start that gets below ``tol``.
    """
    target = np.asarray(target, dtype=complex)
    d = target.shape[0]
    npairs = d * (d - 1) // 2

    def unpack(x):
        return FullUnitaryParams.from_arrays(d, x[:npairs], x[npairs : 2 * npairs], x[2 * npairs :])

    def residual(x):
        diff = (full_unitary(unpack(x)).u - target).ravel()
        return np.concatenate([diff.real, diff.imag])

    best = None
    for _ in range(starts):
        x0 = np.concatenate(
            [rng.uniform(0, np.pi, npairs), rng.uniform(0, 2 * np.pi, npairs), rng.uniform(0, 2 * np.pi, d)]
        )
        res = least_squares(residual, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        dist = float(np.linalg.norm(residual(res.x)))
        if best is None or dist < best[1]:
            best = (unpack(res.x), dist)
        if dist < tol:
            break
    return best


def as_matrix(u) -> np.ndarray:
    return u.u if isinstance(u, MeasurementUnitary) else np.asarray(u, dtype=complex)


def stack_settings(us: Sequence) -> np.ndarray:
    return np.stack([as_matrix(u) for u in us])
