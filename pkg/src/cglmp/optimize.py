"""Maximization of the CGLMP value over measurement settings, Gisin scans and the qutrit sweep."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import analytic
from .bell import Functional, SettingsQuad, functional_weights
from .measure import FullUnitaryParams, givens_product
from .qstate import (
    PureTwoQuditState,
    QutritBetaXi,
    SchmidtAngles,
    canonical_order,
    kappa_from_beta_xi,
    kappa_from_schmidt_angles,
    sample_schmidt_kappa,
    schmidt_angles_from_kappa,
    schmidt_rank,
    state_from_kappa,
)

LOCAL_BOUND = 2.0
VIOLATION_TOL = 1e-9
MAX_FULL_DIM = 8
MAX_SCAN_DIM = 6

FIG1_BETAS = (np.pi / 12, np.pi / 6, np.pi / 4, np.pi / 3, 5 * np.pi / 12, np.pi / 2)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 20
    max_iters: int = 20000
    tol: float = 1e-12
    xtol: float = 1e-7
    seed: int = 0
    simplex_scale: float = 0.5
    threads: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.tol > 0 and self.xtol > 0):
            raise ValueError("tolerances must be positive")
        if not self.simplex_scale > 0:
            raise ValueError("simplex_scale must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.threads < 0:
            raise ValueError("threads must be >= 0")


@dataclass
class ViolationResult:
    best_value: float
    best_params: object
    settings: SettingsQuad
    violated: bool
    margin: float
    trace: list = field(default_factory=list)
    permutation: tuple = ()
    published_bound: float | None = None


def resolve_threads(threads: int) -> int:
    """0 means one worker per CPU."""
    if threads == 0:
        threads = os.cpu_count() or 1
    return max(threads, 1)


def _pmap(fn, tasks: list, threads: int) -> list:
    threads = resolve_threads(threads)
    if threads == 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def _is_violation(value: float) -> bool:
    return value > LOCAL_BOUND + VIOLATION_TOL


# ---------------------------------------------------------------- restricted


def _restricted_from_kappa(kappa: np.ndarray) -> ViolationResult:
    kappa = np.asarray(kappa, dtype=float)
    d = kappa.size
    sorted_kappa, perm = canonical_order(kappa)
    angles = schmidt_angles_from_kappa(sorted_kappa)
    theta1 = angles.theta[0]
    theta2 = angles.theta[1] if d > 2 else 0.0
    value = float(analytic.restricted_max(theta1, theta2, d))
    eta = analytic.RestrictedSetting(*analytic.optimal_eta(theta1))

    # canonical frame -> input frame: diag(kappa) = S Q^T diag(sorted) Q
    q = np.zeros((d, d))
    q[np.arange(d), perm] = 1.0
    signs = np.where(kappa < 0, -1.0, 1.0)
    canon = eta.settings(d)
    settings = SettingsQuad(
        canon.uA1 @ q * signs,
        canon.uA2 @ q * signs,
        canon.uB1 @ q,
        canon.uB2 @ q,
    )
    return ViolationResult(
        best_value=value,
        best_params=eta,
        settings=settings,
        violated=_is_violation(value),
        margin=value - LOCAL_BOUND,
        permutation=tuple(int(p) for p in perm),
        published_bound=float(analytic.restricted_bound(theta1, theta2, d)),
    )


def maximize_restricted(angles: SchmidtAngles) -> ViolationResult:
    """Closed-form optimum over the two-level-block settings.

    Coefficients are first sorted so the two largest occupy levels 0 and 1;
    ``permutation`` records the order and ``settings`` act on the input state.
    ``best_value`` is the exact CGLMP value at those settings; ``published_bound``
    is the published bound, equal for d <= 3 and never larger for d >= 4.
    """
    return _restricted_from_kappa(kappa_from_schmidt_angles(angles))


def maximize_restricted_kappa(kappa: Sequence[float]) -> ViolationResult:
    return _restricted_from_kappa(np.asarray(kappa, dtype=float))


# ---------------------------------------------------------------------- full


def n_params(d: int) -> int:
    """Length of the search vector: 4 unitaries x (angle, phase) per plane."""
    return 4 * d * (d - 1)


def _unpack(x: np.ndarray, d: int) -> np.ndarray:
    npairs = d * (d - 1) // 2
    x = x.reshape(4, 2, npairs)
    return givens_product(x[:, 0], x[:, 1], d)


def _objective(x, d, schmidt, weights):
    u = _unpack(x, d)
    a = u[:2, None] * schmidt
    b = u[None, 2:]
    tables = np.abs(a @ np.swapaxes(b, -1, -2)) ** 2
    return -float(np.sum(weights * tables))


def params_to_unitaries(x: np.ndarray, d: int) -> list[FullUnitaryParams]:
    npairs = d * (d - 1) // 2
    x = np.asarray(x).reshape(4, 2, npairs)
    return [FullUnitaryParams.from_arrays(d, x[n, 0], x[n, 1]) for n in range(4)]


def restricted_start(schmidt: np.ndarray) -> np.ndarray:
    """Search vector reproducing the restricted optimum for descending coefficients.

    The block B(z, 0) equals diag(1, -1, ...) @ G_01(-z, 0); the left diagonal
    phase does not change any outcome probability, so only the rotation is set.
    """
    d = schmidt.size
    npairs = d * (d - 1) // 2
    theta1 = np.arctan2(schmidt[1], schmidt[0])
    eta1, eta2 = analytic.optimal_eta(theta1)
    x = np.zeros((4, 2, npairs))
    for n, zeta in enumerate((analytic.ZETA1, analytic.ZETA2, eta1, eta2)):
        x[n, 0, 0] = -zeta
    return x.ravel()


def _random_start(d: int, rng: np.random.Generator) -> np.ndarray:
    npairs = d * (d - 1) // 2
    x = np.empty((4, 2, npairs))
    x[:, 0] = rng.uniform(0.0, np.pi, (4, npairs))
    x[:, 1] = rng.uniform(0.0, 2 * np.pi, (4, npairs))
    return x.ravel()


def _local_search(task):
    x0, d, schmidt, functional, cfg = task
    weights = functional_weights(d, functional)
    n = x0.size
    simplex = np.vstack([x0, x0 + cfg.simplex_scale * np.eye(n)])
    res = minimize(
        _objective,
        x0,
        args=(d, schmidt, weights),
        method="Nelder-Mead",
        options=dict(
            maxiter=cfg.max_iters,
            maxfev=cfg.max_iters,
            xatol=cfg.xtol,
            fatol=cfg.tol,
            adaptive=True,
            initial_simplex=simplex,
        ),
    )
    return -float(res.fun), res.x, bool(res.success)


def maximize_full(
    state: PureTwoQuditState,
    cfg: OptimizerConfig | None = None,
    functional: Functional = Functional.CGLMP,
    extra_starts: Sequence[np.ndarray] = (),
) -> ViolationResult:
    """Multi-start Nelder-Mead over four fully parametrized unitaries.

    The search runs on the Schmidt form of ``state`` (local unitaries do not
    change the optimum) and the returned ``settings`` are mapped back to act
    on ``state`` itself. Restart 0 starts from the restricted optimum,
    ``extra_starts`` (canonical-frame vectors) come next, then seeded uniform
    draws. Each random restart owns a generator spawned from ``cfg.seed``.
    ``trace`` holds ``(restart, value, converged)``.
    """
    cfg = cfg or OptimizerConfig()
    functional = Functional(functional)
    d = state.d
    if not 2 <= d <= MAX_FULL_DIM:
        raise ValueError(f"full optimization supports 2 <= d <= {MAX_FULL_DIM}, got {d}")
    left, schmidt, right = np.linalg.svd(state.amps)

    starts = [restricted_start(schmidt)] + [np.asarray(x, dtype=float) for x in extra_starts]
    children = np.random.SeedSequence(cfg.seed).spawn(max(cfg.restarts - 1, 0))
    starts += [_random_start(d, np.random.default_rng(c)) for c in children]
    tasks = [(x0, d, schmidt, functional, cfg) for x0 in starts]
    outcomes = _pmap(_local_search, tasks, cfg.threads)

    trace = [(r, value, ok) for r, (value, _, ok) in enumerate(outcomes)]
    best_r = max(range(len(outcomes)), key=lambda r: (outcomes[r][0], -r))
    best_value, best_x, _ = outcomes[best_r]

    u = _unpack(best_x, d)
    # canonical frame -> input frame: amps = left diag(s) right
    settings = SettingsQuad(u[0] @ left.conj().T, u[1] @ left.conj().T, u[2] @ right.conj(), u[3] @ right.conj())
    bound = LOCAL_BOUND if functional is Functional.CGLMP else 0.0
    return ViolationResult(
        best_value=best_value,
        best_params=best_x,
        settings=settings,
        violated=best_value > bound + VIOLATION_TOL,
        margin=best_value - bound,
        trace=trace,
    )


# ---------------------------------------------------------------------- scan


@dataclass
class ScanRow:
    kappa: np.ndarray
    restricted_value: float
    margin: float
    full_value: float | None = None


@dataclass
class ScanReport:
    d: int
    rows: list
    resampled: int
    min_margin: float
    all_violated: bool
    full_dominates: bool | None = None

    @property
    def passed(self) -> bool:
        return self.all_violated and self.full_dominates is not False


def gisin_scan(d: int, samples: int, cfg: OptimizerConfig | None = None, full: bool = False) -> ScanReport:
    """Check that sampled entangled Schmidt states violate at the restricted optimum.

    kappa^2 is drawn uniformly from the simplex with ``cfg.seed``; draws of
    Schmidt rank < 2 are redrawn and counted in ``resampled``. With ``full``
    each sample is also run through :func:`maximize_full` using a seed
    spawned per sample.
    """
    cfg = cfg or OptimizerConfig()
    if not 2 <= d <= MAX_SCAN_DIM:
        raise ValueError(f"scan supports 2 <= d <= {MAX_SCAN_DIM}, got {d}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    seeds = np.random.SeedSequence(cfg.seed).spawn(2)
    rng = np.random.default_rng(seeds[0])
    full_seeds = seeds[1].generate_state(samples, dtype=np.uint64) if full else None

    rows, resampled = [], 0
    for n in range(samples):
        while True:
            kappa = sample_schmidt_kappa(d, rng)
            if schmidt_rank(state_from_kappa(kappa)) >= 2:
                break
            resampled += 1
        restricted = maximize_restricted_kappa(kappa)
        row = ScanRow(kappa, restricted.best_value, restricted.margin)
        if full:
            sub = replace(cfg, seed=int(full_seeds[n]))
            row.full_value = maximize_full(state_from_kappa(kappa), sub).best_value
        rows.append(row)

    margins = np.array([r.margin for r in rows])
    dominates = None
    if full:
        dominates = all(r.full_value >= r.restricted_value - 1e-6 for r in rows)
    return ScanReport(
        d=d,
        rows=rows,
        resampled=resampled,
        min_margin=float(margins.min()),
        all_violated=bool(np.all(margins > VIOLATION_TOL)),
        full_dominates=dominates,
    )


# ---------------------------------------------------------------------- sweep


@dataclass
class SweepRow:
    beta: float
    xi: float
    kappa0: float
    kappa1: float
    kappa2: float
    i3_full: float
    i3_restricted: float
    i3_rough: float


SWEEP_COLUMNS = ("beta", "xi", "kappa0", "kappa1", "kappa2", "i3_full", "i3_restricted", "i3_rough")


def _sweep_curve(task) -> list:
    beta, xis, cfg, index = task
    seeds = np.random.SeedSequence([cfg.seed, index]).generate_state(len(xis), dtype=np.uint64)
    rows, previous = [], None
    for xi, seed in zip(xis, seeds):
        kappa = kappa_from_beta_xi(QutritBetaXi(beta, xi))
        state = state_from_kappa(kappa)
        extra = [] if previous is None else [previous]
        full = maximize_full(state, replace(cfg, seed=int(seed), threads=1), extra_starts=extra)
        previous = full.best_params
        rows.append(
            SweepRow(
                beta=float(beta),
                xi=float(xi),
                kappa0=float(kappa[0]),
                kappa1=float(kappa[1]),
                kappa2=float(kappa[2]),
                i3_full=full.best_value,
                i3_restricted=maximize_restricted_kappa(kappa).best_value,
                i3_rough=float(analytic.empirical_i3_rough(*kappa)),
            )
        )
    return rows


def fig1_sweep(
    betas: Sequence[float] = FIG1_BETAS,
    xi_grid: int = 16,
    cfg: OptimizerConfig | None = None,
) -> list[SweepRow]:
    """Qutrit curves I3(xi) for each beta, xi uniform on [0, pi/2] with ``xi_grid`` points.

    Along each curve the previous point's optimum seeds the next search.
    Curves are independent and may run in parallel.
    """
    cfg = cfg or OptimizerConfig()
    if xi_grid < 2:
        raise ValueError("xi_grid must be >= 2")
    xis = np.linspace(0.0, np.pi / 2, xi_grid)
    tasks = [(float(b), xis, cfg, i) for i, b in enumerate(betas)]
    curves = _pmap(_sweep_curve, tasks, cfg.threads)
    return [row for curve in curves for row in curve]
