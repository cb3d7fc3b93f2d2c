"""Joint outcome probabilities, the CGLMP and Gill functionals, and their local bounds.

Tables for the four setting pairs are kept in one array ``tables`` of shape
``(2, 2, d, d)`` with ``tables[a, b, k, l] = P(A_{a+1} = k, B_{b+1} = l)``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .measure import as_matrix, haar_unitary
from .qstate import PureTwoQuditState, random_pure_state

NEGATIVE_TOL = 1e-12
SUM_TOL = 1e-10
MAX_LHV_DIM = 10


class Functional(str, enum.Enum):
    CGLMP = "cglmp"
    GILL = "gill"

    @property
    def local_bound(self) -> int:
        return 2 if self is Functional.CGLMP else 0


@dataclass(frozen=True)
class ProbabilityTable:
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"probability table must be square, got shape {p.shape}")
        if p.min() < -NEGATIVE_TOL:
            raise ValueError(f"negative probability {p.min():.3e} beyond float tolerance")
        p = np.clip(p, 0.0, 1.0)
        total = p.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def d(self) -> int:
        return self.p.shape[0]


@dataclass(frozen=True)
class SettingsQuad:
    """Two measurement unitaries per party."""

    uA1: object
    uA2: object
    uB1: object
    uB2: object

    def __post_init__(self):
        dims = {as_matrix(u).shape for u in self.all()}
        if len(dims) != 1:
            raise ValueError(f"settings have mismatched shapes {sorted(dims)}")

    def all(self):
        return (self.uA1, self.uA2, self.uB1, self.uB2)

    @property
    def d(self) -> int:
        return as_matrix(self.uA1).shape[0]

    def alice(self) -> np.ndarray:
        return np.stack([as_matrix(self.uA1), as_matrix(self.uA2)])

    def bob(self) -> np.ndarray:
        return np.stack([as_matrix(self.uB1), as_matrix(self.uB2)])


@dataclass(frozen=True)
class DeterministicStrategy:
    a1: int
    a2: int
    b1: int
    b2: int

    def tables(self, d: int, dtype=float) -> np.ndarray:
        """Point-mass tables induced by the fixed outcomes."""
        if not all(0 <= x < d for x in (self.a1, self.a2, self.b1, self.b2)):
            raise ValueError(f"strategy {self} has outcomes outside 0..{d - 1}")
        t = np.zeros((2, 2, d, d), dtype=dtype)
        if dtype is object:
            t[...] = 0
        for a, x in enumerate((self.a1, self.a2)):
            for b, y in enumerate((self.b1, self.b2)):
                t[a, b, x, y] = 1
        return t


@dataclass(frozen=True)
class LhvBound:
    functional: Functional
    d: int
    value: object  # Fraction
    strategies: int
    maximizer: DeterministicStrategy


def _check_dims(state: PureTwoQuditState, *us):
    for u in us:
        if as_matrix(u).shape != (state.d, state.d):
            raise ValueError(f"unitary of shape {as_matrix(u).shape} does not act on d={state.d}")


def joint_probabilities(amps: np.ndarray, uA: np.ndarray, uB: np.ndarray) -> np.ndarray:
    """|<kl| uA (x) uB |psi>|^2 without forming the d^2 x d^2 operator.

    <kl| uA (x) uB |psi> = sum_{j,m} uA[k, j] uB[l, m] amps[j, m] = (uA @ amps @ uB.T)[k, l].
    Works on stacked unitaries too (leading batch axes broadcast).
    """
    return np.abs(uA @ amps @ np.swapaxes(uB, -1, -2)) ** 2


def joint_table(state: PureTwoQuditState, uA, uB) -> ProbabilityTable:
    _check_dims(state, uA, uB)
    return ProbabilityTable(joint_probabilities(state.amps, as_matrix(uA), as_matrix(uB)))


def joint_tables(state: PureTwoQuditState, settings: SettingsQuad) -> np.ndarray:
    """All four tables, shape (2, 2, d, d), validated as probability tables."""
    _check_dims(state, *settings.all())
    A = settings.alice()[:, None]
    B = settings.bob()[None, :]
    tables = joint_probabilities(state.amps, A, B)
    for t in tables.reshape(-1, state.d, state.d):
        ProbabilityTable(t)
    return np.clip(tables, 0.0, 1.0)


def prob_equal_shift(table, m: int):
    """P(A = B + m) = sum_j P(A = j, B = j - m), indices mod d."""
    p = table.p if isinstance(table, ProbabilityTable) else table
    d = p.shape[0]
    return sum(p[j, (j - m) % d] for j in range(d))


def prob_equal_shift_ba(table, c: int):
    """P(B = A + c) read off the (A, B) table: sum_j P(A = j, B = j + c)."""
    p = table.p if isinstance(table, ProbabilityTable) else table
    d = p.shape[0]
    return sum(p[j, (j + c) % d] for j in range(d))


def _cglmp_weight(k: int, d: int, exact: bool):
    if exact:
        return Fraction(d - 1 - 2 * k, d - 1)
    return 1.0 - 2.0 * k / (d - 1)


def cglmp_from_tables(tables, exact: bool = False):
    """CGLMP expression I_d evaluated term by term on the four tables.

    With ``exact=True`` the weights are Fractions, so integer point-mass
    tables give an exact rational value.
    """
    t11, t12, t21, t22 = tables[0, 0], tables[0, 1], tables[1, 0], tables[1, 1]
    d = t11.shape[0]
    total = 0
    for k in range(d // 2):
        plus = (
            prob_equal_shift(t11, k)
            + prob_equal_shift_ba(t21, k + 1)
            + prob_equal_shift(t22, k)
            + prob_equal_shift_ba(t12, k)
        )
        minus = (
            prob_equal_shift(t11, -k - 1)
            + prob_equal_shift_ba(t21, -k)
            + prob_equal_shift(t22, -k - 1)
            + prob_equal_shift_ba(t12, -k - 1)
        )
        total = total + _cglmp_weight(k, d, exact) * (plus - minus)
    return total


def _less(p, upper: bool):
    """P(row outcome < column outcome) if ``upper`` else P(column < row), raw label order."""
    d = p.shape[0]
    if upper:
        return sum(p[k, l] for k in range(d) for l in range(k + 1, d))
    return sum(p[k, l] for k in range(d) for l in range(k))


def gill_from_tables(tables):
    """P(A2 < B1) - P(A2 < B2) - P(B2 < A1) - P(A1 < B1), no modular wrap."""
    return (
        _less(tables[1, 0], upper=True)
        - _less(tables[1, 1], upper=True)
        - _less(tables[0, 1], upper=False)
        - _less(tables[0, 0], upper=True)
    )


_FROM_TABLES = {Functional.CGLMP: cglmp_from_tables, Functional.GILL: gill_from_tables}


@lru_cache(maxsize=None)
def functional_weights(d: int, functional: Functional = Functional.CGLMP) -> np.ndarray:
    """Coefficient array W with functional(tables) = sum(W * tables).

    Obtained by evaluating the term-by-term functional on unit tables, so it
    inherits the modular conventions rather than restating them.
    """
    functional = Functional(functional)
    f = _FROM_TABLES[functional]
    w = np.zeros((2, 2, d, d))
    for idx in np.ndindex(w.shape):
        unit = np.zeros((2, 2, d, d))
        unit[idx] = 1.0
        w[idx] = f(unit)
    w.setflags(write=False)
    return w


def cglmp_weights(d: int) -> np.ndarray:
    return functional_weights(d, Functional.CGLMP)


def gill_weights(d: int) -> np.ndarray:
    return functional_weights(d, Functional.GILL)


def cglmp_value(state: PureTwoQuditState, settings: SettingsQuad) -> float:
    if state.d < 2:
        raise ValueError("dimension must be at least 2")
    return float(cglmp_from_tables(joint_tables(state, settings)))


def gill_value(state: PureTwoQuditState, settings: SettingsQuad) -> float:
    return float(gill_from_tables(joint_tables(state, settings)))


def functional_value(state: PureTwoQuditState, settings: SettingsQuad, functional: Functional) -> float:
    return float(_FROM_TABLES[Functional(functional)](joint_tables(state, settings)))


def algebraic_max(d: int, functional: Functional = Functional.CGLMP) -> float:
    """Upper bound from normalization alone: each table contributes at most its largest weight."""
    w = functional_weights(d, functional)
    return float(w.reshape(4, -1).max(axis=1).sum())


def iter_strategies(d: int):
    for a1, a2, b1, b2 in itertools.product(range(d), repeat=4):
        yield DeterministicStrategy(a1, a2, b1, b2)


def lhv_bound_brute_force(d: int, functional: Functional = Functional.CGLMP) -> LhvBound:
    """Maximum of the functional over all d^4 deterministic local strategies, exactly."""
    functional = Functional(functional)
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if d > MAX_LHV_DIM:
        raise ValueError(f"d={d} too large for exhaustive enumeration (max {MAX_LHV_DIM})")
    f = _FROM_TABLES[functional]
    best = None
    count = 0
    for strategy in iter_strategies(d):
        if functional is Functional.CGLMP:
            value = f(strategy.tables(d, dtype=object), exact=True)
        else:
            value = Fraction(f(strategy.tables(d, dtype=object)))
        count += 1
        if best is None or value > best[0]:
            best = (Fraction(value), strategy)
    return LhvBound(functional, d, best[0], count, best[1])


def marginals(tables: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Alice marginals alice[a, b, k] and Bob marginals bob[a, b, l]."""
    return tables.sum(axis=3), tables.sum(axis=2)


def no_signaling_deviation(tables: np.ndarray) -> float:
    alice, bob = marginals(np.asarray(tables, dtype=float))
    dev_a = np.abs(alice[:, 0] - alice[:, 1]).max()
    dev_b = np.abs(bob[0] - bob[1]).max()
    return float(max(dev_a, dev_b))


def no_signaling_check(state: PureTwoQuditState, settings: SettingsQuad) -> float:
    """Max change of one party's outcome marginal when the other party switches setting."""
    return no_signaling_deviation(joint_tables(state, settings))


@dataclass(frozen=True)
class AffineFit:
    slope: float
    intercept: float
    max_residual: float
    samples: int


def affine_relation(d: int, rng: np.random.Generator, samples: int = 200) -> AffineFit:
    """Least-squares fit I_d ~ slope * Gill + intercept over random quantum correlations.

    Diagnostic only. Random states are Haar distributed, settings are Haar
    unitaries.
    """
    rows = []
    for _ in range(samples):
        state = random_pure_state(d, rng)
        settings = SettingsQuad(*(haar_unitary(d, rng) for _ in range(4)))
        tables = joint_tables(state, settings)
        rows.append((gill_from_tables(tables), cglmp_from_tables(tables)))
    g, i = np.array(rows).T
    design = np.column_stack([g, np.ones_like(g)])
    (slope, intercept), *_ = np.linalg.lstsq(design, i, rcond=None)
    resid = np.abs(design @ np.array([slope, intercept]) - i).max()
    return AffineFit(float(slope), float(intercept), float(resid), samples)
