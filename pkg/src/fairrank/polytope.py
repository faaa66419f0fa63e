"""Approximately uniform group-fair representations from a polytope walk.

The lattice points of ``K = {x : sum x = k, L <= x <= U}`` are sampled by

1. finding an integral centre ``x*`` with an inner ball of radius ``delta``;
2. drawing ``z`` close to uniform from the expanded, translated polytope
   ``(1 + sqrt(ell)/delta) (K - x*)`` with a hit-and-run walk;
3. rounding ``z`` deterministically to an integer point on ``sum x = 0``;
4. accepting when the rounded point lies in ``K - x*``, else redrawing.

Every lattice point of ``K - x*`` owns a rounding cell of the same volume
inside the expanded polytope, so step 4 turns a close-to-uniform continuous
draw into a close-to-uniform lattice draw.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DeltaTooSmall, RejectionBudgetExceeded, WalkNotMixed
from .model import FairnessConstraints, GroupRepresentation, validate
from .rng import as_generator

E_MINUS_2 = math.exp(-2.0)
# iterates per kernel call; bounds memory for the pre-drawn directions
_STEPS_PER_CALL = 1 << 18
_MEMBERSHIP_TOL = 1e-9


class WeakAcceptanceWarning(RuntimeWarning):
    """The requested TV distance leaves no positive acceptance guarantee."""


def compute_delta(constraints: FairnessConstraints) -> int:
    c = constraints
    return min(
        (c.k - sum(c.lower)) // c.ell,
        (sum(c.upper) - c.k) // c.ell,
        min((u - lo) // 2 for lo, u in zip(c.lower, c.upper)),
    )


def find_center(constraints: FairnessConstraints, delta: int) -> tuple[int, ...]:
    """Integral point of ``K`` at distance >= ``delta`` from every box face."""
    if delta < 1:
        raise DeltaTooSmall(f"delta = {delta}; the walk needs delta >= 1, use the DP sampler")
    c = constraints
    x = [lo + delta for lo in c.lower]
    for j in range(c.ell):
        total = sum(x)
        if total < c.k:
            x[j] = min(c.k - (total - x[j]), c.upper[j] - delta)
    return tuple(x)


def build_rotation(ell: int) -> np.ndarray:
    """Orthogonal ``R`` with ``R @ ones / sqrt(ell) == e_last``.

    A Householder reflection; its first ``ell - 1`` rows are an orthonormal
    basis of the hyperplane ``sum z = 0``.
    """
    if ell < 2:
        raise ValueError("rotation needs ell >= 2")
    u = np.full(ell, 1.0 / math.sqrt(ell))
    v = u.copy()
    v[-1] -= 1.0
    return np.eye(ell) - 2.0 * np.outer(v, v) / (v @ v)


@dataclass(frozen=True, eq=False)
class PolytopeGeometry:
    constraints: FairnessConstraints
    delta: int
    center: tuple[int, ...]
    rotation: np.ndarray
    expansion: float
    lo: np.ndarray  # box bounds of the expanded polytope in centred coordinates
    hi: np.ndarray

    @classmethod
    def from_constraints(cls, constraints: FairnessConstraints) -> PolytopeGeometry:
        validate(constraints)
        c = constraints
        if c.ell < 2:
            raise ValueError("the walk needs at least two groups")
        delta = compute_delta(c)
        center = find_center(c, delta)
        s = 1.0 + math.sqrt(c.ell) / delta
        xs = np.asarray(center, dtype=float)
        lo = s * (np.asarray(c.lower, dtype=float) - xs)
        hi = s * (np.asarray(c.upper, dtype=float) - xs)
        return cls(c, delta, center, build_rotation(c.ell), s, lo, hi)

    @property
    def ell(self) -> int:
        return self.constraints.ell

    @property
    def basis(self) -> np.ndarray:
        """``(ell-1) x ell`` orthonormal rows spanning ``sum z = 0``."""
        return self.rotation[:-1]

    def acceptance_bound(self, tv_delta: float) -> float:
        """Lower bound on the acceptance probability of one oracle call."""
        ell = self.ell
        return math.exp(-2.0 * ell * math.sqrt(ell) / self.delta) - tv_delta

    def in_expanded(self, z, tol: float = _MEMBERSHIP_TOL) -> bool:
        z = np.asarray(z, dtype=float)
        scale = max(1.0, float(np.abs(self.hi - self.lo).max()))
        return bool(
            abs(z.sum()) <= tol * scale
            and np.all(z >= self.lo - tol * scale)
            and np.all(z <= self.hi + tol * scale)
        )

    def in_translated(self, x) -> bool:
        """Exact integer membership of ``x`` in ``K - x*``."""
        if sum(int(v) for v in x) != 0:
            return False
        c = self.constraints
        return all(
            c.lower[j] <= int(v) + self.center[j] <= c.upper[j] for j, v in enumerate(x)
        )


@dataclass(frozen=True)
class WalkConfig:
    """Walk parameters; ``None`` fields take instance-dependent defaults.

    Defaults: ``burn_in = 1000 (ell-1)``, ``step_count = 100 (ell-1)^2``
    walk steps between emitted points, and ``max_rejections`` ten times the
    expected number of oracle calls, clamped to ``[100, 10**6]``.
    """

    tv_delta: float = 0.05
    step_count: int | None = None
    burn_in: int | None = None
    max_rejections: int | None = None

    def __post_init__(self):
        if not 0.0 < self.tv_delta < E_MINUS_2:
            raise ValueError(f"tv_delta must lie in (0, e^-2), got {self.tv_delta}")
        for name in ("step_count", "burn_in", "max_rejections"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be positive")

    def resolve(self, geometry: PolytopeGeometry) -> tuple[int, int, int]:
        d = geometry.ell - 1
        steps = self.step_count if self.step_count is not None else 100 * d * d
        burn = self.burn_in if self.burn_in is not None else 1000 * d
        if self.max_rejections is not None:
            budget = self.max_rejections
        else:
            exponent = 2.0 * geometry.ell ** 1.5 / geometry.delta
            budget = 10**6 if exponent > math.log(10**5) else 10 * math.ceil(math.exp(exponent))
            budget = min(max(budget, 100), 10**6)
        return steps, burn, budget


def round_to_lattice(z) -> np.ndarray:
    """Round a point with ``sum z = 0`` to an integer point with ``sum x = 0``.

    Start from the floors and round up the first ``m = |sum floor(z)|``
    coordinates that have a non-zero fractional part.  Integral coordinates
    are skipped since rounding them up would break the zero sum.
    """
    x, ok = round_batch(np.asarray(z, dtype=float)[None, :])
    if not ok[0]:
        raise ValueError("point is too far off the hyperplane sum z = 0 to round")
    return x[0]


def round_batch(Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`round_to_lattice` over rows; ``ok`` flags success."""
    F = np.floor(Z)
    m = -F.sum(axis=1)
    frac = Z > F
    order = np.cumsum(frac, axis=1)
    up = frac & (order <= m[:, None])
    X = (F + up).astype(np.int64)
    ok = (m >= 0) & (order[:, -1] >= m)
    return X, ok


class WalkSampler:
    """Stateful walk sampler for one constraint set.

    Holds a single hit-and-run chain; successive draws continue the chain,
    ``step_count`` steps apart, after an initial burn-in from the centre.
    """

    def __init__(self, constraints: FairnessConstraints, config: WalkConfig | None = None, rng=None,
                 kernel=None):
        self.geometry = PolytopeGeometry.from_constraints(constraints)
        self.config = config or WalkConfig()
        self.rng = as_generator(rng)
        self.step_count, self.burn_in, self.max_rejections = self.config.resolve(self.geometry)
        self._kernel = kernel or kernels.hit_and_run
        if self.geometry.acceptance_bound(self.config.tv_delta) <= 0:
            warnings.warn(
                f"tv_delta={self.config.tv_delta} is not below exp(-2 ell^1.5 / delta)"
                f"={self.geometry.acceptance_bound(0.0):.3g}; the expected oracle-call bound is vacuous",
                WeakAcceptanceWarning,
                stacklevel=2,
            )
        self.attempts = 0
        self.accepted = 0
        self._z = np.zeros(self.geometry.ell)
        self._walk(self.burn_in, 0)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempts if self.attempts else float("nan")

    def _walk(self, n_steps: int, thin: int) -> np.ndarray:
        g = self.geometry
        n_out = n_steps // thin if thin else 0
        out = np.empty((n_out, g.ell))
        directions = self.rng.standard_normal((n_steps, g.ell - 1)) @ g.basis
        uniforms = self.rng.random(n_steps)
        self._kernel(self._z, np.ascontiguousarray(directions), uniforms, g.lo, g.hi, thin, out)
        self._z -= self._z.mean()
        return out

    def continuous(self, n: int) -> np.ndarray:
        """``n`` successive thinned chain states in the expanded polytope."""
        g = self.geometry
        per_call = max(1, _STEPS_PER_CALL // self.step_count)
        chunks = []
        remaining = n
        while remaining > 0:
            m = min(per_call, remaining)
            chunks.append(self._walk(m * self.step_count, self.step_count))
            remaining -= m
        Z = np.concatenate(chunks) if chunks else np.empty((0, g.ell))
        scale = max(1.0, float(np.abs(g.hi - g.lo).max()))
        tol = _MEMBERSHIP_TOL * scale
        bad = (Z < g.lo - tol).any(axis=1) | (Z > g.hi + tol).any(axis=1)
        bad |= np.abs(Z.sum(axis=1)) > tol
        if bad.any():
            raise WalkNotMixed("walk iterate left the expanded polytope")
        return Z

    def sample_many(self, n: int) -> list[GroupRepresentation]:
        g = self.geometry
        c = g.constraints
        center = np.asarray(g.center, dtype=np.int64)
        lo = np.asarray(c.lower, dtype=np.int64) - center
        hi = np.asarray(c.upper, dtype=np.int64) - center
        result: list[GroupRepresentation] = []
        rejects = 0
        while len(result) < n:
            # batch size tracks the observed acceptance rate
            rate = self.acceptance_rate if self.accepted else 0.5
            batch = min(4096, max(1, int((n - len(result)) / max(rate, 1e-3) * 1.1) + 1))
            Z = self.continuous(batch)
            X, ok = round_batch(Z)
            ok &= X.sum(axis=1) == 0
            ok &= np.all((X >= lo) & (X <= hi), axis=1)
            for x, good in zip(X, ok):
                self.attempts += 1
                if good:
                    self.accepted += 1
                    rejects = 0
                    result.append(tuple(int(v) for v in x + center))
                    if len(result) == n:
                        break
                else:
                    rejects += 1
                    if rejects >= self.max_rejections:
                        raise RejectionBudgetExceeded(
                            f"{rejects} consecutive rejections (budget {self.max_rejections})"
                        )
        return result

    def sample(self) -> GroupRepresentation:
        return self.sample_many(1)[0]


def continuous_uniform_sample(geometry: PolytopeGeometry, config: WalkConfig | None = None, rng=None,
                              size: int = 1) -> np.ndarray:
    """Points close to uniform on the expanded polytope, shape ``(size, ell)``."""
    sampler = WalkSampler(geometry.constraints, config, rng)
    return sampler.continuous(size)


def sample_representation(constraints: FairnessConstraints, config: WalkConfig | None = None,
                          rng=None) -> GroupRepresentation:
    return WalkSampler(constraints, config, rng).sample()
