"""Dispersion relations, their level sets and densities of states.

Two kinetic-energy laws are supported:

- ``continuum``: e(p) = p^2/2 on R^d (with a radial cutoff where a finite
  domain is required); grad e = p; the only critical value is 0.
- ``discrete``: e(p) = sum_j (1 - cos p_j) on the torus [-pi, pi]^d;
  grad e = (sin p_1, ..., sin p_d); critical values are {0, 2, ..., 2d}
  together with the flat-point energy d.

Measure conventions.  Momentum integrals over the torus are taken with the
plain Lebesgue measure ``dp`` (total volume (2pi)^d) unless explicitly
normalized.  ``level_density(a)`` is the co-area integral
``I(a) = int delta(e(p) - a) dp`` in the plain convention;
``dos(a) = I(a) / (2pi)^d`` is the probability density of e(p) under a
uniform momentum.  Both appear downstream: the inequality suite and the
self-energy quote plain integrals, while Monte-Carlo sampling and collision
rates are built on the normalized density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

__all__ = [
    "DispersionRelation",
    "continuum_dispersion",
    "discrete_dispersion",
    "ShellSample",
]

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class DispersionRelation:
    kind: str            # "continuum" | "discrete"
    d: int

    def __post_init__(self):
        if self.kind not in ("continuum", "discrete"):
            raise ValueError(f"unknown dispersion kind {self.kind!r}")

    # --- pointwise quantities -------------------------------------------------

    def e(self, p: np.ndarray) -> np.ndarray:
        """Kinetic energy; p has shape (..., d)."""
        p = np.asarray(p)
        if self.kind == "continuum":
            return 0.5 * np.sum(p * p, axis=-1)
        return np.sum(1.0 - np.cos(p), axis=-1)

    def grad_e(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p)
        if self.kind == "continuum":
            return p
        return np.sin(p)

    @property
    def critical_values(self) -> tuple[float, ...]:
        if self.kind == "continuum":
            return (0.0,)
        vals = [2.0 * m for m in range(self.d + 1)]
        if float(self.d) not in vals:
            vals.append(float(self.d))
        return tuple(sorted(vals))

    @property
    def critical_points(self) -> np.ndarray:
        """Momenta with grad e = 0 (discrete: components in {0, pi})."""
        if self.kind == "continuum":
            return np.zeros((1, self.d))
        combos = np.array(np.meshgrid(*([[0.0, np.pi]] * self.d), indexing="ij"))
        return combos.reshape(self.d, -1).T

    @property
    def band(self) -> tuple[float, float]:
        return (0.0, np.inf) if self.kind == "continuum" else (0.0, 2.0 * self.d)

    # --- regularized distances (the triple-norm) -------------------------------

    def energy_norm(self, alpha: np.ndarray, eta: float) -> np.ndarray:
        """|||alpha||| = eta + distance of alpha to the critical values."""
        alpha = np.asarray(alpha, dtype=float)
        crit = np.asarray(self.critical_values)
        return eta + np.min(np.abs(alpha[..., None] - crit), axis=-1)

    def momentum_norm(self, q: np.ndarray, eta: float) -> np.ndarray:
        """|||q||| for momenta: eta + |q| (continuum) or eta + distance to
        the nearest critical point on the torus (discrete)."""
        q = np.asarray(q, dtype=float)
        if self.kind == "continuum":
            return eta + np.linalg.norm(q, axis=-1)
        # distance on the torus to componentwise {0, pi} points
        qm = np.mod(q + np.pi, _TWO_PI) - np.pi   # wrap to [-pi, pi)
        d0 = np.abs(qm)                            # distance of component to 0
        dpi = np.pi - d0                           # distance to +-pi
        per_comp = np.minimum(d0, dpi)
        return eta + np.linalg.norm(per_comp, axis=-1)

    # --- density of states ------------------------------------------------------

    def level_density(self, a) -> np.ndarray:
        """I(a) = int delta(e(p) - a) dp, plain measure.

        Continuum d=3: surface of the sphere |p| = sqrt(2a) weighted by
        1/|grad e|, i.e. 4 pi sqrt(2a).  Discrete: Bessel-integral
        representation, tabulated once and interpolated.
        """
        a = np.asarray(a, dtype=float)
        if self.kind == "continuum":
            if self.d == 3:
                return np.where(a > 0, 4.0 * np.pi * np.sqrt(2.0 * np.clip(a, 0, None)), 0.0)
            if self.d == 2:
                return np.where(a > 0, _TWO_PI + 0.0 * a, 0.0)
            if self.d == 1:
                return np.where(a > 0, 2.0 / np.sqrt(2.0 * np.clip(a, 1e-300, None)), 0.0)
            raise NotImplementedError("continuum level density implemented for d <= 3")
        grid, vals = _discrete_dos_table(self.d)
        return np.interp(a, grid, vals, left=0.0, right=0.0)

    def dos(self, a) -> np.ndarray:
        """Normalized density of e(p) under uniform momentum: I(a)/(2pi)^d."""
        return self.level_density(a) / _TWO_PI ** self.d

    # --- shell sampling -----------------------------------------------------------

    def sample_shell(self, a: float, n: int, rng: np.random.Generator,
                     delta: float = 1e-3) -> "ShellSample":
        """Sample momenta from the co-area measure delta(e(p)-a) dp.

        Continuum: exact points on the sphere |p| = sqrt(2a).  Discrete:
        uniform points in the slab |e(p) - a| < delta, which converge to the
        co-area measure as delta -> 0 (uniform slab volume = dm/|grad e| da).
        """
        if self.kind == "continuum":
            if not a > 0:
                raise ValueError("shell energy must be positive")
            dirs = rng.normal(size=(n, self.d))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            pts = np.sqrt(2.0 * a) * dirs
            return ShellSample(points=pts, energy=a, delta=0.0)
        lo, hi = self.band
        if not (lo < a < hi):
            raise ValueError(f"shell energy {a} outside the band {self.band}")
        if min(a - lo, hi - a) < 10 * delta:
            raise ValueError("shell too close to a band edge for slab sampling")
        out = np.empty((0, self.d))
        batch = max(4 * n, 10_000)
        guard = 0
        while out.shape[0] < n:
            cand = rng.uniform(-np.pi, np.pi, size=(batch, self.d))
            keep = np.abs(self.e(cand) - a) < delta
            out = np.vstack([out, cand[keep]])
            guard += 1
            if guard > 2000:
                raise RuntimeError("slab sampler degenerate: acceptance rate too low")
        return ShellSample(points=out[:n], energy=a, delta=delta)

    def surface_average(self, fn, a: float, samples: int, rng: np.random.Generator,
                        delta: float = 1e-3) -> np.ndarray:
        """<fn>_a: normalized co-area average of fn over the shell e(p)=a."""
        shell = self.sample_shell(a, samples, rng, delta=delta)
        vals = np.asarray(fn(shell.points))
        return vals.mean(axis=0)


@dataclass(frozen=True)
class ShellSample:
    points: np.ndarray
    energy: float
    delta: float


def continuum_dispersion(d: int = 3) -> DispersionRelation:
    return DispersionRelation("continuum", d)


def discrete_dispersion(d: int = 3) -> DispersionRelation:
    return DispersionRelation("discrete", d)


# --- discrete density of states table -------------------------------------------

_DOS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _discrete_dos_table(d: int, n_grid: int = 2401,
                        s_max: float = 400.0) -> tuple[np.ndarray, np.ndarray]:
    """Tabulate I(a) = (2pi)^(d-1) * 2 * int_0^inf cos((a-d)s) J0(s)^d ds.

    The integrand decays like s^(-d/2); for d >= 2 the oscillatory tail
    beyond ``s_max`` contributes below 1e-4 relative.  Composite
    Gauss-Legendre nodes shared across all a make this a single matrix
    product.
    """
    if d not in _DOS_CACHE:
        if d == 1:
            grid = np.linspace(0.0, 2.0, 4001)
            inner = np.clip(grid * (2.0 - grid), 1e-12, None)
            vals = 2.0 / np.sqrt(inner)
            vals[0] = vals[-1] = vals[1]  # integrable endpoints; clip for interpolation
        else:
            grid = np.linspace(0.0, 2.0 * d, n_grid)
            x, w = np.polynomial.legendre.leggauss(32)
            edges = np.linspace(0.0, s_max, 101)
            half = 0.5 * (edges[1:] - edges[:-1])
            mid = 0.5 * (edges[1:] + edges[:-1])
            nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
            weights = (half[:, None] * w[None, :]).ravel()
            g = special.j0(nodes) ** d * weights
            vals = _TWO_PI ** (d - 1) * 2.0 * (np.cos(np.outer(grid - d, nodes)) @ g)
            vals = np.clip(vals, 0.0, None)
            vals[0] = vals[-1] = 0.0
        _DOS_CACHE[d] = (grid, vals)
    return _DOS_CACHE[d]
