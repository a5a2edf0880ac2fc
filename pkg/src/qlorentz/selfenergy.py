"""Born self-energy and the renormalized propagator.

The leading correction from resumming immediate recollisions is

    theta(p) = int |B(p-q)|^2 dq / (e(p) - e(q) - i eta0),   eta0 -> 0+,

so Im theta(p) = pi * int |B(p-q)|^2 delta(e(p)-e(q)) dq >= 0, and the
propagator is regularized by

    omega(p) = e(p) + lambda^2 theta(p),
    |1 / (alpha - omega(p) - i eta)| <= 1 / (lambda^2 Im theta + eta).

Measure conventions (one per model, applied consistently downstream):

- discrete: the normalized torus measure dq/(2pi)^d, under which |B|^2 == 1
  gives Im theta(a) = pi * dos(a) = O(1) -- the per-collision rate that
  makes the ladder integral int lambda^2 dq / |alpha - conj(omega) - i eta|^2
  saturate at 1 and the power-counting gain per propagator equal lambda^-2.
  theta then depends on p only through a = e(p).
- continuum: the plain measure dq with a radial form factor, so that for
  B == 1 inside a cutoff Im theta(p) = pi * 4 pi sqrt(2 e(p)) in d = 3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dispersion import DispersionRelation

__all__ = ["SelfEnergy", "RenormalizedPropagator", "cauchy_transform"]

_TWO_PI = 2.0 * np.pi


def cauchy_transform(u: np.ndarray, f: np.ndarray, a: np.ndarray, eta: float) -> np.ndarray:
    """int f(u) du / (a - u - i eta) on the grid ``u``, vectorized over ``a``.

    The point singularity is subtracted: the f(a)-part integrates to a
    complex logarithm in closed form, the remainder is smooth enough for
    the trapezoid rule on the supplied grid.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    fa = np.interp(a, u, f)
    denom = a[:, None] - u[None, :] - 1j * eta
    num = f[None, :] - fa[:, None]
    sub = np.trapezoid(num / denom, u, axis=1)
    lo, hi = u[0], u[-1]
    log_part = np.log(a - lo - 1j * eta) - np.log(a - hi - 1j * eta)
    return sub + fa * log_part


@dataclass
class SelfEnergy:
    """Born-level self-energy for a dispersion relation.

    Parameters
    ----------
    dispersion : the kinetic-energy law.
    lam        : coupling constant lambda in (0, 1).
    eta0       : regularization at which the eta -> 0+ limit is frozen.
    form_factor: continuum only; "gaussian" for |B(k)|^2 = exp(-k^2)
                 (unit-height Schwartz profile) or "flat" for B == 1 with
                 the radial cutoff ``cutoff``.
    refine     : optional fixed-point sweeps of the self-consistent
                 equation; the Born solution (refine=0) is the default and
                 is accurate to the order the estimates require.
    """

    dispersion: DispersionRelation
    lam: float = 0.2
    eta0: float = 1e-4
    form_factor: str = "gaussian"
    cutoff: float = 6.0
    refine: int = 0
    _table: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise ValueError("coupling must lie in (0, 1)")
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")

    # ---- tabulation ------------------------------------------------------------

    def _build_table(self) -> tuple[np.ndarray, np.ndarray]:
        if self._table is not None:
            return self._table
        disp = self.dispersion
        if disp.kind == "discrete":
            lo, hi = disp.band
            grid = np.linspace(lo, hi, 2401)
            dens = disp.dos(grid)
            theta = cauchy_transform(grid, dens, grid, self.eta0)
            l2 = self.lam ** 2
            for _ in range(self.refine):
                shifted = np.empty_like(theta)
                for i, a in enumerate(grid):
                    denom = (a + l2 * theta[i].real) - (grid + l2 * theta.real) - 1j * (
                        self.eta0 + l2 * np.clip(theta.imag, 0, None))
                    shifted[i] = np.trapezoid(dens / denom, grid)
                theta = shifted
        else:
            if disp.d != 3:
                raise NotImplementedError("continuum self-energy implemented for d = 3")
            pm = np.linspace(1e-4, max(self.cutoff, 4.0), 801)
            theta = np.array([self._continuum_theta_radial(p) for p in pm])
            grid = 0.5 * pm ** 2          # tabulate against energy e(p)
        self._table = (grid, theta)
        return self._table

    def _continuum_theta_radial(self, p: float) -> complex:
        """theta at |p| = p via the radial/energy representation (plain dq)."""
        rmax = self.cutoff if self.form_factor == "flat" else p + 8.0
        r = np.linspace(1e-6, rmax, 4001)
        if self.form_factor == "flat":
            ang = 2.0 * _TWO_PI * r ** 2                      # 4 pi r^2, full angle
        else:
            # int_{-1}^{1} exp(-(p^2+r^2-2 p r mu)) dmu, closed form
            x = 2.0 * p * r
            ang = _TWO_PI * r ** 2 * np.exp(-(p ** 2 + r ** 2)) * 2.0 * np.sinh(x) / np.where(x > 1e-12, x, 1.0)
        u = 0.5 * r ** 2
        f = ang / r                                           # du = r dr
        val = cauchy_transform(u, f, np.array([0.5 * p ** 2]), self.eta0)
        return complex(val[0])

    # ---- evaluation ------------------------------------------------------------

    def theta_of_energy(self, a) -> np.ndarray:
        """theta as a function of the on-shell energy a = e(p)."""
        grid, tab = self._build_table()
        a = np.asarray(a, dtype=float)
        re = np.interp(a, grid, tab.real)
        im = np.clip(np.interp(a, grid, tab.imag), 0.0, None)
        return re + 1j * im

    def theta(self, p: np.ndarray) -> np.ndarray:
        """theta(p) for momenta of shape (..., d)."""
        return self.theta_of_energy(self.dispersion.e(p))

    def min_im_theta(self, exclude_norm: float = 0.05) -> float:
        """inf Im theta over the band, away from the critical set.

        ``exclude_norm`` is the margin in the regularized energy distance
        |||a||| below which points are excluded (Im theta vanishes at the
        band edges / critical energies).
        """
        grid, tab = self._build_table()
        keep = self.dispersion.energy_norm(grid, 0.0) > exclude_norm
        keep &= grid > exclude_norm
        return float(np.clip(tab.imag[keep], 0.0, None).min())

    def sigma_eta(self, p: np.ndarray, eta: float) -> np.ndarray:
        """sigma_eta(p) = eta * int dq / |omega(p) - omega(q) + i eta|^2.

        Converges to Im theta(p) as eta -> 0.  Lattice model only, where
        the integral reduces to a density-of-states quadrature.
        """
        if self.dispersion.kind != "discrete":
            raise NotImplementedError("sigma check implemented for the lattice model")
        grid, tab = self._build_table()
        dens = self.dispersion.dos(grid)
        l2 = self.lam ** 2
        om_u = grid + l2 * tab
        om_p = self.dispersion.e(np.asarray(p)) + l2 * self.theta(p)
        diff = om_p[..., None] - om_u + 1j * eta
        return eta * np.trapezoid(dens / np.abs(diff) ** 2, grid, axis=-1)


@dataclass
class RenormalizedPropagator:
    """omega(p) = e(p) + lambda^2 theta(p) and the associated resolvents."""

    self_energy: SelfEnergy
    eta: float

    @property
    def dispersion(self) -> DispersionRelation:
        return self.self_energy.dispersion

    @property
    def lam(self) -> float:
        return self.self_energy.lam

    def omega(self, p: np.ndarray) -> np.ndarray:
        """e(p) + lambda^2 theta(p), Im >= 0."""
        return self.dispersion.e(p) + self.lam ** 2 * self.self_energy.theta(p)

    def omega_forward(self, p: np.ndarray) -> np.ndarray:
        """The damped branch e(p) + lambda^2 conj(theta(p)) driving exp(-i t omega)."""
        return np.conj(self.omega(p))

    def omega_of_energy(self, a) -> np.ndarray:
        return np.asarray(a) + self.lam ** 2 * self.self_energy.theta_of_energy(a)

    def resolvent(self, alpha, p) -> np.ndarray:
        """1 / (alpha - omega(p) - i eta); modulus bounded by
        1 / (lambda^2 Im theta + eta)."""
        return 1.0 / (np.asarray(alpha) - self.omega(p) - 1j * self.eta)

    def sup_bound(self, exclude_norm: float = 0.05) -> float:
        """The L-infinity bound 1/(lambda^2 inf Im theta + eta) away from
        the critical set."""
        return 1.0 / (self.lam ** 2 * self.self_energy.min_im_theta(exclude_norm) + self.eta)
