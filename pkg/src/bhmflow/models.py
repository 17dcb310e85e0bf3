"""Phase-field PDE family: mobility, potential, energy, and model presets.

All models have the conservative form

    du/dt = div( M(u) grad( W'(u) - kappa * Lap u ) )

which re-expands (separating the second- and fourth-order operators) to

    du/dt = Lap G(u) - kappa * div( M(u) grad Lap u ),   G(u) = int M(u) W''(u) du.

The right-hand side is evaluated in the re-expanded form: G(u) and M(u)
pointwise in physical space, derivatives spectrally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BlowupDetected, ConfigError, PositivityViolation
from .grid import Field, SpectralGrid

__all__ = [
    "ModelSpec",
    "classic_ch",
    "thin_film",
    "chvm",
    "forced_thin_film",
    "model_from_preset",
    "eval_rhs",
    "chemical_potential",
    "energy",
    "mass",
    "mobility_max",
    "thin_film_exact_solution",
    "thin_film_exact_dt",
]


@dataclass(frozen=True)
class ModelSpec:
    """Closed-form ingredients of one phase-field model.

    ``forcing(grid, t)`` (if set) returns the physical-space array added to
    the right-hand side.
    """

    name: str
    mobility: Callable
    potential: Callable
    potential_deriv: Callable
    potential_deriv2: Callable
    g_fun: Callable
    g_deriv: Callable
    mobility_is_constant: bool = False
    kappa: float = 1.0
    eps: float = 0.0
    positivity_floor: Optional[float] = None
    forcing: Optional[Callable] = None


@dataclass(frozen=True)
class _ClassicChFns:
    """Constant-mobility quartic double-well closed forms.

    A plain (picklable) object with named methods so ModelSpec instances can
    cross process boundaries in parallel sweeps.
    """

    eps: float

    def mobility(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.eps**2)

    def potential(self, u):
        return (u**4 - 2.0 * u**2) / (4.0 * self.eps**2)

    def potential_deriv(self, u):
        return (u**3 - u) / self.eps**2

    def potential_deriv2(self, u):
        return (3.0 * u**2 - 1.0) / self.eps**2

    def g_fun(self, u):
        return u**3 - u

    def g_deriv(self, u):
        return 3.0 * u**2 - 1.0


def classic_ch(eps: float) -> ModelSpec:
    """Classic Cahn-Hilliard: constant mobility eps^2, quartic double well."""
    f = _ClassicChFns(eps)
    return ModelSpec(
        name="classic_ch",
        mobility=f.mobility,
        potential=f.potential,
        potential_deriv=f.potential_deriv,
        potential_deriv2=f.potential_deriv2,
        g_fun=f.g_fun,
        g_deriv=f.g_deriv,
        mobility_is_constant=True,
        eps=eps,
    )


@dataclass(frozen=True)
class _ThinFilmFns:
    """Cubic-mobility disjoining-pressure closed forms."""

    eps: float

    def mobility(self, u):
        return u**3

    def potential(self, u):
        return -0.5 * self.eps**2 / u**2 + self.eps**3 / (3.0 * u**3)

    def potential_deriv(self, u):
        return self.eps**2 / u**3 - self.eps**3 / u**4

    def potential_deriv2(self, u):
        return -3.0 * self.eps**2 / u**4 + 4.0 * self.eps**3 / u**5

    def g_fun(self, u):
        return -4.0 * self.eps**3 / u - 3.0 * self.eps**2 * np.log(u)

    def g_deriv(self, u):
        return -3.0 * self.eps**2 / u + 4.0 * self.eps**3 / u**2


def thin_film(eps: float) -> ModelSpec:
    """Dewetting thin-film model: M = u^3, singular disjoining pressure.

    W'(u) = Pi(u) = eps^2/u^3 - eps^3/u^4, with a positivity floor.
    """
    f = _ThinFilmFns(eps)
    return ModelSpec(
        name="thin_film",
        mobility=f.mobility,
        potential=f.potential,
        potential_deriv=f.potential_deriv,
        potential_deriv2=f.potential_deriv2,
        g_fun=f.g_fun,
        g_deriv=f.g_deriv,
        eps=eps,
        positivity_floor=0.0,
    )


@dataclass(frozen=True)
class _ChvmFns:
    """Degenerate-mobility double-well closed forms, M = 1 - omega^2 u^2."""

    omega: float

    def mobility(self, u):
        return 1.0 - self.omega**2 * u**2

    def potential(self, u):
        return 0.25 * u**4 - 0.5 * u**2

    def potential_deriv(self, u):
        return u**3 - u

    def potential_deriv2(self, u):
        return 3.0 * u**2 - 1.0

    def g_fun(self, u):
        w2 = self.omega**2
        return -0.6 * w2 * u**5 + (1.0 + w2 / 3.0) * u**3 - u

    def g_deriv(self, u):
        return (1.0 - self.omega**2 * u**2) * (3.0 * u**2 - 1.0)


def chvm(omega: float, eps: float = 1.0) -> ModelSpec:
    """Cahn-Hilliard with variable mobility M = 1 - omega^2 u^2.

    W = u^4/4 - u^2/2; the interface term enters as -eps^2 * Lap u in the
    chemical potential (kappa = eps^2), so eps = 1 recovers the plain model.
    G is the closed-form antiderivative of M(u) W''(u):
        G(u) = -(3/5) omega^2 u^5 + (1 + omega^2/3) u^3 - u
    """
    f = _ChvmFns(omega)
    return ModelSpec(
        name="chvm",
        mobility=f.mobility,
        potential=f.potential,
        potential_deriv=f.potential_deriv,
        potential_deriv2=f.potential_deriv2,
        g_fun=f.g_fun,
        g_deriv=f.g_deriv,
        kappa=eps * eps,
        eps=eps,
    )


def thin_film_exact_solution(grid: SpectralGrid, t: float) -> np.ndarray:
    """Manufactured solution 0.3 + 0.1 sin(x) sin(y) exp(t/2) for the forced problem."""
    x, y = grid.coordinates()[:2]
    return 0.3 + 0.1 * np.sin(x) * np.sin(y) * np.exp(0.5 * t)


def thin_film_exact_dt(grid: SpectralGrid, t: float) -> np.ndarray:
    """Time derivative of the manufactured solution."""
    x, y = grid.coordinates()[:2]
    return 0.05 * np.sin(x) * np.sin(y) * np.exp(0.5 * t)


@dataclass(frozen=True)
class _ManufacturedForcing:
    """f(t) = d/dt u_exact - F_discrete(u_exact(t)) for the base model."""

    eps: float

    def __call__(self, grid, t):
        base = thin_film(self.eps)
        u = Field(grid, thin_film_exact_solution(grid, t))
        return thin_film_exact_dt(grid, t) - eval_rhs(base, u, t).values


def forced_thin_film(eps: float) -> ModelSpec:
    """Thin-film model forced so the manufactured solution solves it exactly.

    The forcing is built from the *discrete* spatial operator,
    f(t) = d/dt u_exact - F_discrete(u_exact(t)), so u_exact solves the
    semi-discrete system exactly and convergence studies isolate temporal
    error.
    """
    base = thin_film(eps)
    forcing = _ManufacturedForcing(eps)

    return ModelSpec(
        name="forced_thin_film",
        mobility=base.mobility,
        potential=base.potential,
        potential_deriv=base.potential_deriv,
        potential_deriv2=base.potential_deriv2,
        g_fun=base.g_fun,
        g_deriv=base.g_deriv,
        eps=eps,
        positivity_floor=0.0,
        forcing=forcing,
    )


_PRESETS = {
    "classic_ch": (classic_ch, ("eps",)),
    "thin_film": (thin_film, ("eps",)),
    "chvm": (chvm, ("omega", "eps")),
    "forced_thin_film": (forced_thin_film, ("eps",)),
}


def model_from_preset(name: str, **params) -> ModelSpec:
    """Look up a preset by name, e.g. model_from_preset('thin_film', eps=0.1)."""
    if name not in _PRESETS:
        raise ConfigError(
            f"unknown model preset {name!r}; choose from {sorted(_PRESETS)}"
        )
    builder, accepted = _PRESETS[name]
    unknown = set(params) - set(accepted)
    if unknown:
        raise ConfigError(f"preset {name!r} does not accept parameters {sorted(unknown)}")
    return builder(**params)


def _check_admissible(model: ModelSpec, values: np.ndarray, step=None, stage=None):
    if not np.all(np.isfinite(values)):
        raise BlowupDetected("solution field", step=step, stage=stage)
    if model.positivity_floor is not None:
        mn = values.min()
        if mn <= model.positivity_floor:
            loc = np.unravel_index(int(np.argmin(values)), values.shape)
            raise PositivityViolation(mn, loc, step=step, stage=stage)


def eval_rhs(model: ModelSpec, u: Field, t: float = 0.0) -> Field:
    """Full spatial operator F(u) = Lap G(u) - kappa div(M(u) grad Lap u) + forcing."""
    g = u.grid
    _check_admissible(model, u.values)
    uh = g.fftn(u.values)
    lap_uh = -g.ksq * uh
    gh = g.fftn(model.g_fun(u.values))
    mob = model.mobility(u.values)
    # div(M grad Lap u): flux components pointwise, divergence spectrally
    acc = -g.ksq * gh  # Lap G(u)
    for ik in g._ikd:
        flux = mob * g.ifftn_real_unchecked(ik * lap_uh)
        acc -= model.kappa * ik * g.fftn(flux)
    out = g.ifftn_real_unchecked(acc)
    if model.forcing is not None:
        out = out + model.forcing(g, t)
    if not np.all(np.isfinite(out)):
        raise BlowupDetected("right-hand side")
    return Field(g, out)


def chemical_potential(model: ModelSpec, u: Field) -> Field:
    """w = W'(u) - kappa * Lap u."""
    g = u.grid
    _check_admissible(model, u.values)
    lap = g.ifftn_real_unchecked(-g.ksq * g.fftn(u.values))
    return Field(g, model.potential_deriv(u.values) - model.kappa * lap)


def energy(model: ModelSpec, u: Field) -> float:
    """E(u) = int W(u) + (kappa/2) |grad u|^2 by uniform grid quadrature."""
    g = u.grid
    _check_admissible(model, u.values)
    uh = g.fftn(u.values)
    grad_sq = np.zeros(g.shape)
    for ik in g._ikd:
        d = g.ifftn_real_unchecked(ik * uh)
        grad_sq += d * d
    density = model.potential(u.values) + 0.5 * model.kappa * grad_sq
    return float(density.sum() * g.cell_volume)


def mass(u: Field) -> float:
    """Grid quadrature of u (the conserved integral)."""
    u.check_finite()
    return float(u.values.sum() * u.grid.cell_volume)


def mobility_max(model: ModelSpec, u: Field) -> float:
    """Max over the grid of |M(u)|."""
    u.check_finite()
    return float(np.abs(model.mobility(u.values)).max())
