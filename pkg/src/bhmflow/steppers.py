"""The four time-stepping schemes and the driver loop.

Schemes: iterated backward-Euler (BE_J), iterated Crank-Nicolson (CN_J),
and two multi-stage IMEX integrators (IMEX1: three stages, IMEX2: two
stages with gamma = 1 - 1/sqrt(2), delta = -1/sqrt(2)). Each advances one
field by a single step h against a model and split configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .diagnostics import RunFailure, RunRecord
from .errors import BhmflowError, BlowupDetected, ConfigError, PositivityViolation
from .grid import Field
from .models import ModelSpec, energy, eval_rhs, mass, mobility_max
from .splitting import SplitConfig, apply_f_ex, apply_f_im, implicit_solve, resolve_m2

__all__ = [
    "SchemeConfig",
    "StepResult",
    "step",
    "step_be",
    "step_cn",
    "step_imex1",
    "step_imex2",
    "advance",
    "nominal_order",
]

IMEX2_GAMMA = 1.0 - 1.0 / math.sqrt(2.0)
IMEX2_DELTA = -1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class SchemeConfig:
    """Time-stepper selection.

    kind: 'be', 'cn', 'imex1' or 'imex2'; j is the iteration count for
    be/cn. initial_iterate 'extrapolated' seeds the iteration with
    2*U_n - U_{n-1} when a previous step exists (off by default; the
    reproduced results all use the previous state).
    """

    kind: str
    j: int = 1
    initial_iterate: str = "previous"

    def __post_init__(self):
        if self.kind not in ("be", "cn", "imex1", "imex2"):
            raise ConfigError(f"unknown scheme kind {self.kind!r}")
        if self.j < 1:
            raise ConfigError(f"iteration count must be >= 1, got {self.j}")
        if self.initial_iterate not in ("previous", "extrapolated"):
            raise ConfigError(f"unknown initial_iterate {self.initial_iterate!r}")

    def label(self):
        if self.kind in ("be", "cn"):
            return f"{self.kind}{self.j}"
        return self.kind


@dataclass
class StepResult:
    """One accepted step: new state plus bookkeeping.

    fex_evals counts explicit-operator applications in the scheme formula
    (J for BE_J, J+1 for CN_J, 3 for both IMEX schemes; IMEX2's repeated
    F_ex(U_(0)) is cached but still counted).
    """

    u_next: Field
    t_next: float
    fex_evals: int
    iterate_residuals: List[float] = field(default_factory=list)
    residual_warning: bool = False


def nominal_order(scheme: SchemeConfig) -> int:
    """Formal temporal order: 1 for BE_J and CN_1, 2 for CN_J>=2 and IMEX."""
    if scheme.kind == "be":
        return 1
    if scheme.kind == "cn":
        return 1 if scheme.j == 1 else 2
    return 2


def _initial_iterate(scheme, u_n, u_prev):
    if scheme.initial_iterate == "extrapolated" and u_prev is not None:
        return Field(u_n.grid, 2.0 * u_n.values - u_prev.values)
    return u_n


def step_be(scheme, split, model, u_n, u_prev, t, h):
    """BE_J: iterate U_(j) = solve(U_n + h*F_ex(U_(j-1)), weight 1).

    Any forcing is sampled at t+h, consistent with the fully implicit
    scheme the iteration approximates.
    """
    m2 = resolve_m2(split, model, u_n)
    u_j = _initial_iterate(scheme, u_n, u_prev)
    residuals = []
    prev_vals = u_j.values
    for _ in range(scheme.j):
        fex = apply_f_ex(split, m2, model, u_j, t + h)
        rhs = Field(u_n.grid, u_n.values + h * fex.values)
        u_j = implicit_solve(split, m2, rhs, 1.0, h)
        residuals.append(float(np.abs(u_j.values - prev_vals).max()))
        prev_vals = u_j.values
    warn = any(b > a for a, b in zip(residuals, residuals[1:]))
    return StepResult(u_j, t + h, scheme.j, residuals, warn)


def step_cn(scheme, split, model, u_n, u_prev, t, h):
    """CN_J: iterate with half-weights against the frozen full F(U_n).

    Trapezoidal in time: the frozen operator samples any forcing at t, the
    iterated explicit part at t+h.
    """
    m2 = resolve_m2(split, model, u_n)
    # full operator at U_n, computed once per step (counts as one F_ex)
    f_n = eval_rhs(model, u_n, t).values
    u_j = _initial_iterate(scheme, u_n, u_prev)
    residuals = []
    prev_vals = u_j.values
    for _ in range(scheme.j):
        fex = apply_f_ex(split, m2, model, u_j, t + h)
        rhs = Field(u_n.grid, u_n.values + h * (0.5 * fex.values + 0.5 * f_n))
        u_j = implicit_solve(split, m2, rhs, 0.5, h)
        residuals.append(float(np.abs(u_j.values - prev_vals).max()))
        prev_vals = u_j.values
    warn = any(b > a for a, b in zip(residuals, residuals[1:]))
    return StepResult(u_j, t + h, scheme.j + 1, residuals, warn)


def step_imex1(scheme, split, model, u_n, u_prev, t, h):
    """Three-stage second-order IMEX scheme.

    Stage times follow the tableau row sums: U_(1) approximates t+h, U_(2)
    approximates t, so forcing is sampled at (t, t+h, t) across the three
    explicit evaluations (trapezoidal quadrature overall).
    """
    m2 = resolve_m2(split, model, u_n)
    g = u_n.grid
    u0 = u_n
    fex0 = apply_f_ex(split, m2, model, u0, t)
    u1 = implicit_solve(split, m2, Field(g, u0.values + h * fex0.values), 1.0, h)
    fex1 = apply_f_ex(split, m2, model, u1, t + h)
    u2 = implicit_solve(
        split, m2,
        Field(g, 1.5 * u0.values - 0.5 * u1.values + 0.5 * h * fex1.values),
        0.5, h,
    )
    fex2 = apply_f_ex(split, m2, model, u2, t)
    u3 = implicit_solve(split, m2, Field(g, u2.values + h * fex2.values), 1.0, h)
    return StepResult(u3, t + h, 3)


def step_imex2(scheme, split, model, u_n, u_prev, t, h):
    """Two-stage second-order IMEX scheme (gamma/delta coefficients).

    The second stage applies F_im(U_(1)) explicitly with weight (1-gamma);
    that is one extra linear-operator application, not an F_ex evaluation.
    U_(1) approximates t + gamma*h, so any forcing in the second explicit
    evaluation is sampled there; the quadrature delta*f(t) +
    (1-delta)*f(t+gamma*h) is second order since (1-delta)*gamma = 1/2.
    """
    m2 = resolve_m2(split, model, u_n)
    g = u_n.grid
    gam, dlt = IMEX2_GAMMA, IMEX2_DELTA
    u0 = u_n
    fex0 = apply_f_ex(split, m2, model, u0, t)
    u1 = implicit_solve(split, m2, Field(g, u0.values + h * gam * fex0.values), gam, h)
    fex1 = apply_f_ex(split, m2, model, u1, t + gam * h)
    fim1 = apply_f_im(split, m2, u1)
    rhs = u0.values + h * (
        dlt * fex0.values + (1.0 - dlt) * fex1.values + (1.0 - gam) * fim1.values
    )
    u2 = implicit_solve(split, m2, Field(g, rhs), gam, h)
    return StepResult(u2, t + h, 3)


_STEPPERS = {"be": step_be, "cn": step_cn, "imex1": step_imex1, "imex2": step_imex2}


def step(scheme, split, model, u_n, u_prev, t, h) -> StepResult:
    """Advance one step with the configured scheme."""
    return _STEPPERS[scheme.kind](scheme, split, model, u_n, u_prev, t, h)


def advance(scheme: SchemeConfig, split: SplitConfig, model: ModelSpec,
            u0: Field, t0: float, t_end: float = None, h: float = None,
            sample_every: int = 1, observer=None,
            record_state: bool = True, num_steps: int = None) -> RunRecord:
    """Repeated stepping from t0 with per-step diagnostics.

    Either ``t_end`` (final partial step shortened to land on it exactly) or
    ``num_steps`` (exactly that many steps of size h, regardless of the
    final time) must be given. A failed step (positivity violation or
    blowup) aborts the run; the record then carries the failure reason and
    the last good state. ``sample_every`` controls the diagnostics stride
    (0 disables all sampling except the failure path).
    ``observer(step_index, t, field)`` is called after each accepted step
    and once at t0.
    """
    if (t_end is None) == (num_steps is None):
        raise ConfigError("advance needs exactly one of t_end or num_steps")
    record = RunRecord()
    u = u0
    t = float(t0)
    u_prev = None

    def sample(tt, uu):
        record.append(tt, energy(model, uu), mass(uu), mobility_max(model, uu),
                      float(uu.values.min()), float(uu.values.max()))

    def more_steps(n):
        if num_steps is not None:
            return n < num_steps
        return t < t_end - 1e-12 * max(1.0, abs(t_end))

    try:
        if sample_every:
            sample(t, u)
        if observer is not None:
            observer(0, t, u)
        n = 0
        while more_steps(n):
            hn = h if num_steps is not None else min(h, t_end - t)
            try:
                result = step(scheme, split, model, u, u_prev, t, hn)
            except (PositivityViolation, BlowupDetected) as exc:
                exc.step = n + 1
                raise
            u_prev = u
            u = result.u_next
            t = result.t_next
            n += 1
            if result.residual_warning:
                record.residual_warnings += 1
            if sample_every and n % sample_every == 0:
                sample(t, u)
            if observer is not None:
                observer(n, t, u)
        if sample_every and record.times and record.times[-1] != t:
            sample(t, u)
    except (PositivityViolation, BlowupDetected) as exc:
        record.failure = RunFailure(reason=str(exc), step=getattr(exc, "step", -1) or -1,
                                    time=t)
    if record_state:
        record.final_state = u
    return record
