"""Per-run observables, energy-stability checks, and error metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import GridError
from .grid import Field

__all__ = [
    "RunFailure",
    "RunRecord",
    "check_energy_stability",
    "l1_error",
    "richardson_reference",
]

ENERGY_TOL_DEFAULT = 1e-12


@dataclass
class RunFailure:
    reason: str
    step: int
    time: float


@dataclass
class RunRecord:
    """Time series of diagnostics collected by the driver loop.

    ``final_state`` holds the last successfully computed field (the state at
    t_end for a clean run, or the last good state before a failure).
    """

    times: List[float] = field(default_factory=list)
    energy: List[float] = field(default_factory=list)
    mass: List[float] = field(default_factory=list)
    mobility_max: List[float] = field(default_factory=list)
    umin: List[float] = field(default_factory=list)
    umax: List[float] = field(default_factory=list)
    residual_warnings: int = 0
    failure: Optional[RunFailure] = None
    final_state: Optional[Field] = None

    def append(self, t, e, m, mb, lo, hi):
        self.times.append(t)
        self.energy.append(e)
        self.mass.append(m)
        self.mobility_max.append(mb)
        self.umin.append(lo)
        self.umax.append(hi)

    def to_csv(self, path):
        """Write `t,energy,mass,mobility_max,umin,umax` rows, 17 sig digits."""
        with open(path, "w") as fh:
            fh.write("t,energy,mass,mobility_max,umin,umax\n")
            for row in zip(self.times, self.energy, self.mass,
                           self.mobility_max, self.umin, self.umax):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def check_energy_stability(record: RunRecord, tol: float = ENERGY_TOL_DEFAULT) -> bool:
    """True iff the run completed and energy never increased beyond tolerance.

    The per-pair test is E_{n+1} <= E_n + tol*(1 + |E_n|); a failed run or
    any non-finite energy is unstable by definition.
    """
    if record.failure is not None:
        return False
    e = np.asarray(record.energy)
    if e.size == 0 or not np.all(np.isfinite(e)):
        return False
    prev, nxt = e[:-1], e[1:]
    return bool(np.all(nxt <= prev + tol * (1.0 + np.abs(prev))))


def l1_error(u: Field, u_ref: Field) -> float:
    """Cell-volume-weighted L1 norm of u - u_ref."""
    if u.grid != u_ref.grid:
        raise GridError("fields live on different grids")
    return float(np.abs(u.values - u_ref.values).sum() * u.grid.cell_volume)


def richardson_reference(model, scheme, split, u0: Field, t0: float, T: float,
                         h_fine: float) -> Field:
    """Reference solution at time T by Richardson extrapolation.

    Runs at h_fine and h_fine/2 and combines with the scheme's nominal
    order p: U* = (2^p * U_{h/2} - U_h) / (2^p - 1).
    """
    from .steppers import advance, nominal_order  # driver lives upstream

    p = nominal_order(scheme)
    rec_h = advance(scheme, split, model, u0, t0, t0 + T, h_fine, sample_every=0)
    rec_h2 = advance(scheme, split, model, u0, t0, t0 + T, h_fine / 2.0, sample_every=0)
    for rec, h in ((rec_h, h_fine), (rec_h2, h_fine / 2.0)):
        if rec.failure is not None:
            raise RuntimeError(
                f"reference run at h={h} failed: {rec.failure.reason}"
            )
    w = 2.0**p
    vals = (w * rec_h2.final_state.values - rec_h.final_state.values) / (w - 1.0)
    return Field(u0.grid, vals)
