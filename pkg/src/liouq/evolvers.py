"""Time evolution engines.

All engines use symmetric (Strang) operator splitting with the kinetic
factor applied spectrally and the potential factor applied pointwise:

* classical phase-space transport, run in the mixed (x, y)
  representation where the streaming term is the spectral phase
  exp(-i kx ky dt) and the force term is the pointwise phase
  exp(-i y v'(x) dt);
* density-grid transport with the full coupling field, pointwise phase
  exp(-i [v(Q) - v(q) + E(Q, q)] dt);
* commutator-only transport (the coupling field omitted), pointwise
  phase exp(-i [v(Q) - v(q)] dt).

The kinetic half-step phases of the classical and density engines agree
mode by mode under the shear, so for potentials of at most quadratic
order the two discrete evolutions coincide to rounding accuracy.

Every factor has unit modulus: the 2-norm is conserved exactly, the
trace of the density grid is conserved because the spectral factor is
one on the anti-diagonal modes and the pointwise phase vanishes on the
diagonal, and Hermiticity is preserved by the conjugation symmetry of
both factors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import BoundaryContaminationError, ConfigError, DomainError
from .grids import (
    DensityGrid,
    GridSpec,
    PhaseSpaceDistribution,
    XYGrid,
    boundary_fraction,
    xp_to_xy,
    xy_to_xp,
)
from .potentials import Potential, SuperoperatorField, superoperator_field

DENSE_GRID_LIMIT = 32


class TimeStepWarning(UserWarning):
    """The configured dt exceeds the spectral-phase resolution guard."""


@dataclass(frozen=True)
class EvolverConfig:
    """Stepping parameters shared by all engines.

    ``include_kinetic=False`` freezes the kinetic factor, the switch the
    decoherence studies use to isolate the potential phases.
    """

    dt: float
    n_steps: int
    scheme: str = "strang_split"
    record_every: int = 1
    tail_threshold: float = 1e-10
    include_kinetic: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.n_steps < 1:
            raise ConfigError("n_steps must be at least 1")
        if self.scheme != "strang_split":
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.record_every < 1:
            raise ConfigError("record_every must be at least 1")


@dataclass
class Trajectory:
    """Recorded snapshots of one evolution run."""

    times: List[float]
    states: list
    diagnostics: List[dict]

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ConfigError("times and states must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ConfigError("times must be strictly increasing")


def _check_dt_guard(cfg: EvolverConfig, grid: GridSpec) -> None:
    guard = 0.1 * grid.spacing**2
    if cfg.include_kinetic and cfg.dt > guard:
        warnings.warn(
            f"dt={cfg.dt:.3e} exceeds the kinetic-phase guard {guard:.3e} "
            f"for spacing {grid.spacing:.3e}",
            TimeStepWarning,
            stacklevel=3,
        )


def _check_tail(work: np.ndarray, cfg: EvolverConfig, step: int) -> float:
    tail = boundary_fraction(work)
    if tail > cfg.tail_threshold:
        raise BoundaryContaminationError(step, tail, cfg.tail_threshold)
    return tail


def _record_steps(cfg: EvolverConfig) -> set:
    steps = set(range(cfg.record_every, cfg.n_steps + 1, cfg.record_every))
    steps.add(cfg.n_steps)
    return steps


# ---------------------------------------------------------------------------
# classical transport


def liouville_evolve_xp(
    f0: PhaseSpaceDistribution, v: Potential, cfg: EvolverConfig
) -> Trajectory:
    """Evolve a phase-space density under -∂t f = (p ∂x - v'(x) ∂p) f.

    Runs in the mixed (x, y) representation; snapshots are transformed
    back to (x, p).  Mass is conserved exactly because the zero mode of
    the streaming phase and the y = 0 line of the force phase are one.
    """
    grid = f0.grid
    _check_dt_guard(cfg, grid)
    n = grid.n_points
    work = xp_to_xy(f0).values.copy()
    dt = cfg.dt

    kin_half = None
    if cfg.include_kinetic:
        kx = 2.0 * np.pi * np.fft.fftfreq(n, grid.spacing)
        ky = 2.0 * np.pi * np.fft.fftfreq(n, grid.y_spacing)
        kin_half = np.exp(-0.5j * dt * np.outer(kx, ky))

    x = grid.x
    y = grid.y
    static_force = None
    if not v.time_dependent:
        static_force = np.exp(-1j * dt * np.outer(v.derivative(x), y))

    def snapshot(t: float) -> PhaseSpaceDistribution:
        return xy_to_xp(XYGrid(grid, work, t))

    record_at = _record_steps(cfg)
    times = [f0.time]
    states: list = [f0]
    diags = [
        {
            "mass": f0.mass(),
            "min_value": float(f0.values.min()),
            "boundary_fraction": boundary_fraction(work),
        }
    ]
    for step in range(1, cfg.n_steps + 1):
        t_mid = f0.time + (step - 0.5) * dt
        if kin_half is not None:
            work = np.fft.ifft2(np.fft.fft2(work) * kin_half)
        if static_force is not None:
            work *= static_force
        else:
            work *= np.exp(-1j * dt * np.outer(v.derivative(x, t_mid), y))
        if kin_half is not None:
            work = np.fft.ifft2(np.fft.fft2(work) * kin_half)
        tail = _check_tail(work, cfg, step)
        if step in record_at:
            t = f0.time + step * dt
            snap = snapshot(t)
            times.append(t)
            states.append(snap)
            diags.append(
                {
                    "mass": snap.mass(),
                    "min_value": float(snap.values.min()),
                    "boundary_fraction": tail,
                }
            )
    return Trajectory(times, states, diags)


# ---------------------------------------------------------------------------
# density-grid transport


def _density_diag(state: DensityGrid, tail: float) -> dict:
    defect = float(np.abs(state.values - state.values.conj().T).max())
    return {
        "trace": state.trace(),
        "hermiticity_defect": defect,
        "boundary_fraction": tail,
    }


def _evolve_density(
    f0: DensityGrid,
    v: Potential,
    extra: np.ndarray | None,
    cfg: EvolverConfig,
) -> Trajectory:
    grid = f0.grid
    _check_dt_guard(cfg, grid)
    n = grid.n_points
    dt = cfg.dt
    work = f0.values.copy()

    kin_half = None
    if cfg.include_kinetic:
        k = 2.0 * np.pi * np.fft.fftfreq(n, grid.spacing)
        k2 = k**2
        kin_half = np.exp(-0.25j * dt * (k2[:, None] - k2[None, :]))

    x = grid.x

    def potential_phase(t_mid: float) -> np.ndarray:
        vx = v.value(x, t_mid)
        pot = vx[:, None] - vx[None, :]
        if extra is not None:
            pot = pot + extra
        return np.exp(-1j * dt * pot)

    static_phase = None if v.time_dependent else potential_phase(0.0)

    record_at = _record_steps(cfg)
    times = [f0.time]
    states: list = [f0]
    diags = [_density_diag(f0, boundary_fraction(work))]
    for step in range(1, cfg.n_steps + 1):
        if kin_half is not None:
            work = np.fft.ifft2(np.fft.fft2(work) * kin_half)
        if static_phase is not None:
            work *= static_phase
        else:
            work *= potential_phase(f0.time + (step - 0.5) * dt)
        if kin_half is not None:
            work = np.fft.ifft2(np.fft.fft2(work) * kin_half)
        tail = _check_tail(work, cfg, step)
        if step in record_at:
            t = f0.time + step * dt
            state = DensityGrid(grid, work.copy(), t)
            times.append(t)
            states.append(state)
            diags.append(_density_diag(state, tail))
    return Trajectory(times, states, diags)


def _require_hermitian(f0: DensityGrid) -> None:
    defect = float(np.abs(f0.values - f0.values.conj().T).max())
    scale = max(float(np.abs(f0.values).max()), 1.0)
    if defect > 1e-9 * scale:
        raise DomainError(f"initial state not Hermitian: defect {defect:.3e}")


def qq_liouville_evolve(
    f0: DensityGrid,
    v: Potential,
    E: SuperoperatorField,
    cfg: EvolverConfig,
) -> Trajectory:
    """Density-grid transport including the coupling field E(Q, q)."""
    if E.grid != f0.grid:
        raise ConfigError("coupling field grid does not match the state grid")
    _require_hermitian(f0)
    return _evolve_density(f0, v, E.values, cfg)


def von_neumann_evolve(
    f0: DensityGrid, v: Potential, cfg: EvolverConfig
) -> Trajectory:
    """Commutator-only density-grid transport (coupling field omitted)."""
    _require_hermitian(f0)
    return _evolve_density(f0, v, None, cfg)


# ---------------------------------------------------------------------------
# dense generator


def dense_generator(v: Potential, small_grid: GridSpec):
    """Assemble the full evolution generator as a dense symmetric matrix.

    Uses three-point periodic finite-difference Laplacians plus the
    diagonal v(Q) - v(q) + E(Q, q).  Returns the matrix together with
    its sorted eigenvalues; the permutation swapping Q and q maps the
    generator to its negative, so the spectrum is symmetric about zero.
    """
    n = small_grid.n_points
    if n > DENSE_GRID_LIMIT:
        raise DomainError(
            f"dense generator limited to {DENSE_GRID_LIMIT} points per axis"
        )
    dx = small_grid.spacing
    lap = (
        -2.0 * np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1)
    )
    lap[0, -1] += 1.0
    lap[-1, 0] += 1.0
    lap /= dx**2
    h1 = -0.5 * lap + np.diag(v.value(small_grid.x))
    eye = np.eye(n)
    field = superoperator_field(v, small_grid).values
    gen = np.kron(h1, eye) - np.kron(eye, h1) + np.diag(field.ravel())
    eigenvalues = np.linalg.eigvalsh(gen)
    return gen, eigenvalues
