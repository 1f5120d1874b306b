"""Quenched potential noise, noisy ensembles, and the dissipative stepper.

A noise realization is one static field dV(x) with independent Gaussian
cells of standard deviation nu(x); the continuum delta correlation is
read as a Kronecker delta on the lattice, so the quenched average of
the pure-phase evolution has the closed form

    <f(x, y; t)> = f(x, y; 0) exp(-t^2 [nu^2(x) + nu^2(y)] / 2)

off the diagonal, with diagonal elements exactly unchanged.  The same
law is the stationary-phase limit of the dissipative stepper, whose
decay coefficient grows linearly in time; stepping uses the midpoint
value of that coefficient, which integrates the linear growth exactly.

Realizations are drawn from counter-based streams keyed by
(seed, realization index), so results do not depend on evaluation
order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import ConfigError, DomainError, RealizationError
from .evolvers import EvolverConfig, Trajectory, _evolve_density, _record_steps
from .grids import DensityGrid, GridSpec, boundary_fraction
from .potentials import Potential

_DISTRIBUTIONS = ("gaussian",)
_MODES = ("quenched", "resampled")


@dataclass(frozen=True)
class NoiseSpec:
    """Width profile nu(x) plus the stream seed.

    ``nu`` may be a scalar, an array over the spatial lattice, or a
    callable of x.
    """

    nu: object
    seed: int = 0
    distribution: str = "gaussian"

    def __post_init__(self):
        if self.distribution not in _DISTRIBUTIONS:
            raise ConfigError(f"unknown noise distribution {self.distribution!r}")
        if int(self.seed) < 0:
            raise ConfigError("seed must be non-negative")

    def nu_on_grid(self, grid: GridSpec) -> np.ndarray:
        if callable(self.nu):
            prof = np.asarray(self.nu(grid.x), dtype=float)
        elif np.ndim(self.nu) == 0:
            prof = np.full(grid.n_points, float(self.nu))
        else:
            prof = np.asarray(self.nu, dtype=float)
        if prof.shape != (grid.n_points,):
            raise ConfigError("nu profile length does not match the grid")
        if not np.all(np.isfinite(prof)) or np.any(prof < 0):
            raise DomainError("nu must be finite and non-negative")
        return prof


@dataclass(frozen=True)
class NoiseField:
    """One sampled realization dV(x)."""

    values: np.ndarray
    seed: int
    index: int


def _stream(seed: int, index: int) -> np.random.Generator:
    key = np.array([np.uint64(seed), np.uint64(index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_noise(spec: NoiseSpec, grid: GridSpec, k: int) -> NoiseField:
    """Draw realization ``k``: independent cells, mean 0, std nu(x)."""
    profile = spec.nu_on_grid(grid)
    rng = _stream(spec.seed, k)
    values = profile * rng.standard_normal(grid.n_points)
    return NoiseField(values, spec.seed, k)


@dataclass(frozen=True)
class _PerturbedPotential(Potential):
    """Base potential plus a lattice-sampled field.

    The field enters the evolution only through values on the spatial
    lattice, where the interpolation is exact.
    """

    base: Potential
    grid: GridSpec
    field: np.ndarray
    kind = "perturbed"
    harmonic_order = False

    @property
    def time_dependent(self) -> bool:
        return self.base.time_dependent

    def value(self, x, t: float = 0.0):
        return self.base.value(x, t) + np.interp(
            np.asarray(x, dtype=float), self.grid.x, self.field
        )

    def derivative(self, x, t: float = 0.0):
        raise DomainError("lattice-sampled noise has no pointwise derivative")


@dataclass
class EnsembleReport:
    """Averaged states and per-element standard errors per recorded time."""

    n_realizations: int
    mode: str
    seed: int
    times: List[float]
    mean_states: List[DensityGrid]
    stderr: List[np.ndarray]

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ConfigError("need at least one realization")
        for err in self.stderr:
            if np.any(err < 0):
                raise DomainError("standard errors cannot be negative")


def _resampled_evolve(
    f0: DensityGrid,
    V: Potential,
    spec: NoiseSpec,
    k: int,
    cfg: EvolverConfig,
) -> Trajectory:
    # Exploratory mode: a fresh field each step instead of one static
    # draw per realization.  The decay it produces depends on dt.
    grid = f0.grid
    n = grid.n_points
    profile = spec.nu_on_grid(grid)
    rng = _stream(spec.seed, k)
    work = f0.values.copy()
    kin_half = None
    if cfg.include_kinetic:
        kvec = 2.0 * np.pi * np.fft.fftfreq(n, grid.spacing)
        k2 = kvec**2
        kin_half = np.exp(-0.25j * cfg.dt * (k2[:, None] - k2[None, :]))
    vx = V.value(grid.x)
    record_at = _record_steps(cfg)
    times = [f0.time]
    states: list = [f0]
    diags: list = [{"boundary_fraction": boundary_fraction(work)}]
    for step in range(1, cfg.n_steps + 1):
        dv = profile * rng.standard_normal(n)
        vv = vx + dv
        phase = np.exp(-1j * cfg.dt * (vv[:, None] - vv[None, :]))
        if kin_half is not None:
            work = np.fft.ifft2(np.fft.fft2(work) * kin_half)
        work *= phase
        if kin_half is not None:
            work = np.fft.ifft2(np.fft.fft2(work) * kin_half)
        if step in record_at:
            t = f0.time + step * cfg.dt
            times.append(t)
            states.append(DensityGrid(grid, work.copy(), t))
            diags.append({"boundary_fraction": boundary_fraction(work)})
    return Trajectory(times, states, diags)


def ensemble_evolve(
    f0: DensityGrid,
    V: Potential,
    spec: NoiseSpec,
    M: int,
    cfg: EvolverConfig,
    mode: str = "quenched",
) -> EnsembleReport:
    """Average M noisy commutator evolutions of the same initial state.

    Each quenched realization evolves under V + dV_k with dV_k static
    over the whole window.  Means and elementwise standard errors are
    accumulated at every recorded time.
    """
    if M < 2:
        raise DomainError("need M >= 2 realizations for error bars")
    if mode not in _MODES:
        raise ConfigError(f"unknown ensemble mode {mode!r}")
    grid = f0.grid
    sums = None
    sq_re = None
    sq_im = None
    times = None
    for k in range(M):
        try:
            if mode == "quenched":
                field = sample_noise(spec, grid, k)
                noisy = _PerturbedPotential(V, grid, field.values)
                traj = _evolve_density(f0, noisy, None, cfg)
            else:
                traj = _resampled_evolve(f0, V, spec, k, cfg)
        except Exception as exc:  # annotate with the realization index
            raise RealizationError(k, exc) from exc
        stack = np.array([state.values for state in traj.states])
        if sums is None:
            times = traj.times
            sums = np.zeros_like(stack)
            sq_re = np.zeros(stack.shape)
            sq_im = np.zeros(stack.shape)
        sums += stack
        sq_re += stack.real**2
        sq_im += stack.imag**2
    mean = sums / M
    var = (sq_re / M - mean.real**2) + (sq_im / M - mean.imag**2)
    var = np.clip(var, 0.0, None) * M / (M - 1)
    stderr = np.sqrt(var / M)
    mean_states = [
        DensityGrid(grid, mean[i], t) for i, t in enumerate(times)
    ]
    return EnsembleReport(
        n_realizations=M,
        mode=mode,
        seed=spec.seed,
        times=list(times),
        mean_states=mean_states,
        stderr=[stderr[i] for i in range(len(times))],
    )


# ---------------------------------------------------------------------------
# dissipative stepper and its closed form


def _decay_rates(nu_profile: np.ndarray) -> np.ndarray:
    rates = nu_profile[:, None] ** 2 + nu_profile[None, :] ** 2
    np.fill_diagonal(rates, 0.0)
    return rates


def lindblad_evolve(
    f0: DensityGrid, V: Potential, nu, cfg: EvolverConfig
) -> Trajectory:
    """Unitary transport plus off-diagonal damping with linearly growing rate.

    Per step: unitary half-step, pointwise factor
    exp(-(t + dt/2) dt [nu^2(Q) + nu^2(q)]) off the diagonal, unitary
    half-step.  The diagonal is untouched, so the trace is conserved
    exactly by the dissipative factor, and with nu = 0 the two unitary
    halves merge into one commutator-transport step.
    """
    grid = f0.grid
    spec = nu if isinstance(nu, NoiseSpec) else NoiseSpec(nu)
    profile = spec.nu_on_grid(grid)
    rates = _decay_rates(profile)
    n = grid.n_points
    dt = cfg.dt

    kin_half = None
    if cfg.include_kinetic:
        k = 2.0 * np.pi * np.fft.fftfreq(n, grid.spacing)
        k2 = k**2
        kin_half = np.exp(-0.25j * dt * (k2[:, None] - k2[None, :]))
    vx = V.value(grid.x)
    pot_half = np.exp(-0.5j * dt * (vx[:, None] - vx[None, :]))

    work = f0.values.copy()
    record_at = _record_steps(cfg)
    times = [f0.time]
    states: list = [f0]
    diags = [{"trace": f0.trace(), "boundary_fraction": boundary_fraction(work)}]
    for step in range(1, cfg.n_steps + 1):
        t_prev = f0.time + (step - 1) * dt
        if kin_half is not None:
            work = np.fft.ifft2(np.fft.fft2(work) * kin_half)
        work *= pot_half
        work *= np.exp(-(t_prev + 0.5 * dt) * dt * rates)
        work *= pot_half
        if kin_half is not None:
            work = np.fft.ifft2(np.fft.fft2(work) * kin_half)
        if step in record_at:
            t = f0.time + step * dt
            state = DensityGrid(grid, work.copy(), t)
            times.append(t)
            states.append(state)
            diags.append(
                {"trace": state.trace(), "boundary_fraction": boundary_fraction(work)}
            )
    return Trajectory(times, states, diags)


def decay_predict(f0: DensityGrid, nu, t: float) -> DensityGrid:
    """Closed-form off-diagonal decay with the transport part neglected.

    f(Q, q; t) = f(Q, q; 0) exp(-t^2 [nu^2(Q) + nu^2(q)] / 2) off the
    diagonal; diagonal elements are unchanged.
    """
    spec = nu if isinstance(nu, NoiseSpec) else NoiseSpec(nu)
    profile = spec.nu_on_grid(f0.grid)
    factor = np.exp(-0.5 * t**2 * _decay_rates(profile))
    return DensityGrid(f0.grid, f0.values * factor, f0.time + t)


def compare_ensemble_vs_lindblad(
    report: EnsembleReport, traj: Trajectory, nu=None
) -> dict:
    """Per-time distances between the averaged ensemble and the stepper.

    The PASS flag requires elementwise agreement within three standard
    errors over the window t * max(nu) <= 2, with a small allowance for
    the expected tail of the error distribution (a strict all-elements
    rule would fail statistically on large grids).
    """
    times = report.times
    traj_by_time = {round(t, 12): s for t, s in zip(traj.times, traj.states)}
    maxnorm = []
    l2 = []
    worst_z = 0.0
    n_checked = 0
    n_exceed = 0
    nu_max = None
    if nu is not None:
        spec = nu if isinstance(nu, NoiseSpec) else NoiseSpec(nu)
        nu_max = float(spec.nu_on_grid(report.mean_states[0].grid).max())
    for idx, t in enumerate(times):
        key = round(t, 12)
        if key not in traj_by_time:
            raise ConfigError(f"trajectory lacks recorded time {t}")
        mean_state = report.mean_states[idx]
        other = traj_by_time[key]
        if other.grid != mean_state.grid:
            raise ConfigError("ensemble and trajectory grids do not match")
        diff = np.abs(mean_state.values - other.values)
        grid = mean_state.grid
        maxnorm.append(float(diff.max()))
        l2.append(float(np.sqrt((diff**2).sum()) * grid.spacing))
        # without a width profile every time is inside the gated window
        if nu_max is not None and t * nu_max > 2.0:
            continue
        err = report.stderr[idx]
        floor = 1e-13 * max(float(np.abs(mean_state.values).max()), 1.0)
        z = diff / np.maximum(err, floor)
        worst_z = max(worst_z, float(z.max()))
        n_checked += z.size
        n_exceed += int((z > 3.0).sum())
    exceed_fraction = n_exceed / n_checked if n_checked else 0.0
    passed = n_checked > 0 and exceed_fraction <= 0.02 and worst_z <= 6.0
    return {
        "times": list(times),
        "maxnorm": maxnorm,
        "l2": l2,
        "max_z": worst_z,
        "exceed_fraction": exceed_fraction,
        "pass": passed,
    }
