"""Experiment pipelines: equivalence, divergence, decoherence, void studies.

Each study returns a :class:`RunReport` whose checks carry the violated
threshold and the observed value on failure, plus a curves dictionary
that :func:`emit_outputs` turns into CSV/gnuplot files with an index.
"""

from __future__ import annotations

import json
import time as _time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .causet import SprinkleRegion, void_probability_mc
from .errors import DomainError
from .evolvers import (
    dense_generator,
    liouville_evolve_xp,
    qq_liouville_evolve,
    von_neumann_evolve,
)
from .grids import save_state, xp_to_Qq
from .potentials import PiecewiseLinear, linearize, segment_sum, superoperator_field
from .scenario import Scenario
from .stochastic import (
    compare_ensemble_vs_lindblad,
    decay_predict,
    ensemble_evolve,
    lindblad_evolve,
)

EQUIVALENCE_TOL = 1e-6
DIVERGENCE_MIN = 1e-3
DRIFT_TOL = 1e-9
DECAY_FIT_TOL = 0.05
SEGMENT_TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    threshold: float
    observed: float
    comparison: str = "<="


@dataclass
class RunReport:
    study: str
    scenario_hash: str
    seeds: dict
    metrics: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks.values())

    def add_check(self, name, observed, threshold, comparison="<="):
        ops = {"<=": lambda o, t: o <= t, ">=": lambda o, t: o >= t}
        self.checks[name] = CheckResult(
            bool(ops[comparison](observed, threshold)),
            float(threshold),
            float(observed),
            comparison,
        )


def _pairwise_distance(a: np.ndarray, b: np.ndarray, spacing: float):
    diff = np.abs(a - b)
    return float(diff.max()), float(np.sqrt((diff**2).sum()) * spacing)


def run_equivalence_study(scenario: Scenario):
    """Run all three engines from one ensemble and measure their distances.

    For potentials of at most quadratic order the transformed classical
    trajectory must match both density-grid engines; anharmonic kinds
    are expected to diverge and the report records the divergence
    instead.
    """
    t0 = _time.perf_counter()
    grid = scenario.build_grid()
    v = scenario.build_potential()
    cfg = scenario.build_evolver_config()
    f0_xp = scenario.build_initial_xp()
    f0_qq = xp_to_Qq(f0_xp)
    field_e = superoperator_field(v, grid)

    classical = liouville_evolve_xp(f0_xp, v, cfg)
    quantum = von_neumann_evolve(f0_qq, v, cfg)
    coupled = qq_liouville_evolve(f0_qq, v, field_e, cfg)

    times = classical.times
    classical_qq = [xp_to_Qq(state).values for state in classical.states]
    pairs = {
        "classical_vs_vonneumann": (classical_qq, [s.values for s in quantum.states]),
        "classical_vs_qq": (classical_qq, [s.values for s in coupled.states]),
        "qq_vs_vonneumann": (
            [s.values for s in coupled.states],
            [s.values for s in quantum.states],
        ),
    }
    distances = {}
    for name, (seq_a, seq_b) in pairs.items():
        maxnorm = []
        l2 = []
        for a, b in zip(seq_a, seq_b):
            m, l = _pairwise_distance(a, b, grid.spacing)
            maxnorm.append(m)
            l2.append(l)
        distances[name] = {"maxnorm": maxnorm, "l2": l2}

    report = RunReport(
        study="equivalence",
        scenario_hash=scenario.content_hash,
        seeds={},
    )
    trace0 = quantum.diagnostics[0]["trace"].real
    trace_drift = max(
        abs(d["trace"].real - trace0) for d in quantum.diagnostics
    )
    herm_drift = max(d["hermiticity_defect"] for d in quantum.diagnostics)
    report.metrics["trace_drift"] = trace_drift
    report.metrics["hermiticity_drift"] = herm_drift
    report.add_check("trace_drift", trace_drift, DRIFT_TOL)
    report.add_check("hermiticity_drift", herm_drift, DRIFT_TOL)

    cv = distances["classical_vs_vonneumann"]["maxnorm"]
    if v.harmonic_order:
        worst = max(max(d["maxnorm"]) for d in distances.values())
        report.metrics["max_pairwise_distance"] = worst
        report.add_check("pairwise_distance", worst, EQUIVALENCE_TOL)
    else:
        report.metrics["divergence_expected"] = True
        at_t1 = [d for t, d in zip(times, cv) if t >= 1.0 - 1e-9]
        if at_t1:
            report.add_check("divergence_at_t1", at_t1[0], DIVERGENCE_MIN, ">=")
        window = [d for t, d in zip(times, cv) if t >= 0.5 - 1e-9]
        monotone = float(np.all(np.diff(window) > 0)) if len(window) > 1 else 0.0
        report.add_check("divergence_monotone", monotone, 1.0, ">=")
        report.metrics["final_distance"] = cv[-1]

    report.wall_time = _time.perf_counter() - t0
    curves = {
        "times": times,
        "distances": distances,
        "snapshots": {
            "classical_final": classical.states[-1],
            "vonneumann_final": quantum.states[-1],
            "qq_final": coupled.states[-1],
        },
    }
    return report, curves


def fit_decay_exponent(times, magnitudes, initial, sigmas=None):
    """Least-squares slope of -log(|f|/|f0|) against t^2 through the origin.

    ``sigmas`` are absolute uncertainties of the magnitudes; when given,
    points are weighted by the implied log-scale variance, which keeps
    late, fully decayed samples from dominating the fit.
    """
    t2 = np.asarray(times, dtype=float) ** 2
    mags = np.asarray(magnitudes, dtype=float)
    y = -np.log(mags / initial)
    if sigmas is None:
        weights = np.ones_like(t2)
    else:
        rel = np.asarray(sigmas, dtype=float) / mags
        weights = 1.0 / np.maximum(rel, 1e-12) ** 2
    denom = float((weights * t2**2).sum())
    if denom == 0.0:
        raise DomainError("need at least one positive time to fit a decay")
    return float((weights * t2 * y).sum() / denom)


def _default_probes(scenario: Scenario, grid):
    if scenario["probes"] is not None:
        return [tuple(p) for p in scenario["probes"]]
    if scenario["state.kind"] == "cat":
        half = scenario["state.separation"] / 2.0
        i_plus = int(np.argmin(np.abs(grid.x - half)))
        i_minus = int(np.argmin(np.abs(grid.x + half)))
        return [(i_plus, i_minus), (i_plus, i_plus)]
    center = int(np.argmin(np.abs(grid.x - scenario["state.x0"])))
    off = min(center + max(2, grid.n_points // 16), grid.n_points - 1)
    return [(center, off), (center, center)]


def run_decoherence_study(scenario: Scenario, realizations=None, mode=None):
    """Noisy-ensemble decay versus the dissipative stepper and closed form."""
    t0 = _time.perf_counter()
    grid = scenario.build_grid()
    v = scenario.build_potential() if scenario["potential.kind"] else None
    if v is None:
        from .potentials import Constant

        v = Constant(0.0)
    cfg = scenario.build_evolver_config()
    spec = scenario.build_noise_spec()
    M = realizations if realizations is not None else scenario["ensemble.realizations"]
    mode = mode if mode is not None else scenario["noise.mode"]
    f0 = scenario.build_initial_density()
    probes = _default_probes(scenario, grid)

    report = RunReport(
        study="decoherence",
        scenario_hash=scenario.content_hash,
        seeds={"noise": spec.seed},
    )

    quenched = mode == "quenched"
    ensemble = ensemble_evolve(f0, v, spec, M, cfg, mode=mode)
    stepped = lindblad_evolve(f0, v, spec, cfg)
    comparison = compare_ensemble_vs_lindblad(ensemble, stepped, nu=spec)
    report.metrics["mode"] = mode
    report.metrics["comparison_max_z"] = comparison["max_z"]
    report.metrics["comparison_exceed_fraction"] = comparison["exceed_fraction"]
    if quenched:
        # the stepper approximates the quenched average; the resampled
        # mode follows a different law and is reported without gating
        report.add_check(
            "ensemble_vs_stepper", float(comparison["pass"]), 1.0, ">="
        )

    nu_profile = spec.nu_on_grid(grid)
    times = np.asarray(ensemble.times[1:])
    probe_curves = {}
    hamiltonian_off = (not cfg.include_kinetic) and np.allclose(
        v.value(grid.x), v.value(grid.x)[0]
    )
    for idx, (i, j) in enumerate(probes):
        ref = abs(f0.values[i, j])
        mags = np.array(
            [abs(s.values[i, j]) for s in ensemble.mean_states[1:]]
        )
        predicted = np.array(
            [abs(decay_predict(f0, spec, t).values[i, j]) for t in times]
        )
        errs = np.array([e[i, j] for e in ensemble.stderr[1:]])
        probe_curves[idx] = {
            "probe": (i, j),
            "t": times.tolist(),
            "abs_f": mags.tolist(),
            "predicted": predicted.tolist(),
            "stderr": errs.tolist(),
        }
        if i == j:
            if quenched:
                flat = float(np.abs(mags - ref).max())
                report.add_check(f"diagonal_probe_{idx}_flat", flat, 1e-12)
            continue
        rate = 0.5 * (nu_profile[i] ** 2 + nu_profile[j] ** 2)
        if quenched and ref > 0 and rate > 0 and hamiltonian_off:
            fitted = fit_decay_exponent(times, mags, ref, sigmas=errs)
            ratio = fitted / rate
            report.metrics[f"probe_{idx}_fit_ratio"] = ratio
            report.add_check(
                f"probe_{idx}_fit_error", abs(ratio - 1.0), DECAY_FIT_TOL
            )
            stepper_mags = np.array(
                [abs(s.values[i, j]) for s in stepped.states[1:]]
            )
            closed = np.abs(predicted)
            report.add_check(
                f"probe_{idx}_stepper_vs_closed_form",
                float(np.abs(stepper_mags - closed).max()),
                1e-8,
            )

    report.wall_time = _time.perf_counter() - t0
    curves = {"decay_probes": probe_curves, "comparison": comparison}
    return report, curves


def run_void_study(dr, rho=1.0, duration=1.0, geometry="ball_times_interval",
                   trials=100_000, seed=0):
    """Empirical emptiness against both analytic forms."""
    t0 = _time.perf_counter()
    region = SprinkleRegion(dr, duration=duration, geometry=geometry, rho=rho)
    estimate = void_probability_mc(region, trials, seed)
    report = RunReport(
        study="void",
        scenario_hash=f"dr={dr!r},rho={rho!r},geometry={geometry}",
        seeds={"sprinkle": seed},
    )
    # the estimated binomial width collapses when no trial is empty; fall
    # back on the width implied by the exact law
    exact = estimate.analytic_exact
    floor = np.sqrt(exact * (1.0 - exact) / trials)
    tol = 3.0 * max(estimate.stderr, floor, 1e-12)
    report.metrics.update(
        {
            "analytic_bare": estimate.analytic_bare,
            "analytic_exact": estimate.analytic_exact,
            "empirical": estimate.empirical,
            "stderr": estimate.stderr,
        }
    )
    report.add_check(
        "empirical_vs_exact",
        abs(estimate.empirical - estimate.analytic_exact),
        tol,
    )
    report.wall_time = _time.perf_counter() - t0
    curves = {"void": estimate, "region": region}
    return report, curves


def run_segment_checks(scenario: Scenario, n_pairs=1000, seed=0):
    """Random-pair identities for the piecewise-linear machinery."""
    t0 = _time.perf_counter()
    grid = scenario.build_grid()
    v = scenario.build_potential()
    if not isinstance(v, PiecewiseLinear):
        v = linearize(v, grid.half_width / 25.0, (-grid.half_width, grid.half_width))
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    lo, hi = v.breakpoints[0], v.breakpoints[-1]
    worst = 0.0
    for _ in range(n_pairs):
        q, Q = rng.uniform(lo, hi, size=2)
        got = segment_sum(v, q, Q)
        want = float(v.value(Q) - v.value(q))
        worst = max(worst, abs(got - want))
    field = superoperator_field(scenario.build_potential(), grid)
    antisym = float(np.abs(field.values + field.values.T).max())
    report = RunReport(
        study="segcheck",
        scenario_hash=scenario.content_hash,
        seeds={"pairs": seed},
    )
    report.metrics["n_pairs"] = n_pairs
    report.add_check("segment_sum_identity", worst, SEGMENT_TOL)
    report.add_check("field_antisymmetry", antisym, 0.0)
    report.wall_time = _time.perf_counter() - t0
    return report, {}


def run_spectrum_study(scenario: Scenario):
    """Dense-generator eigenvalues and their symmetry defect."""
    t0 = _time.perf_counter()
    grid = scenario.build_grid()
    v = scenario.build_potential()
    _, eigenvalues = dense_generator(v, grid)
    flipped = np.sort(-eigenvalues)
    defect = float(np.abs(np.sort(eigenvalues) - flipped).max())
    report = RunReport(
        study="spectrum",
        scenario_hash=scenario.content_hash,
        seeds={},
    )
    report.metrics["n_eigenvalues"] = int(eigenvalues.size)
    report.add_check("spectrum_symmetry", defect, 1e-8)
    report.wall_time = _time.perf_counter() - t0
    return report, {"eigenvalues": eigenvalues}


# ---------------------------------------------------------------------------
# output emission


def _fmt(value) -> str:
    return repr(float(value))


def emit_outputs(report: RunReport, curves: dict, outdir) -> list:
    """Write summary, per-curve CSVs, gnuplot data files, and an index."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name: str, text: str):
        path = outdir / name
        path.write_text(text)
        written.append(name)

    summary = {
        "study": report.study,
        "scenario_hash": report.scenario_hash,
        "seeds": report.seeds,
        "passed": report.passed,
        "wall_time_s": report.wall_time,
        "metrics": {k: _json_safe(v) for k, v in report.metrics.items()},
        "checks": {
            name: {
                "passed": c.passed,
                "threshold": c.threshold,
                "observed": c.observed,
                "comparison": c.comparison,
            }
            for name, c in report.checks.items()
        },
    }
    emit("summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")

    times = curves.get("times")
    for name, dist in curves.get("distances", {}).items():
        rows = ["t,maxnorm,l2"]
        dat = []
        for t, m, l in zip(times, dist["maxnorm"], dist["l2"]):
            rows.append(f"{_fmt(t)},{_fmt(m)},{_fmt(l)}")
            dat.append(f"{_fmt(t)} {_fmt(m)}")
        emit(f"distance_{name}.csv", "\n".join(rows) + "\n")
        emit(f"distance_{name}.dat", "\n".join(dat) + "\n")

    for idx, probe in curves.get("decay_probes", {}).items():
        rows = ["t,abs_f,predicted,stderr"]
        dat = []
        for t, a, p, e in zip(
            probe["t"], probe["abs_f"], probe["predicted"], probe["stderr"]
        ):
            rows.append(f"{_fmt(t)},{_fmt(a)},{_fmt(p)},{_fmt(e)}")
            dat.append(f"{_fmt(t)} {_fmt(a)}")
        emit(f"decay_probe_{idx}.csv", "\n".join(rows) + "\n")
        emit(f"decay_probe_{idx}.dat", "\n".join(dat) + "\n")

    for name, state in curves.get("snapshots", {}).items():
        path = outdir / f"state_{name}.csv"
        save_state(state, path)
        written.append(path.name)

    if "eigenvalues" in curves:
        rows = ["index,eigenvalue"]
        dat = []
        for i, lam in enumerate(curves["eigenvalues"]):
            rows.append(f"{i},{_fmt(lam)}")
            dat.append(f"{i} {_fmt(lam)}")
        emit("spectrum.csv", "\n".join(rows) + "\n")
        emit("spectrum.dat", "\n".join(dat) + "\n")

    if "void" in curves:
        est = curves["void"]
        region = curves["region"]
        rows = [
            "dr,rho,trials,bare,exact,empirical,stderr",
            ",".join(
                [
                    _fmt(region.dr),
                    _fmt(region.rho),
                    str(est.n_trials),
                    _fmt(est.analytic_bare),
                    _fmt(est.analytic_exact),
                    _fmt(est.empirical),
                    _fmt(est.stderr),
                ]
            ),
        ]
        emit("void.csv", "\n".join(rows) + "\n")

    emit("index.txt", "\n".join(sorted(written + ["index.txt"])) + "\n")
    return [outdir / name for name in sorted(written)]


def _json_safe(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value
