"""Configuration-driven experiment runner.

Each experiment id reproduces one figure-level result as CSV data plus
a JSON manifest and a PASS/FAIL verdict against its acceptance
thresholds.  Configuration is a flat TOML file (key = value at the top
level); `--set key=value` overrides win over the file, which wins over
the built-in defaults.  Exit status: 0 verdict PASS, 1 verdict FAIL,
2 usage error (unknown experiment or override key).

Determinism contract: the CSV bytes depend only on the experiment, the
resolved parameters and the seed, never on wall time or scheduling;
worker pools only parallelize independently seeded grid points.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__, defaults, drivebus, ghzgen, nanowire, openqs
from . import constants, perturb
from .artifacts import Check, write_csv, write_manifest, write_verdict

__all__ = ["main", "run", "list_experiments", "RunConfig", "EXPERIMENTS"]

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

# frozen reference for the transition location h_c = sqrt(delta^2 + mu^2)
_H_CRITICAL = math.sqrt(defaults.WIRE_PAIRING_MEV ** 2
                        + defaults.WIRE_MU_MEV ** 2)

_GHZ_FLOORS = {2: 0.988, 4: 0.980, 8: 0.960}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    experiment: str
    overrides: dict
    out_dir: Path
    master_seed: int = 0
    workers: int = 1
    strict: bool = False


@dataclass
class RunContext:
    out: Path
    seed: int
    workers: int
    strict: bool
    warnings: list = field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)


@dataclass(frozen=True)
class Experiment:
    name: str
    figure: str
    description: str
    runtime: str
    defaults: dict
    runner: Callable


def _float_grid(lo: float, hi: float, points: int) -> np.ndarray:
    if points < 2 or hi <= lo:
        raise UsageError("grid needs points >= 2 and max > min")
    return np.linspace(float(lo), float(hi), int(points))


def _parse_multiples(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in str(text).split(","))
    except ValueError as exc:
        raise UsageError(f"bad multiples list {text!r}") from exc
    if not vals or min(vals) <= 0:
        raise UsageError("multiples must be positive")
    return vals


# ---------------------------------------------------------------- nanowire

def _run_fig2a(p: dict, ctx: RunContext):
    wire = defaults.insb_wire(p["length_nm"])
    grid = _float_grid(p["h_min_mev"], p["h_max_mev"], p["h_points"])
    scan = nanowire.zeeman_scan(wire, grid)
    write_csv(ctx.out / "fig2a.csv", ["h_meV", "eps1_meV", "eps2_meV"],
              zip(grid, scan.eps1, scan.eps2))
    h_c = float(grid[int(np.argmin(scan.eps2))])
    below = scan.eps1[grid <= h_c - 0.05]
    above = scan.eps1[grid >= h_c + 0.05]
    drop = float(below.max() / above.min()) if len(below) and len(above) else 0.0
    window = (grid >= 1.3) & (grid <= 1.7)
    eps2_floor = float(scan.eps2[window].min()) if window.any() else 0.0
    checks = [
        Check("gap minimum locates the transition",
              abs(h_c - _H_CRITICAL) <= 0.05,
              f"h_c = {h_c:.4f} vs {_H_CRITICAL:.4f} meV"),
        Check("eps1 collapses across the transition", drop >= 100.0,
              f"drop factor {drop:.1f}"),
        Check("eps2 protected on the topological side", eps2_floor >= 0.05,
              f"min eps2 = {eps2_floor:.4f} meV on [1.3, 1.7]"),
    ]
    summary = {"h_c_mev": h_c, "eps1_drop_factor": drop,
               "eps2_min_mev": eps2_floor}
    return summary, checks


def _run_fig2b(p: dict, ctx: RunContext):
    wire = defaults.insb_wire(p["l_min_nm"], zeeman_h_mev=p["zeeman_h_mev"])
    grid = np.arange(p["l_min_nm"], p["l_max_nm"] + p["l_step_nm"] / 2,
                     p["l_step_nm"])
    scan = nanowire.length_scan(wire, grid)
    write_csv(ctx.out / "fig2b.csv", ["L_nm", "eps1_meV", "eps2_meV"],
              zip(grid, scan.eps1, scan.eps2))
    fit = nanowire.fit_splitting_envelope(scan)
    period = float(np.diff(fit.peak_positions_nm).mean())
    checks = [
        Check("coherence length in the expected window",
              200.0 <= fit.xi_nm <= 260.0, f"xi = {fit.xi_nm:.1f} nm"),
        Check("envelope fit is a clean exponential",
              fit.correlation >= 0.95, f"|r| = {fit.correlation:.4f}"),
    ]
    summary = {"xi_nm": fit.xi_nm, "decay_length_nm": fit.decay_length_nm,
               "correlation": fit.correlation, "n_peaks": fit.n_peaks,
               "oscillation_period_nm": period}
    return summary, checks


def _padded_envelope_overlap(psi_a, psi_b, align: str) -> float:
    da = nanowire.site_density(psi_a)
    db = nanowire.site_density(psi_b)
    n = max(len(da), len(db))
    pa, pb = np.zeros(n), np.zeros(n)
    if align == "left":
        pa[:len(da)], pb[:len(db)] = da, db
    else:
        pa[n - len(da):], pb[n - len(db):] = da, db
    return float(np.sqrt(pa * pb).sum())


def _edge_pair(wire: nanowire.NanowireParams) -> nanowire.EdgeStatePair:
    spectrum = nanowire.diagonalize(nanowire.build_bdg(wire))
    return nanowire.extract_edge_states(spectrum, wire.n_sites)


def _run_fig2c(p: dict, ctx: RunContext):
    base_l = float(p["length_nm"])
    step = defaults.WIRE_SPACING_NM
    half = float(p["scan_halfwidth_nm"])
    scan_grid = np.arange(base_l - half, base_l + half + step / 2, step)
    scan = nanowire.length_scan(defaults.insb_wire(base_l), scan_grid)
    fit = nanowire.fit_splitting_envelope(scan)
    period = max(step, round(float(np.diff(fit.peak_positions_nm).mean())
                             / step) * step)

    base = _edge_pair(defaults.insb_wire(base_l))
    cross = nanowire.gauge_fixed_overlap(base.psi_l, base.psi_r)
    rows = []
    for k in range(int(p["n_periods"]) + 1):
        wire_k = defaults.insb_wire(base_l + k * period)
        pair = base if k == 0 else _edge_pair(wire_k)
        rows.append((
            wire_k.length_nm,
            pair.epsilon_1,
            _padded_envelope_overlap(base.psi_l, pair.psi_l, "left"),
            _padded_envelope_overlap(base.psi_r, pair.psi_r, "right"),
        ))
    write_csv(ctx.out / "fig2c.csv",
              ["L_nm", "eps1_meV", "overlap_L", "overlap_R"], rows)
    one_period_l = rows[1][2] if len(rows) > 1 else 0.0
    checks = [
        Check("left and right end states do not overlap",
              cross < 1e-3, f"|<psi_L|psi_R>| = {cross:.2e}"),
        Check("left envelope persists across one period",
              one_period_l > 0.99, f"overlap = {one_period_l:.5f}"),
    ]
    summary = {"cross_overlap": cross, "oscillation_period_nm": period,
               "overlap_L_one_period": one_period_l}
    return summary, checks


def _disorder_rows(stats: nanowire.EnsembleStats, w: float):
    for r in stats.rows:
        yield (w, r.realization, r.eps1, r.eps2, r.overlap_l, r.overlap_r,
               r.seed)


def _run_disorder(p: dict, ctx: RunContext, kind: str):
    wire = defaults.insb_wire(p["length_nm"])
    grid = _float_grid(p["w_min"], p["w_max"], p["w_points"])
    all_stats = []
    rows = []
    for i, w in enumerate(grid):
        spec = nanowire.DisorderSpec(kind, float(w), int(p["n_realizations"]),
                                     master_seed=ctx.seed + i)
        st = nanowire.disorder_ensemble(wire, spec, workers=ctx.workers)
        flagged = sum(r.flagged for r in st.rows)
        if flagged:
            ctx.warn(f"{flagged} flagged realizations at W = {w:g}")
        all_stats.append(st)
        rows.extend(_disorder_rows(st, float(w)))
    name = "fig3_mu" if kind == "chemical_potential" else "fig3_phase"
    write_csv(ctx.out / f"{name}.csv",
              ["W", "realization", "eps1_meV", "eps2_meV",
               "overlap_L", "overlap_R", "seed"], rows)
    clean = all_stats[0].clean_eps1
    mean_eps1 = [float(st.eps1_values.mean()) for st in all_stats]
    mid = len(grid) // 2
    mid_overlap = float(min(
        np.mean([r.overlap_l for r in all_stats[mid].rows]),
        np.mean([r.overlap_r for r in all_stats[mid].rows])))
    summary = {
        "clean_eps1_mev": clean,
        "w_grid": [float(w) for w in grid],
        "mean_eps1": mean_eps1,
        "mid_grid_mean_overlap": mid_overlap,
    }
    if kind == "chemical_potential":
        worst = max(abs(m - clean) / clean for m in mean_eps1)
        checks = [
            Check("mean splitting is disorder-robust", worst < 0.10,
                  f"max relative shift {worst:.3f}"),
            Check("wavefunctions survive mid-grid disorder",
                  mid_overlap > 0.99, f"mean overlap {mid_overlap:.4f}"),
        ]
        summary["max_relative_eps1_shift"] = worst
    else:
        shift = abs(mean_eps1[-1] - clean) / clean
        checks = [
            Check("splitting is phase-disorder sensitive", shift > 0.20,
                  f"relative shift {shift:.3f} at W = {grid[-1]:g}"),
        ]
        summary["relative_eps1_shift_at_wmax"] = shift
    return summary, checks


def _run_fig3_mu(p: dict, ctx: RunContext):
    return _run_disorder(p, ctx, "chemical_potential")


def _run_fig3_phase(p: dict, ctx: RunContext):
    return _run_disorder(p, ctx, "pairing_phase")


def _run_perturb_check(p: dict, ctx: RunContext):
    wire = defaults.insb_wire(p["length_nm"])
    ref = perturb.CleanReference.build(wire)
    w_grid = (0.01, 0.02, 0.04, 0.08)
    rows = []
    all_rows = []
    diag_ok = True
    antisym_ok = True
    for i, w in enumerate(w_grid):
        spec = nanowire.DisorderSpec("chemical_potential", w,
                                     int(p["n_realizations"]),
                                     master_seed=ctx.seed + i)
        cmp_rows = perturb.compare_exact(wire, spec, ref)
        all_rows.extend(cmp_rows)
        for j, row in enumerate(cmp_rows):
            real = nanowire.draw_realization(spec, wire.n_sites, j)
            v = perturb.perturbation_operator(wire, spec, real)
            fo = perturb.first_order(ref.edge, v)
            vnorm = float(np.linalg.norm(v.matrix, 2))
            if max(abs(fo.diag_l), abs(fo.diag_r)) >= 1e-10 * vnorm:
                diag_ok = False
            so = perturb.second_order(ref.spectrum, ref.edge, v)
            rel = abs(so.delta_plus + so.delta_minus) / max(
                abs(so.delta_plus), 1e-300)
            if rel >= 1e-10:
                antisym_ok = False
            rows.append((row.realization, row.w, row.eps1_exact,
                         row.eps1_pert, row.d1, row.d2_bulk, row.d2_edge))
    write_csv(ctx.out / "perturb_check.csv",
              ["realization", "W", "eps1_exact_meV", "eps1_pert_meV",
               "d1_meV", "d2_bulk_meV", "d2_edge_meV"], rows)
    slope = perturb.residual_slope(all_rows)
    checks = [
        Check("first-order diagonal elements vanish", diag_ok,
              "chirality forbids <psi_k|V|psi_k>"),
        Check("second-order shifts are antisymmetric", antisym_ok,
              "delta2(+1) = -delta2(-1)"),
        Check("residuals scale as the third order",
              2.5 <= slope <= 3.5, f"log-log slope {slope:.3f}"),
    ]
    summary = {"residual_slope": slope,
               "w_grid": list(w_grid)}
    return summary, checks


# ------------------------------------------------------------------- bus

def _run_bus_params(p: dict, ctx: RunContext):
    base = defaults.junction_drive()
    eff = drivebus.effective_params(base)
    report = drivebus.neglect_condition(base)
    theta_grid = _float_grid(p["theta_min"], p["theta_max"],
                             p["theta_points"])
    rows = []
    for theta in theta_grid:
        pt = base.with_theta(float(theta))
        e = drivebus.effective_params(pt)
        r = drivebus.neglect_condition(pt)
        rows.append((float(theta), e.g_over_2pi_mhz, abs(r.betas[1])))
    write_csv(ctx.out / "bus_params.csv",
              ["theta", "g_over_2pi_MHz", "abs_beta2"], rows)
    g_mhz = eff.g_over_2pi_mhz
    beta2 = abs(report.betas[1])
    checks = [
        Check("coupling lands at the few-MHz point",
              5.8 <= g_mhz <= 6.6, f"g/2pi = {g_mhz:.3f} MHz"),
        Check("qubit frequency equals the bare splitting",
              abs(eff.omega_tq - base.e) <= 1e-12 * base.e,
              f"omega_tq = {eff.omega_tq!r}"),
        Check("second transformation angle is small",
              beta2 < 1.0 / 40.0, f"|beta_2| = {beta2:.5f}"),
    ]
    summary = {
        "theta_star": drivebus.theta_star(),
        "g_over_2pi_MHz": g_mhz,
        "omega_tq": eff.omega_tq,
        "beta_m": [abs(b) for b in report.betas],
        "j1_residual_bound": report.j1_residual_bound,
    }
    return summary, checks


def _run_rwa_check(p: dict, ctx: RunContext):
    drive = defaults.drive_for_qubit_to_coupling_ratio(
        p["qubit_to_coupling_ratio"], n_fock=int(p["n_fock"]))
    res = drivebus.validate_rwa(drive, periods=int(p["periods"]))
    write_csv(ctx.out / "rwa_check.csv",
              ["t", "F_full", "F_jc", "F_jc_ajc"],
              zip(res.times, res.f_full, res.f_jc, res.f_jc_ajc))
    transfer_window = res.times <= math.pi / (2 * res.effective.g)
    full_gap = float(np.abs(res.f_full - res.f_jc)[transfer_window].max())
    checks = [
        Check("counter-rotating term is negligible",
              res.max_jc_ajc_gap < 0.002,
              f"max |F_JC - F_JC+AJC| = {res.max_jc_ajc_gap:.2e}"),
        Check("full model tracks the resonant bus over one transfer",
              full_gap < 0.01, f"max gap {full_gap:.2e}"),
    ]
    summary = {
        "omega_tq_over_g": res.effective.omega_tq / res.effective.g,
        "max_jc_ajc_gap": res.max_jc_ajc_gap,
        "max_full_jc_gap_one_transfer": full_gap,
        "cutoff_defect": res.cutoff_defect,
    }
    return summary, checks


def _run_fig4(p: dict, ctx: RunContext):
    g = defaults.bus_coupling()
    rates = defaults.transfer_rates(g)
    vac = openqs.transfer_experiment(g, *rates, n_times=int(p["n_times"]))
    write_csv(ctx.out / "fig4_transfer.csv",
              ["t", "F1_joint", "F1_reduced"],
              zip(vac.times, vac.joint.fidelities, vac.reduced.fidelities))
    temps_mk = _float_grid(p["t_min_mk"], p["t_max_mk"], p["t_points"])
    points = openqs.thermal_scan(g, rates, [t / 1e3 for t in temps_mk],
                                 defaults.CAVITY_OMEGA)
    write_csv(ctx.out / "fig4_thermal.csv", ["T_mK", "n_c", "maxF1"],
              [(pt.temperature_mk, pt.n_c, pt.max_f1) for pt in points])
    unitary = openqs.transfer_experiment(g, 0.0, 0.0, 0.0,
                                         n_times=int(p["n_times"]))
    n_c_20 = constants.thermal_occupation(defaults.CAVITY_OMEGA, 0.020)
    worst_reduction = max(vac.max_f1 - pt.max_f1 for pt in points)
    checks = [
        Check("transfer fidelity at the half period",
              vac.f1_at_transfer >= 0.998,
              f"F1 = {vac.f1_at_transfer:.5f}"),
        Check("unitary limit is lossless",
              abs(unitary.f1_at_transfer - 1.0) <= 1e-6,
              f"1 - F1 = {1 - unitary.f1_at_transfer:.2e}"),
        Check("thermal occupation stays harmless",
              worst_reduction <= 0.002,
              f"max fidelity reduction {worst_reduction:.2e}"),
        Check("occupation at 20 mK is parts-per-million",
              2e-6 <= n_c_20 <= 6e-6, f"n_c = {n_c_20:.2e}"),
    ]
    summary = {
        "g_rad_per_ns": g,
        "rates": list(rates),
        "f1_at_transfer": vac.f1_at_transfer,
        "n_c_20mK": n_c_20,
        "max_thermal_reduction": worst_reduction,
    }
    return summary, checks


# ------------------------------------------------------------------- ghz

def _ghz_params_from(p: dict) -> ghzgen.GhzParams:
    g = defaults.bus_coupling()
    rate = g / float(p["rate_divisor"])
    n_fock = int(p["n_fock"]) or None
    return ghzgen.GhzParams(n_qubits=int(p["n_qubits"]), g=g,
                            k=int(p["k"]), rates=(rate, rate, rate),
                            n_fock=n_fock)


def _run_ghz(p: dict, ctx: RunContext):
    params = _ghz_params_from(p)
    res = ghzgen.generate(params, mode=p["mode"], n_times=int(p["n_times"]))
    write_csv(ctx.out / "ghz.csv", ["t", "F2"], zip(res.times, res.f2))
    if res.cutoff_delta is not None and res.cutoff_delta > 1e-6:
        ctx.warn(f"cutoff doubling still moves max F2 by {res.cutoff_delta:.1e}")
    floor = _GHZ_FLOORS.get(params.n_qubits)
    checks = [
        Check("Fock cutoff converged",
              res.cutoff_delta is not None
              and res.cutoff_delta <= ghzgen.CONVERGENCE_TOL,
              f"delta = {res.cutoff_delta:.1e}"),
    ]
    if floor is not None:
        checks.insert(0, Check(
            "entangled-state fidelity", res.max_f2 >= floor,
            f"max F2 = {res.max_f2:.5f} >= {floor}"))
    summary = {
        "N": params.n_qubits,
        "k": params.k,
        "nu_over_g": params.nu / params.g,
        "omega_over_g": params.omega_rabi / params.g,
        "drive_amplitude": params.drive_amplitude,
        "n_fock_initial": params.n_fock,
        "n_fock_final": res.n_fock,
        "convergence_delta": res.cutoff_delta,
        "max_F2": res.max_f2,
        "mode": res.mode,
    }
    return summary, checks


def _run_rate_sweep(p: dict, ctx: RunContext, name: str):
    n = int(p["n_qubits"])
    multiples = _parse_multiples(p["multiples"])
    pts = ghzgen.rate_sweep(n, multiples, g=defaults.bus_coupling(),
                            k=int(p["k"]), mode=p["mode"],
                            n_times=int(p["n_times"]))
    write_csv(ctx.out / f"{name}.csv",
              ["Gamma1_over_kappa", "Gamma2_over_kappa", "maxF2"],
              [(pt.gamma1_over_kappa, pt.gamma2_over_kappa, pt.max_f2)
               for pt in pts])
    table = {(pt.gamma1_over_kappa, pt.gamma2_over_kappa): pt.max_f2
             for pt in pts}
    lo, hi = min(multiples), max(multiples)
    floor = _GHZ_FLOORS.get(n)
    grid = sorted(multiples)
    monotone = all(
        table[(g1a, g2)] >= table[(g1b, g2)] - 1e-9
        for g2 in grid for g1a, g1b in zip(grid, grid[1:])) and all(
        table[(g1, g2a)] >= table[(g1, g2b)] - 1e-9
        for g1 in grid for g2a, g2b in zip(grid, grid[1:]))
    checks = [
        Check("fidelity decreases with either rate", monotone, ""),
        Check("dephasing dominates relaxation",
              table[(hi, lo)] > table[(lo, hi)],
              f"F2({hi:g}k, {lo:g}k) = {table[(hi, lo)]:.4f} vs "
              f"F2({lo:g}k, {hi:g}k) = {table[(lo, hi)]:.4f}"),
    ]
    if floor is not None:
        checks.insert(0, Check(
            "corner fidelity at nominal rates",
            table[(lo, lo)] >= floor,
            f"max F2 = {table[(lo, lo)]:.5f} >= {floor}"))
    summary = {
        "N": n,
        "multiples": list(multiples),
        "max_F2_grid": {f"{a:g},{b:g}": v for (a, b), v in
                        sorted(table.items())},
    }
    return summary, checks


def _run_fig5_n4(p: dict, ctx: RunContext):
    return _run_rate_sweep(p, ctx, "fig5_n4")


def _run_fig5_n8(p: dict, ctx: RunContext):
    return _run_rate_sweep(p, ctx, "fig5_n8")


EXPERIMENTS = {
    e.name: e for e in [
        Experiment(
            "fig2a", "Fig. 2(a)",
            "lowest BdG levels across the Zeeman-driven transition",
            "~30 s",
            dict(length_nm=3000.0, h_min_mev=0.4, h_max_mev=2.0,
                 h_points=81),
            _run_fig2a),
        Experiment(
            "fig2b", "Fig. 2(b)",
            "splitting oscillations versus wire length and coherence-length fit",
            "~2 min",
            dict(zeeman_h_mev=1.5, l_min_nm=2400.0, l_max_nm=3600.0,
                 l_step_nm=10.0),
            _run_fig2b),
        Experiment(
            "fig2c", "Fig. 2(c)",
            "end-state localization: cross overlap and envelope persistence",
            "~1 min",
            dict(length_nm=3000.0, scan_halfwidth_nm=300.0, n_periods=3),
            _run_fig2c),
        Experiment(
            "fig3-mu", "Fig. 3(a)",
            "chemical-potential disorder ensemble (W in meV)",
            "~10 min at 100 realizations",
            dict(length_nm=3000.0, n_realizations=100, w_min=0.1,
                 w_max=0.5, w_points=5),
            _run_fig3_mu),
        Experiment(
            "fig3-phase", "Fig. 3(b)",
            "pairing-phase disorder ensemble (W in radians)",
            "~6 min at 100 realizations",
            dict(length_nm=3000.0, n_realizations=100, w_min=0.25,
                 w_max=1.0, w_points=4),
            _run_fig3_phase),
        Experiment(
            "perturb-check", "-",
            "perturbative splitting against exact diagonalization",
            "~2 min",
            dict(length_nm=1500.0, n_realizations=8),
            _run_perturb_check),
        Experiment(
            "bus-params", "-",
            "effective exchange coupling and frame angles of the driven bus",
            "~5 s",
            dict(theta_min=0.2, theta_max=3.6, theta_points=69),
            _run_bus_params),
        Experiment(
            "rwa-check", "Fig. 4 (inset)",
            "full junction drive versus resonant and counter-rotating models",
            "~3 min",
            dict(qubit_to_coupling_ratio=33.0, periods=3, n_fock=5),
            _run_rwa_check),
        Experiment(
            "fig4", "Fig. 4",
            "open-system transfer fidelity and thermal-cavity scan",
            "~1 min",
            dict(n_times=201, t_min_mk=5.0, t_max_mk=35.0, t_points=7),
            _run_fig4),
        Experiment(
            "ghz", "Fig. 5 (N = 2)",
            "two-qubit entangled-state generation over the shared cavity",
            "~30 s",
            dict(n_qubits=2, k=1, n_fock=0, n_times=201, mode="auto",
                 rate_divisor=1000.0),
            _run_ghz),
        Experiment(
            "fig5-n4", "Fig. 5 (N = 4)",
            "four-qubit fidelity over the (Gamma1, Gamma2) grid",
            "~3 min",
            dict(n_qubits=4, k=1, multiples="1,3,10", n_times=201,
                 mode="symmetric"),
            _run_fig5_n4),
        Experiment(
            "fig5-n8", "Fig. 5 (N = 8)",
            "eight-qubit fidelity over the (Gamma1, Gamma2) grid",
            "long-running (~45 min)",
            dict(n_qubits=8, k=1, multiples="1,10", n_times=51,
                 mode="symmetric"),
            _run_fig5_n8),
    ]
}


def list_experiments() -> str:
    lines = [f"{'id':<14} {'figure':<15} {'runtime':<28} description"]
    for e in EXPERIMENTS.values():
        lines.append(f"{e.name:<14} {e.figure:<15} {e.runtime:<28} "
                     f"{e.description}")
    return "\n".join(lines)


def _coerce(key: str, value, default):
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        if str(value).lower() in ("true", "1"):
            return True
        if str(value).lower() in ("false", "0"):
            return False
        raise UsageError(f"override {key}: expected a boolean, got {value!r}")
    if isinstance(default, int):
        try:
            return int(value)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"override {key}: expected an integer, "
                             f"got {value!r}") from exc
    if isinstance(default, float):
        try:
            return float(value)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"override {key}: expected a number, "
                             f"got {value!r}") from exc
    return str(value)


def _resolve_params(exp: Experiment, overrides: dict) -> dict:
    params = dict(exp.defaults)
    for key, value in overrides.items():
        if key not in params:
            raise UsageError(
                f"unknown override {key!r} for {exp.name}; known keys: "
                + ", ".join(sorted(params)))
        params[key] = _coerce(key, value, params[key])
    return params


def run(config: RunConfig) -> int:
    """Execute one experiment and write its artifacts; returns exit code."""
    if config.experiment not in EXPERIMENTS:
        raise UsageError(
            f"unknown experiment {config.experiment!r}; expected one of "
            + ", ".join(EXPERIMENTS))
    exp = EXPERIMENTS[config.experiment]
    params = _resolve_params(exp, config.overrides)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(out=out, seed=int(config.master_seed),
                     workers=max(1, int(config.workers)),
                     strict=bool(config.strict))
    t0 = time.perf_counter()
    summary, checks = exp.runner(params, ctx)
    wall = time.perf_counter() - t0
    if config.strict:
        checks = list(checks) + [
            Check(f"strict: {w}", False) for w in ctx.warnings]
    write_manifest(out / "manifest.json", {
        "experiment": exp.name,
        "figure": exp.figure,
        "library_version": __version__,
        "defaults_version": defaults.DEFAULTS_VERSION,
        "seed": ctx.seed,
        "workers": ctx.workers,
        "strict": ctx.strict,
        "parameters": params,
        "summary": summary,
        "warnings": ctx.warnings,
        "wall_time_s": wall,
    })
    ok = write_verdict(out / "verdict.txt", checks)
    return EXIT_PASS if ok else EXIT_FAIL


def _parse_set(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise UsageError(f"--set expects key=value, got {pair!r}")
        key, _, raw = pair.partition("=")
        out[key.strip()] = raw.strip()
    return out


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise UsageError(f"config file not found: {path}")
    with open(p, "rb") as fh:
        data = tomllib.load(fh)
    for key, value in data.items():
        if isinstance(value, (dict, list)):
            raise UsageError(
                f"config must be flat key = value pairs; {key!r} is not")
    return data


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="topobus",
        description="reproduce the shipped experiments as CSV/JSON artifacts")
    parser.add_argument("--experiment", help="experiment id (see --list)")
    parser.add_argument("--config", help="flat TOML config file")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="master seed (default 0)")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker processes for ensemble grids")
    parser.add_argument("--set", action="append", default=[],
                        metavar="KEY=VALUE", dest="sets",
                        help="parameter override (repeatable)")
    parser.add_argument("--strict", action="store_true",
                        help="fail the verdict on any convergence warning")
    parser.add_argument("--list", action="store_true",
                        help="list experiments and exit")
    args = parser.parse_args(argv)

    if args.list:
        print(list_experiments())
        return EXIT_PASS
    try:
        file_cfg = _load_config(args.config)
        reserved = {"experiment", "seed", "out", "workers", "strict"}
        experiment = args.experiment or file_cfg.get("experiment")
        if not experiment:
            raise UsageError("no experiment given (use --experiment or a "
                             "config with experiment = \"...\")")
        out_dir = args.out or file_cfg.get("out")
        if not out_dir:
            raise UsageError("no output directory given (--out)")
        overrides = {k: v for k, v in file_cfg.items() if k not in reserved}
        overrides.update(_parse_set(args.sets))
        seed = args.seed if args.seed is not None else file_cfg.get("seed", 0)
        workers = (args.workers if args.workers is not None
                   else file_cfg.get("workers", 1))
        strict = args.strict or bool(file_cfg.get("strict", False))
        config = RunConfig(experiment=experiment, overrides=overrides,
                           out_dir=Path(out_dir), master_seed=int(seed),
                           workers=int(workers), strict=strict)
        return run(config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
