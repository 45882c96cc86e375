"""Command-line entry point: figure data, the squeezing table and validation suites as CSV.

Every run writes ``<out>`` (CSV, header + one row per grid point) and
``<out>.meta.json`` with the fully resolved parameters. Floats use the
shortest round-trip representation, so identical inputs give byte-identical
files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .appendix import MziConfig, mzi_fock_check, mzi_stats
from .estimation import heterodyne_fi, intensity_difference_stats, qfi_closed_form, qfi_teleported
from .fock import (
    classical_fi_pnr,
    dv_scheme_fi,
    gaussian_to_fock,
    output_number_operators,
    pnr_distribution,
    pnr_state,
    state_tail_bound,
    verify_sld,
)
from .gaussian import CoherenceParams, GaussianState, stellar_covariance, symplectic_eigenvalues
from .link_budget import (
    NetworkParams,
    ObservationParams,
    crossover_distance,
    effective_squeezing_curve,
    epsilon_from_magnitude,
    fi_ratio_vs_distance,
    fi_vs_baseline_curve,
    paper_rate_calibration,
    temporal_mode_rate,
    threshold_squeezing,
)
from .teleportation import protocol_covariance, simulate_teleportation, teleported_covariance, teleported_state

OUTPUT_DIR_ENV = "CVINTERF_OUTPUT_DIR"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- checks


@dataclass
class CheckSuite:
    """Named pass/fail checks collected by the validate-* commands."""

    rows: list = field(default_factory=list)

    def check(self, name: str, ok: bool, value: float, limit: float) -> bool:
        self.rows.append((name, bool(ok), float(value), float(limit)))
        return ok

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.rows if not r[1])

    def first_failure(self):
        return next((r for r in self.rows if not r[1]), None)

    def to_csv(self) -> str:
        return write_csv(["check", "passed", "value", "limit"], self.rows)


# -------------------------------------------------------------- commands


def _params(p) -> CoherenceParams:
    return CoherenceParams(p["epsilon"], p["g_abs"], p["theta"]).validate()


def cmd_table1(p, seed):
    rows = []
    for mag in (-5.0, -2.5, 0.0, 2.5, 5.0, 7.5):
        eps = epsilon_from_magnitude(ObservationParams(magnitude=mag, telescope_diameter=p["diameter_m"]))
        r_eff, db = threshold_squeezing(eps)
        rows.append((mag, eps, db, r_eff, int(round(db)), f"{r_eff:.2f}"))
    return write_csv(["magnitude", "epsilon", "squeezing_db", "r_eff", "squeezing_db_display", "r_eff_display"], rows), None


def cmd_fig2(p, seed):
    params = _params(p)
    ys = np.logspace(np.log10(p["y_min"]), np.log10(p["y_max"]), int(p["n_points"]))
    rows = []
    for y in ys:
        F = qfi_closed_form(params, y)
        rows.append((y, F.theta_theta, F.g_g))
    return write_csv(["y", "F_theta_theta", "F_gg"], rows), None


def cmd_fig3(p, seed):
    eps_grid = np.logspace(np.log10(p["eps_min"]), np.log10(p["eps_max"]), int(p["n_points"]))
    rows = []
    for eps in eps_grid:
        params = CoherenceParams(eps, p["g_abs"], p["theta"])
        cv = qfi_closed_form(params, 0.0).theta_theta
        dv = dv_scheme_fi(params).theta_theta
        het = heterodyne_fi(params).theta_theta
        rows.append((eps, cv, dv, het, dv / cv, het / cv))
    return write_csv(["epsilon", "F_cv", "F_dv", "F_heterodyne", "ratio_dv_cv", "ratio_het_cv"], rows), None


def cmd_fig4(p, seed):
    net = NetworkParams(loss_db_per_km=p["loss_db_per_km"], source_topology=p["topology"])
    L = np.linspace(0.0, p["L_max_km"], int(p["n_points"]))
    eps_values = (p["epsilon_a"], p["epsilon_b"], p["epsilon_c"])
    cols = [L]
    header = ["L_km"]
    for eps in eps_values:
        params = CoherenceParams(eps, p["g_abs"], p["theta"])
        cols.append(fi_vs_baseline_curve(params, p["r"], net, "cv_no_repeater", L)[:, 1])
        cols.append(fi_vs_baseline_curve(params, p["r"], net, "dv_no_repeater", L)[:, 1])
        header += [f"F_cv_eps{fmt(eps)}", f"F_dv_eps{fmt(eps)}"]
    cols.append(effective_squeezing_curve(p["r"], net, L)[:, 1])
    header.append("r_eff")
    return write_csv(header, zip(*cols)), None


def cmd_fig6(p, seed):
    obs = ObservationParams(magnitude=p["magnitude"], telescope_diameter=p["diameter_m"])
    eps = epsilon_from_magnitude(obs)
    params = CoherenceParams(eps, p["g_abs"], p["theta"])
    mode_rate = temporal_mode_rate(obs, paper_rate_calibration() if p["paper_rate"] else 1.0)
    L = np.linspace(0.0, p["L_max_km"], int(p["n_points"]))
    header = ["L_km", "ratio_direct"]
    cols = []
    extra = {"epsilon": eps, "mode_rate_hz": mode_rate, "crossovers_km": {}}
    for r_eff in (p["r_eff"], p["r_eff_alt"]):
        for frac in (1.0, 0.1, 0.01):
            net = NetworkParams(
                loss_db_per_km=p["loss_db_per_km"],
                base_rate_hz=frac * p["base_rate_hz"],
                reference_km=p["reference_km"],
                poly_order=p["poly_order"],
            )
            rows = fi_ratio_vs_distance(params, r_eff, net, mode_rate, L)
            if not cols:
                cols = [rows[:, 0], rows[:, 1]]
            name = f"ratio_cv_r{fmt(r_eff)}_rate{fmt(frac * p['base_rate_hz'])}"
            cols.append(rows[:, 2])
            header.append(name)
            extra["crossovers_km"][name] = crossover_distance(rows)
    return write_csv(header, zip(*cols)), extra


def cmd_mzi(p, seed):
    phis = np.linspace(0.0, 2 * np.pi, int(p["n_points"]))
    rows = []
    for phi in phis:
        cfg = MziConfig(p["alpha"], p["r"], float(phi))
        s = mzi_stats(cfg)
        f = mzi_fock_check(cfg, int(p["cutoff"]))
        rows.append((phi, s.mean, s.variance, f.mean, f.variance))
    return write_csv(["phi", "mean", "variance", "mean_fock", "variance_fock"], rows), None


def cmd_validate_teleport(p, seed):
    params = _params(p)
    suite = CheckSuite()
    n = int(p["n_samples"])
    rep = simulate_teleportation(params, p["r"], p["T"], n, seed=seed if seed is not None else 0)
    exact = protocol_covariance(params, p["r"], p["T"])
    z_protocol = float(np.max(np.abs(rep.empirical_cov - exact) / rep.stderr))
    suite.check("sampled covariance vs propagated protocol (max z)", z_protocol <= 5.0, z_protocol, 5.0)
    suite.check("sampled covariance vs closed-form teleported covariance (max z)", rep.max_z <= 5.0, rep.max_z, 5.0)
    z_mean = float(np.max(np.abs(rep.empirical_mean) / rep.mean_stderr))
    suite.check("sampled mean vs zero (max z)", z_mean <= 5.0, z_mean, 5.0)
    ideal = np.max(np.abs(teleported_covariance(params.epsilon, params.g_abs, params.theta, 0.0)
                          - stellar_covariance(params.epsilon, params.g_abs, params.theta)))
    suite.check("ideal teleportation leaves the covariance unchanged", ideal == 0.0, ideal, 0.0)
    nu = float(symplectic_eigenvalues(GaussianState.from_cov(exact))[0])
    suite.check("protocol output symplectic eigenvalue >= 1/2", nu >= 0.5 - 1e-10, nu, 0.5 - 1e-10)
    return suite.to_csv() + "\n" + rep.to_csv(), suite


def cmd_validate_fock(p, seed):
    suite = CheckSuite()
    params = _params(p)
    y, cutoff = p["y"], int(p["cutoff"])
    delta = params.theta + np.pi / 2
    fi = classical_fi_pnr(params, y, delta, cutoff)
    target = params.epsilon * params.g_abs**2
    rel = abs(fi.theta_theta / target - 1.0)
    suite.check("PNR F_theta_theta vs eps|g|^2 (relative)", rel <= 0.05, rel, 0.05)
    for d in np.linspace(0.0, np.pi, 5):
        f = classical_fi_pnr(params, y, params.theta + d, cutoff)
        q = qfi_closed_form(params, y)
        excess = max(f.theta_theta / q.theta_theta, f.g_g / q.g_g) - 1.0
        suite.check(f"FI <= QFI at delta - theta = {d:.4f} (relative excess)", excess <= 1e-6, excess, 1e-6)
        dist = pnr_distribution(params, y, params.theta + d, cutoff)
        deficit = 1.0 - dist.probs.sum()
        bound = state_tail_bound(pnr_state(params, y, params.theta + d), cutoff) + 1e-12
        suite.check(f"PNR probabilities sum to 1 within the tail bound at delta - theta = {d:.4f}",
                    abs(deficit) <= bound, abs(deficit), bound)
    # intensity-difference moments of the estimator against the truncated state
    big = CoherenceParams(p["id_epsilon"], params.g_abs, params.theta)
    rho = gaussian_to_fock(teleported_state(big, p["id_y"]), int(p["id_cutoff"]))
    n1, n2 = output_number_operators(delta - 0.5, int(p["id_cutoff"]))
    O = (n1 - n2) / big.epsilon
    mean = rho.expectation(O).real
    var = rho.expectation(O @ O).real - mean**2
    m_ref, v_ref = intensity_difference_stats(big, delta - 0.5, p["id_y"])
    err = max(abs(mean - m_ref), abs(var / v_ref - 1.0))
    suite.check("intensity-difference mean/variance vs truncated state", err <= 1e-6, err, 1e-6)
    qg = qfi_teleported(params, y)
    qc = qfi_closed_form(params, y)
    err = max(abs(qg.theta_theta / qc.theta_theta - 1), abs(qg.g_g / qc.g_g - 1))
    suite.check("general Gaussian QFI vs closed form (relative)", err <= 1e-8, err, 1e-8)
    return suite.to_csv(), suite


def cmd_validate_sld(p, seed):
    suite = CheckSuite()
    params = _params(p)
    for which in ("theta", "g"):
        rep = verify_sld(params, p["y"], int(p["cutoff"]), which)
        suite.check(f"SLD equation residual ({which})", rep.residual <= 1e-4, rep.residual, 1e-4)
        suite.check(f"tr(rho L^2) vs closed-form QFI ({which})", rep.fisher_relative_error <= 0.01,
                    rep.fisher_relative_error, 0.01)
        suite.check(f"tr(rho L) = 0 ({which})", abs(rep.mean_sld) <= 1e-6, abs(rep.mean_sld), 1e-6)
    return suite.to_csv(), suite


@dataclass(frozen=True)
class Command:
    func: object
    defaults: dict
    help: str


_COH = {"epsilon": 0.4, "g_abs": 0.7, "theta": 0.3}

COMMANDS = {
    "table1": Command(cmd_table1, {"diameter_m": 6.0}, "threshold squeezing per stellar magnitude"),
    "fig2": Command(
        cmd_fig2,
        {"epsilon": 1e-5, "g_abs": 0.7, "theta": 0.0, "y_min": 1e-8, "y_max": 1.0, "n_points": 81},
        "QFI versus the noise parameter y",
    ),
    "fig3": Command(
        cmd_fig3,
        {"g_abs": 0.7, "theta": 0.0, "eps_min": 1e-4, "eps_max": 1.0, "n_points": 41},
        "CV, DV and heterodyne FI versus epsilon",
    ),
    "fig4": Command(
        cmd_fig4,
        {"epsilon_a": 0.5, "epsilon_b": 0.05, "epsilon_c": 0.005, "g_abs": 0.7, "theta": 0.0, "r": 5.0,
         "loss_db_per_km": 0.2, "topology": "midpoint", "L_max_km": 200.0, "n_points": 101},
        "FI versus baseline without repeaters",
    ),
    "fig6": Command(
        cmd_fig6,
        {"magnitude": -5.0, "diameter_m": 6.0, "g_abs": 0.7, "theta": 0.0, "r_eff": 0.8, "r_eff_alt": 1.6,
         "loss_db_per_km": 1.0, "base_rate_hz": 150e9, "reference_km": 10.0, "poly_order": 2.0,
         "paper_rate": 1, "L_max_km": 100.0, "n_points": 101},
        "FI ratio versus distance with a rate-limited repeater",
    ),
    "mzi": Command(cmd_mzi, {"alpha": 1.0, "r": 0.5, "cutoff": 40, "n_points": 33},
                   "squeezed-input Mach-Zehnder statistics with Fock check"),
    "validate-teleport": Command(
        cmd_validate_teleport, {**_COH, "r": 2.0, "T": 0.95, "n_samples": 1_000_000},
        "Monte-Carlo teleportation checks",
    ),
    "validate-fock": Command(
        cmd_validate_fock,
        {"epsilon": 1e-3, "g_abs": 0.5, "theta": 0.3, "y": 1e-6, "cutoff": 6,
         "id_epsilon": 0.3, "id_y": 0.05, "id_cutoff": 12},
        "photon-counting FI and moment checks against the Fock oracle",
    ),
    "validate-sld": Command(
        cmd_validate_sld, {"epsilon": 0.05, "g_abs": 0.6, "theta": 0.3, "y": 1e-3, "cutoff": 8},
        "symmetric logarithmic derivative checks",
    ),
}


def resolve_overrides(defaults: dict, overrides) -> dict:
    params = dict(defaults)
    for item in overrides or []:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep:
            raise UsageError(f"override {item!r} is not key=value")
        if key not in defaults:
            raise UsageError(f"unknown parameter {key!r}; known: {', '.join(sorted(defaults))}")
        proto = defaults[key]
        try:
            if isinstance(proto, str):
                params[key] = raw
            elif isinstance(proto, int) and not isinstance(proto, bool):
                params[key] = int(raw)
            else:
                params[key] = float(raw)
        except ValueError:
            raise UsageError(f"cannot parse {key}={raw!r}") from None
    return params


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvinterf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, cmd in COMMANDS.items():
        sp = sub.add_parser(name, help=cmd.help)
        sp.add_argument("--out", type=Path, help=f"CSV path (default ${OUTPUT_DIR_ENV}/{name}.csv)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    cmd = COMMANDS[args.command]
    try:
        params = resolve_overrides(cmd.defaults, args.overrides)
        text, extra = cmd.func(params, args.seed)
    except (UsageError, ValueError, TypeError, ZeroDivisionError) as exc:
        print(f"cvinterf {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out = args.out or Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / f"{args.command}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    meta = {
        "command": args.command,
        "parameters": params,
        "seed": args.seed,
        "version": __version__,
        "kernel_backend": _kernels.BACKEND,
    }
    status = EXIT_OK
    if isinstance(extra, CheckSuite):
        meta["checks_passed"] = len(extra.rows) - extra.n_failed
        meta["checks_failed"] = extra.n_failed
        print(f"{args.command}: {meta['checks_passed']} passed, {extra.n_failed} failed")
        first = extra.first_failure()
        if first:
            print(f"first failure: {first[0]}: value {first[2]!r} vs limit {first[3]!r}")
            status = EXIT_VALIDATION
    elif extra:
        meta["derived"] = extra
    Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=fmt) + "\n")
    print(f"wrote {out}")
    return status


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
