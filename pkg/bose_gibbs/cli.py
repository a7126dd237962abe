#!/usr/bin/env python3
"""
cli.py
------

``bose-gibbs`` command line: one subcommand per module plus the acceptance
suite. JSON is the machine interface and CSV the plot interface; artifacts go
to stdout (or ``--output``) and logs to the JSON log file and stderr.

Exit status: 0 ok, 1 hard check violated, 2 usage error, 3 accuracy
certificate or solver failure.
"""

import argparse
import csv
import io
import logging
import sys
import time
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

from . import (
    acceptance,
    bogoliubov,
    condensate,
    density_matrices,
    distributions,
    fock_oracle,
    free_energy,
    ideal_gas,
    ineq_testbed,
    lattice,
)
from .common.errors import AccuracyError, ConvergenceError, ResourceError
from .config import RunConfig, load_config, parse_dims
from .lattice import VhatTable
from .regime import PhaseRegime
from .utils.artifacts import envelope, jsonable, stable_dumps
from .utils.log import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_ACCURACY = 3

DEFAULT_VHAT = acceptance.DEFAULT_VHAT

# (payload, csv text or None, hard checks passed)
Outcome = Tuple[Dict[str, Any], Optional[str], bool]


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _beta(args: argparse.Namespace) -> float:
    if args.beta is not None:
        return args.beta
    return args.beta_ratio * ideal_gas.critical_beta(args.N)


def _table(beta: float, config: RunConfig) -> lattice.ShellTable:
    return lattice.certified_table(
        beta, 0.0, rel_tol=config.tail_tol, shell_limit=config.shell_limit
    )


def _vhat(config: RunConfig) -> VhatTable:
    return lattice.load_vhat(config.vhat_path) if config.vhat_path else DEFAULT_VHAT


def _state(args: argparse.Namespace, config: RunConfig):
    beta = _beta(args)
    table = _table(beta, config)
    state = ideal_gas.solve_mu0(
        beta, args.N, table, tol=config.root_tol, window=config.phase_window
    )
    return state, table


def _flat_csv(payload: Dict[str, Any]) -> str:
    """key,value rows for the scalar entries of a payload."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in sorted(jsonable(payload).items()):
        if isinstance(value, (int, float, str, bool)):
            writer.writerow([key, repr(value) if isinstance(value, float) else value])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_ideal_gas(args: argparse.Namespace, config: RunConfig) -> Outcome:
    state, table = _state(args, config)
    energies = ideal_gas.free_energies(state, table)
    payload = {
        "beta": state.beta,
        "N": state.N,
        "mu0": state.mu0,
        "N0": state.N0,
        "beta_c": state.beta_c,
        "phase": state.phase,
        "beta_over_beta_c": state.ratio,
        "condensate_fraction": state.condensate_fraction,
        "condensate_fraction_leading": ideal_gas.condensate_fraction_leading(
            state.beta, state.N
        ),
        "residual": state.residual,
        "F0": energies.F0,
        "F0_plus": energies.F0_plus,
        "F0_bec": energies.F0_bec,
        "Phi0": energies.Phi0,
        "particle_variance": ideal_gas.particle_variance(state, table),
        "dmu0_dN": ideal_gas.dmu0_dN(state, table),
        "dmu0_dN_ratio": ideal_gas.dmu0_dN_ratio(state, table),
        "shells": len(table),
        "cutoff_n": table.cutoff_n,
    }
    return payload, _flat_csv(payload), True


def cmd_spectrum(args: argparse.Namespace, config: RunConfig) -> Outcome:
    state, table = _state(args, config)
    vhat = _vhat(config)
    lattice.check_summability(table, vhat)
    spectrum = bogoliubov.build_spectrum(state, vhat, table, tol=config.tail_tol)
    checks = bogoliubov.bound_checks(spectrum)
    payload = {"summary": bogoliubov.spectrum_summary(spectrum), "checks": checks}
    return payload, bogoliubov.spectrum_csv(spectrum, max_rows=args.rows), checks["passed"]


def cmd_condensate(args: argparse.Namespace, config: RunConfig) -> Outcome:
    beta = _beta(args)
    h = condensate.coupling(args.vhat0, args.N)
    M = args.M if args.M is not None else args.N / 2.0
    theory = condensate.solve_mu(args.kind, beta, h, M, tol=config.quad_tol)
    asymptotic = condensate.free_energy_asymptotic(
        beta, args.N, M, args.vhat0, regime_eps=config.regime_eps
    )
    payload = {
        "kind": theory.kind,
        "beta": beta,
        "h": h,
        "M": M,
        "mu": theory.mu,
        "sigma": theory.sigma,
        "mean": theory.mean,
        "variance": theory.variance,
        "method": theory.method,
        "residual": theory.residual,
        "free_energy": condensate.free_energy(theory),
        "free_energy_asymptotic": asymptotic["value"],
        "regime": asymptotic["regime"],
    }
    return payload, _flat_csv(payload), True


def cmd_distribution(args: argparse.Namespace, config: RunConfig) -> Outcome:
    beta = _beta(args)
    N0 = args.N0 if args.N0 is not None else args.N / 2.0
    law = distributions.limit_law(beta, args.N, N0, args.vhat0)
    theory = condensate.solve_mu_continuous(beta, condensate.coupling(args.vhat0, args.N), N0)
    rp = distributions.RandomizedPoisson(theory)
    count = args.count or config.sample_count
    summary = distributions.sample(rp, count, config.ensemble_seed, reference=law)
    payload = {
        "law": law.params(),
        "randomized_poisson": {"mean": rp.mean(), "variance": rp.variance()},
        "sample": summary.to_dict(),
    }
    return payload, None, True


def cmd_correlators(args: argparse.Namespace, config: RunConfig) -> Outcome:
    state, table = _state(args, config)
    spectrum = bogoliubov.build_spectrum(state, _vhat(config), table, tol=config.tail_tol)
    patterns = args.pattern or [
        "ad(0) a(0)",
        "ad(0) ad(0) a(0) a(0)",
        "ad(p) a(p)",
        "ad(0) ad(0) a(p) a(-p)",
        "ad(p) ad(-p) a(0) a(0)",
        "ad(0) ad(p) a(0) a(p)",
    ]
    predictions = [
        density_matrices.two_pdm(spectrum, p, regime=args.regime).to_dict() for p in patterns
    ]
    payload = {
        "phase": state.phase,
        "predictions": predictions,
        "variances": density_matrices.variances(spectrum, args.regime),
    }
    return payload, None, True


def cmd_oracle_verify(args: argparse.Namespace, config: RunConfig) -> Outcome:
    report = fock_oracle.run_battery(
        n_zero=args.n_max,
        n_pair=args.n_max,
        tol=args.tol,
        convergence=not args.no_convergence,
        seed=config.ensemble_seed,
        dim_limit=config.fock_dim_limit,
    )
    return report, None, report["passed"]


def cmd_check_inequalities(args: argparse.Namespace, config: RunConfig) -> Outcome:
    report = ineq_testbed.run_ensemble(
        config.ensemble_dims,
        config.ensemble_count,
        config.ensemble_seed,
        workers=config.workers,
        ceiling=config.ratio_ceiling,
    )
    return report, None, report["passed"]


def cmd_free_energy(args: argparse.Namespace, config: RunConfig) -> Outcome:
    vhat = _vhat(config)
    if args.beta_sweep:
        rows = free_energy.beta_sweep(args.N, args.beta_sweep, vhat)
        mono = free_energy.check_temperature_monotonicity(rows)
        payload = {"N": args.N, "rows": rows, "monotonicity": mono}
        return payload, free_energy.sweep_csv(rows), mono["passed"]
    beta = _beta(args)
    table = _table(beta, config)
    breakdown = free_energy.total_free_energy(beta, args.N, vhat, table, tol=config.tail_tol)
    payload = {"beta": beta, "N": args.N, **breakdown.to_dict()}
    if vhat.vhat0 > 0:
        payload["chemical_potential"] = free_energy.chem_potential_estimate(
            beta, args.N, vhat.vhat0, table
        )
        if breakdown.regime != PhaseRegime.NON_CONDENSED:
            payload["theta_bec"] = free_energy.theta_bec_ratio(
                beta, breakdown.diagnostics["N0"], args.N, vhat.vhat0
            )
            payload["legendre"] = free_energy.legendre_consistency(beta, args.N, vhat, table)
    return payload, _flat_csv({k: v for k, v in payload.items() if k != "diagnostics"}), True


def acceptance_exit_code(report: Dict[str, Any]) -> int:
    """Usage errors win over accuracy errors, which win over violations."""
    kinds = {e["kind"] for e in report.get("errors", ())}
    if acceptance.USAGE in kinds:
        return EXIT_USAGE
    if acceptance.ACCURACY in kinds:
        return EXIT_ACCURACY
    return EXIT_VIOLATION if report["hard_failures"] else EXIT_OK


def cmd_acceptance(args: argparse.Namespace, config: RunConfig) -> Outcome:
    report = acceptance.run_acceptance(
        config, quick=args.quick, only=args.only, determinism=not args.no_determinism
    )
    return report, None, not report["hard_failures"]


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], Outcome]] = {
    "ideal-gas": cmd_ideal_gas,
    "spectrum": cmd_spectrum,
    "condensate": cmd_condensate,
    "distribution": cmd_distribution,
    "correlators": cmd_correlators,
    "oracle-verify": cmd_oracle_verify,
    "check-inequalities": cmd_check_inequalities,
    "free-energy": cmd_free_energy,
    "acceptance": cmd_acceptance,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_state_args(p: argparse.ArgumentParser, N: float = 1e6):
    p.add_argument("--N", type=float, default=N, help=f"particle number (default {N:g})")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--beta", type=float, default=None, help="inverse temperature")
    group.add_argument(
        "--beta-ratio",
        "--beta_ratio",
        type=float,
        default=2.0,
        dest="beta_ratio",
        help="β in units of β_c(N) when --beta is not given (default 2.0)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bose-gibbs",
        description="Mean-field Bose gas effective theories and correlation inequalities",
    )
    parser.add_argument("--config", default=None, help="key = value config file")
    parser.add_argument("--format", choices=("json", "csv"), default=None, dest="output_format")
    parser.add_argument("--output", "-o", default=None, help="write the artifact here")
    parser.add_argument("--seed", type=int, default=None, help="overrides ensemble_seed")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--vhat", default=None, help="v̂ table file ('n value' lines)")
    parser.add_argument("--log-file", "--log_file", default=None, dest="log_file")
    parser.add_argument(
        "--log-level",
        "--log_level",
        default="INFO",
        dest="log_level",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ideal-gas", help="μ0, N0, phase and free energies")
    _add_state_args(p)

    p = sub.add_parser("spectrum", help="Bogoliubov spectrum and bound checks")
    _add_state_args(p)
    p.add_argument("--rows", type=int, default=None, help="limit the CSV to this many shells")

    p = sub.add_parser("condensate", help="Φ⁴ condensate theory at mean M")
    _add_state_args(p)
    p.add_argument("--M", type=float, default=None, help="condensate mean (default N/2)")
    p.add_argument("--vhat0", type=float, default=1.0)
    p.add_argument("--kind", choices=(condensate.CONTINUOUS, condensate.DISCRETE),
                   default=condensate.DISCRETE)

    p = sub.add_parser("distribution", help="limit law and seeded randomized-Poisson draws")
    _add_state_args(p)
    p.add_argument("--N0", type=float, default=None, help="condensate number (default N/2)")
    p.add_argument("--vhat0", type=float, default=1.0)
    p.add_argument("--count", type=int, default=None)

    p = sub.add_parser("correlators", help="predicted 1- and 2-pdm elements")
    _add_state_args(p)
    p.add_argument("--pattern", action="append", default=None,
                   help='normal-ordered pattern, e.g. "ad(0) ad(0) a(p) a(-p)"; repeatable')
    p.add_argument("--regime", choices=(density_matrices.CONDENSED,
                                        density_matrices.NON_CONDENSED), default=None)

    p = sub.add_parser("oracle-verify", help="truncated Fock-space cross-validation")
    p.add_argument("--n-max", "--n_max", type=int, default=20, dest="n_max")
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--no-convergence", action="store_true", dest="no_convergence")

    p = sub.add_parser("check-inequalities", help="random Hermitian-pair ensemble")
    p.add_argument("--dims", type=parse_dims, default=None, help='e.g. "2..8" or "2,4"')
    p.add_argument("--count", type=int, default=None, help="pairs per dimension")

    p = sub.add_parser("free-energy", help="free-energy breakdown or β sweep")
    _add_state_args(p)
    p.add_argument("--beta-sweep", "--beta_sweep", default=None, dest="beta_sweep",
                   help='"lo:hi:beta_c:count" (CSV rows beta,F_bog,F_bec,total,regime)')

    p = sub.add_parser("acceptance", help="run the acceptance suite")
    p.add_argument("--quick", action="store_true", help="reduced grids and sample counts")
    p.add_argument("--only", nargs="+", default=None, choices=sorted(
        list(acceptance.CRITERIA) + [acceptance.DETERMINISM]))
    p.add_argument("--no-determinism", action="store_true", dest="no_determinism")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config)
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides["ensemble_seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.vhat is not None:
        overrides["vhat_path"] = args.vhat
    if args.output_format is not None:
        overrides["output_format"] = args.output_format
    if args.log_file is not None:
        overrides["log_file"] = args.log_file
    if getattr(args, "dims", None):
        overrides["ensemble_dims"] = tuple(args.dims)
    if args.command == "check-inequalities" and args.count:
        overrides["ensemble_count"] = args.count
    return config.replace(**overrides) if overrides else config


def _emit(text: str, output: Optional[str]):
    if output:
        with open(output, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info("Wrote %s", output)
    else:
        sys.stdout.write(text)


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE

    try:
        config = _config_from_args(args)
    except ValueError as exc:
        sys.stderr.write(f"bose-gibbs: {exc}\n")
        return EXIT_USAGE
    setup_logging(config.log_file, level=getattr(logging, args.log_level))
    logger.info("Starting %s (config %s)", args.command, config.digest()[:12])
    start = time.perf_counter()

    try:
        payload, csv_text, ok = COMMANDS[args.command](args, config)
    except (AccuracyError, ConvergenceError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        sys.stderr.write(f"bose-gibbs: {type(exc).__name__}: {exc}\n")
        return EXIT_ACCURACY
    except (ValueError, ResourceError) as exc:
        # DomainError, UnsupportedPatternError and RegimeMismatchError are ValueErrors
        logger.error("%s: %s", type(exc).__name__, exc)
        sys.stderr.write(f"bose-gibbs: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE

    sweep = args.command == "free-energy" and args.beta_sweep
    fmt = args.output_format or ("csv" if sweep else config.output_format)
    if fmt == "csv" and csv_text is not None:
        _emit(csv_text, args.output)
    else:
        if fmt == "csv":
            logger.warning("%s has no CSV form; writing JSON", args.command)
        artifact = envelope(args.command, config, payload)
        _emit(stable_dumps(artifact, indent=2) + "\n", args.output)

    logger.info("Finished %s in %.1fs (hard checks %s)", args.command,
                time.perf_counter() - start, "passed" if ok else "FAILED")
    if args.command == "acceptance":
        return acceptance_exit_code(payload)
    return EXIT_OK if ok else EXIT_VIOLATION


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
