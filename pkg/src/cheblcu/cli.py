"""Command-line front end: ``cheblcu analyze | apply | verify``.

Reports are JSON documents tagged with ``SCHEMA``.  Keys are sorted and
floats use Python's shortest round-trip representation, so a report is
byte-identical for identical inputs and seed.

Exit codes: 0 success, 1 bound violation, 2 input error, 3 capability error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .amplify import REPETITION_CONSTANT, amplify, amplify_explicit, optimal_rounds, state_preparation
from .chebyshev import taylor_to_cheb
from .errors import CapabilityError, CheblcuError, DegenerateOutcomeError, DomainError, NumericalError
from .functions import FunctionSpec, parse_function
from .hermitian import QueryLedger, SparseHermitian, load_matrix, spectral_stats
from .instances import uniform_state
from .lcu import LcuPlan, build_lcu_circuit, check_agreement, run_lcu_full, run_lcu_operator
from .suites import SUITE_NAMES, run_suite

SCHEMA = "cheblcu.report/1"
EXIT_OK, EXIT_BOUND, EXIT_INPUT, EXIT_CAPABILITY = 0, 1, 2, 3
AGREEMENT_STATE_TOL = 1e-9
AGREEMENT_PROB_TOL = 1e-10


def _clean(obj: Any) -> Any:
    """Convert numpy scalars to Python types and non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def render(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_state(spec: str, n: int) -> np.ndarray:
    """``uniform`` or a JSON file holding a list of [re, im] pairs (or plain reals), normalised on load."""
    if spec == "uniform":
        return uniform_state(n)
    try:
        raw = json.loads(Path(spec).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read state file {spec}: {exc}") from exc
    try:
        vals = [complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in raw]
    except (TypeError, ValueError) as exc:
        raise DomainError(f"state file {spec} must list [re, im] pairs") from exc
    psi = np.asarray(vals, dtype=complex)
    if psi.shape != (n,):
        raise DomainError(f"state has {psi.size} components, matrix dimension is {n}")
    norm = np.linalg.norm(psi)
    if not np.isfinite(norm) or norm == 0:
        raise DomainError("state must be finite and nonzero")
    return psi / norm


def _complexity_estimate(fn: FunctionSpec, plan: LcuPlan, mu: float, eps: float) -> float | None:
    """(gamma/mu) (C/eps)^{log2(Lambda d)} log2(C/eps), or (gamma/mu) L for exact plans."""
    if mu <= 0:
        return None
    if fn.exact:
        return plan.weight / mu * plan.n_terms
    ratio = fn.derivative_bound(plan.norm_bound) / eps
    return plan.weight / mu * ratio ** math.log2(plan.scale) * math.log2(ratio)


def _prepare(args) -> tuple[SparseHermitian, FunctionSpec, LcuPlan, dict, dict]:
    if not 0 < args.eps <= 0.5:
        raise DomainError(f"--eps must lie in (0, 1/2], got {args.eps}")
    A = load_matrix(args.matrix)
    fn = parse_function(args.function)
    lam = max(1.0, A.norm)
    plan = fn.plan(args.eps, lam, A.sparsity)
    taylor = fn.taylor(args.eps, lam)
    stats = spectral_stats(A, fn.evaluate)
    gamma = plan.weight
    p_bound = (stats.mu / gamma) ** 2
    inputs = {
        "matrix_sha256": A.fingerprint(),
        "N": A.dim,
        "d": A.sparsity,
        "Lambda": lam,
        "function": fn.name,
        "eps": args.eps,
    }
    plan_info = {
        "L": plan.n_terms,
        "exact": fn.exact,
        "derivative_bound": taylor.derivative_bound,
        "alpha_weight": taylor.weight,
        "beta_weight": taylor_to_cheb(taylor).weight,
        "gamma_weight": gamma,
        "gamma": list(plan.coefficients),
        "spectral_norm": stats.norm,
        "mu": stats.mu,
        "f_min": stats.f_min,
        "probability_bound": p_bound,
        "predicted_rounds": optimal_rounds(p_bound) if 0 < p_bound <= 1 else None,
        "complexity_estimate": _complexity_estimate(fn, plan, stats.mu, args.eps),
    }
    return A, fn, plan, inputs, plan_info


def cmd_analyze(args) -> tuple[dict, int]:
    _, _, _, inputs, plan_info = _prepare(args)
    return {"schema": SCHEMA, "command": "analyze", "input": inputs, "plan": plan_info, "passed": True}, EXIT_OK


def cmd_apply(args) -> tuple[dict, int]:
    A, fn, plan, inputs, plan_info = _prepare(args)
    psi = load_state(args.state, A.dim)
    inputs["state"] = args.state
    rng = np.random.default_rng(args.seed)
    ledger = QueryLedger()
    out = run_lcu_operator(A, plan, psi, ledger)
    checks = {
        name: {"passed": c["passed"], "value": c["value"], "bound": c["bound"], "asserted": c["asserted"]}
        for name, c in out.checks.items()
    }
    results = {
        "fidelity": out.fidelity_to_oracle,
        "distance": out.distance_to_oracle,
        "success_probability": out.success_probability,
        "operator_error": out.operator_error,
        "mu_tilde": out.mu_tilde,
        "error_bound": out.error_bound,
        "query_count": out.query_count,
        "shared_query_count": out.shared_query_count,
        "walk_steps": ledger.walk_steps,
        "state": [[z.real, z.imag] for z in out.state],
    }
    if fn.exact:
        checks["exactness"] = {"passed": out.distance_to_oracle <= 1e-10, "value": out.distance_to_oracle,
                               "bound": 1e-10, "asserted": True}

    if args.full:
        full = run_lcu_full(A, plan, psi, rng)
        ds, dp = check_agreement(out, full)
        results["full_agreement"] = {"state": ds, "probability": dp}
        checks["full_agreement"] = {"passed": ds <= AGREEMENT_STATE_TOL and dp <= AGREEMENT_PROB_TOL,
                                    "value": max(ds, dp), "bound": AGREEMENT_PROB_TOL, "asserted": True}

    if args.amplify:
        if args.full:
            circuit = build_lcu_circuit(A, plan, rng)
            run = amplify_explicit(circuit.matrix(), state_preparation(psi, rng), circuit.ancilla_dim)
            mode = "explicit"
        else:
            run = amplify(out.success_probability)
            mode = "analytic"
        results["amplification"] = {
            "mode": mode,
            "initial_probability": run.initial_probability,
            "rounds": run.rounds,
            "amplified_probability": run.amplified_probability,
            "predicted_probability": run.predicted_probability,
            "residual_failure": run.residual_failure,
            "repetitions": run.repetitions,
            "repetition_constant": REPETITION_CONSTANT,
            "repetition_bound": run.repetition_bound,
        }
        checks["repetition_bound"] = {"passed": run.within_repetition_bound, "value": run.repetitions,
                                      "bound": run.repetition_bound, "asserted": True}
        checks["amplified_probability"] = {
            "passed": abs(run.amplified_probability - run.predicted_probability) <= 1e-10,
            "value": abs(run.amplified_probability - run.predicted_probability),
            "bound": 1e-10,
            "asserted": True,
        }

    passed = all(c["passed"] for c in checks.values() if c["asserted"])
    report = {"schema": SCHEMA, "command": "apply", "input": inputs, "plan": plan_info,
              "results": results, "checks": checks, "passed": passed}
    return report, EXIT_OK if passed else EXIT_BOUND


def cmd_verify(args) -> tuple[dict, int]:
    checks = run_suite(args.suite, args.seed)
    passed = all(c.passed for c in checks)
    report = {"schema": SCHEMA, "command": "verify", "suite": args.suite, "seed": args.seed,
              "checks": [c.as_dict() for c in checks], "passed": passed}
    return report, EXIT_OK if passed else EXIT_BOUND


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cheblcu", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--matrix", required=True, help="JSON matrix file (1-based [row, col, re, im] entries)")
        p.add_argument("--function", default="exp", help="exp, exp_neg, identity, monomial:k, polynomial:c0,c1,...")
        p.add_argument("--eps", type=float, default=1e-6, help="target precision in (0, 1/2] (default: %(default)s)")
        p.add_argument("--out", help="also write the report to this path")

    p = sub.add_parser("analyze", help="build the plan and report bounds without running it")
    common(p)
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("apply", help="run the LCU and compare against the exact oracle")
    common(p)
    p.add_argument("--state", default="uniform", help="'uniform' or a JSON list of [re, im] pairs")
    p.add_argument("--amplify", action="store_true", help="add amplitude amplification")
    p.add_argument("--full", action="store_true", help="also run the explicit circuit (N <= 8, L <= 8)")
    p.add_argument("--seed", type=int, default=0, help="seed for unitary completions")
    p.set_defaults(handler=cmd_apply)

    p = sub.add_parser("verify", help="run a seeded invariant suite")
    p.add_argument("--suite", default="all", help=f"one of {', '.join(SUITE_NAMES)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="also write the report to this path")
    p.set_defaults(handler=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, code = args.handler(args)
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (DomainError, DegenerateOutcomeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except CheblcuError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
    text = render(report)
    sys.stdout.write(text)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"input error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_INPUT
    return code
