"""Command-line front end.

Exit codes: 0 success, 2 input validation, 3 solver failure, 4 size guard,
5 a sound bound was violated by the sampling self-test.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    TAG_DELTA,
    TAG_DIAGONAL,
    TAG_MI,
    PinskerConstant,
    PinskerConstantWarning,
    correlation_distance,
    deviation_bound_delta,
    deviation_bound_mi,
    diagonal_bound,
    diagonal_functional,
    mutual_information,
)
from .distributions import Kind, from_json, zero_marginal_rows
from .errors import (
    CausalBoundsError,
    NotPerfectChannel,
    NumericalFailure,
    SolverFailure,
    TooLarge,
    ValidationError,
    ZeroMarginal,
)
from .lp import dual_objective_f, solve_mu_program
from .oracle import MuMode, NuMode, SamplerConfig, interventional_cloud
from .perfect import (
    enumerate_extreme_interventionals,
    is_perfect_channel,
    qf_membership,
    union_membership,
)

SCHEMA = "causal-bounds/run-report/1"
EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_SIZE, EXIT_VIOLATION = 0, 2, 3, 4, 5
EMPIRICAL = "empirical"
TAG_LP = "kernel-lp"
TAG_PERFECT = "perfect-channel-polytope"


class InputError(ValidationError):
    pass


def _tagged(value, tag: str) -> dict:
    return {"value": value, "tag": tag}


def _load(path: str, kind: Kind) -> np.ndarray:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    try:
        return from_json(obj, kind)
    except ValidationError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_pi(path: str) -> np.ndarray:
    pi = _load(path, Kind.OBSERVED_JOINT)
    rows = zero_marginal_rows(pi)
    if rows:
        raise ZeroMarginal(rows[0], f"{path}: observed marginal pi_x is zero at x={rows[0]}; such rows are not supported")
    return pi


def _load_objective(path: str, n: int) -> np.ndarray:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: cannot load objective ({exc})") from None
    data = obj.get("data") if isinstance(obj, dict) else obj
    try:
        ell = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError):
        raise InputError(f"{path}: objective must be a numeric vector or matrix") from None
    if ell.shape == (n,):
        ell = np.diag(ell)
    if ell.shape != (n, n):
        raise InputError(f"{path}: objective must have shape ({n},) or ({n}, {n}), got {ell.shape}")
    if not np.all(np.isfinite(ell)):
        idx = tuple(int(i) for i in np.argwhere(~np.isfinite(ell))[0])
        raise InputError(f"{path}: non-finite objective entry at index {idx}")
    return ell


def _resolve_k(args, n: int, notes: list[str]) -> int:
    if args.k is None:
        notes.append(f"k not given; defaulting to k = n = {n}")
        return n
    if args.k < 1:
        raise InputError(f"k must be >= 1, got {args.k}")
    return args.k


def _canonical(obj) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        raise TypeError(type(o))

    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=default)


def input_digest(command: str, inputs: dict) -> str:
    """SHA-256 of the canonical JSON of the parsed inputs and parameters."""
    return hashlib.sha256(_canonical({"command": command, "inputs": inputs}).encode()).hexdigest()


def _jsonable(obj):
    return json.loads(_canonical(obj))


# -- commands ---------------------------------------------------------------

def cmd_bound_diagonal(args, notes):
    pi = _load_pi(args.pi)
    n = pi.shape[0]
    k = _resolve_k(args, n, notes)
    weights = args.weights if args.weights is not None else [1.0] * n
    if len(weights) != n:
        raise InputError(f"--weights needs {n} values, got {len(weights)}")
    ell = diagonal_functional(weights)
    rep = diagonal_bound(pi, ell, k)
    inputs = {"pi": pi, "weights": ell, "k": k}
    results = {
        "bound": _tagged(rep.value, rep.theorem),
        "support_size": _tagged(rep.certificate["support_size"], rep.theorem),
        "witness_x": _tagged(rep.certificate["witness_x"], rep.theorem),
        "min_term": _tagged(rep.certificate["min_term"], rep.theorem),
        "k": _tagged(k, "input"),
    }
    lines = [
        f"diagonal bound: L(zeta) >= {rep.value:.12g}",
        f"  support size {rep.certificate['support_size']}, k = {k}",
        f"  witnessing term ell[x] pi[x,x] = {rep.certificate['min_term']:.12g} at x = {rep.certificate['witness_x']}",
    ]
    return inputs, results, lines, EXIT_OK


def cmd_bound_deviation(args, notes):
    pi = _load_pi(args.pi)
    mu = _load(args.mu, Kind.LATENT_JOINT)
    mode = PinskerConstant(args.constant)
    delta = correlation_distance(mu)
    info = mutual_information(mu)
    delta_bound = deviation_bound_delta(pi, mu)
    corrected = deviation_bound_mi(pi, mu, PinskerConstant.CORRECTED)
    results = {
        "correlation_distance": _tagged(delta, TAG_DELTA),
        "mutual_information_nats": _tagged(info, TAG_MI),
        "delta_bound": _tagged(delta_bound, TAG_DELTA),
        "mi_bound_corrected": _tagged(corrected, TAG_MI),
        "constant_mode": mode.value,
    }
    lines = [
        f"correlation distance delta(mu) = {delta:.12g}",
        f"mutual information I(X;U)     = {info:.12g} nats",
        f"||zeta - eta||_1 <= {delta_bound:.12g}   (delta(mu) / min_x pi_x)",
    ]
    if mode is PinskerConstant.CORRECTED:
        results["mi_bound"] = _tagged(corrected, TAG_MI)
        lines.append(f"||zeta - eta||_1 <= {corrected:.12g}   (sqrt(2 I) / min_x pi_x, constant mode: corrected)")
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PinskerConstantWarning)
            stated = deviation_bound_mi(pi, mu, PinskerConstant.PAPER_STATED)
        half = float(np.sqrt(info / 2.0))
        results["mi_bound"] = _tagged(stated, TAG_MI + "/uncorrected-constant")
        lines.append(f"||zeta - eta||_1 <= {stated:.12g}   (sqrt(I / 2) / min_x pi_x, constant mode: paper)")
        lines.append(f"corrected bound for comparison: {corrected:.12g}")
        msg = (
            "WARNING: uncorrected constant sqrt(I/2) in use; it does not bound the correlation distance in general"
        )
        if delta > half + 1e-12:
            msg += f" and fails here: delta(mu)={delta:.6g} > sqrt(I/2)={half:.6g}"
        notes.append(msg)
        results["warning"] = msg
    return {"pi": pi, "mu": mu, "constant": mode.value}, results, lines, EXIT_OK


def cmd_solve_mu(args, notes):
    pi = _load_pi(args.pi)
    mu = _load(args.mu, Kind.LATENT_JOINT)
    ell = _load_objective(args.objective, pi.shape[0])
    res = solve_mu_program(pi, mu, ell)
    alpha = np.asarray(res.certificate.alpha, dtype=np.float64)
    f_val = dual_objective_f(pi, mu, ell, alpha)
    sol = res.solution
    results = {
        "value": _tagged(res.value, TAG_LP),
        "dual_value": _tagged(sol.dual_value, TAG_LP),
        "duality_gap": _tagged(sol.gap, TAG_LP),
        "dual_objective_f": _tagged(f_val, TAG_LP),
        "alpha": _tagged(alpha.tolist(), TAG_LP),
        "iterations": _tagged(sol.iterations, TAG_LP),
    }
    if args.dump_nu:
        results["nu"] = _tagged(np.asarray(res.nu).tolist(), TAG_LP)
    lines = [
        f"kernel LP value      = {res.value:.12g}",
        f"dual objective f     = {f_val:.12g}",
        f"duality gap          = {sol.gap:.3g}",
        f"iterations           = {sol.iterations}",
        "alpha certificate [x][z]:",
        *("  " + " ".join(f"{v: .9g}" for v in row) for row in alpha),
    ]
    if args.dump_nu:
        lines.append("nu* [z][x][u]: " + json.dumps(results["nu"]["value"]))
    return {"pi": pi, "mu": mu, "objective": ell}, results, lines, EXIT_OK


def cmd_perfect(args, notes):
    pi = _load_pi(args.pi)
    if not is_perfect_channel(pi):
        off = float(pi.sum() - np.trace(pi))
        raise NotPerfectChannel(f"{args.pi}: not a perfect channel (off-diagonal mass {off:.3g})")
    n = pi.shape[0]
    k = _resolve_k(args, n, notes)
    inputs = {"pi": pi, "k": k, "action": args.action}
    if args.action == "enumerate":
        verts = enumerate_extreme_interventionals(pi, k)
        results = {
            "count": _tagged(len(verts), TAG_PERFECT),
            "vertices": [
                {"zeta": _tagged(v.zeta.tolist(), TAG_PERFECT), "f": list(v.f), "g": v.g.tolist()} for v in verts
            ],
        }
        lines = [f"{len(verts)} candidate extreme interventional matrices (n={n}, k={k})"]
        for v in verts:
            lines.append(f"  f={v.f}  zeta={json.dumps(np.round(v.zeta, 12).tolist())}")
        return inputs, results, lines, EXIT_OK

    zeta = _load(args.zeta, Kind.CONDITIONAL)
    if zeta.shape != pi.shape:
        raise InputError(f"{args.zeta}: zeta must be {n} x {n}")
    inputs["zeta"] = zeta
    if args.action == "witness":
        f = union_membership(zeta, pi, k)
        results = {"witness": list(f) if f is not None else None, "tag": TAG_PERFECT}
        lines = [f"witness f = {f}" if f is not None else "witness: none"]
        return inputs, results, lines, EXIT_OK

    if k**n > 10**6:
        raise TooLarge(k**n, 10**6)
    table = []
    lines = ["f                slack per x                          member"]
    for f in itertools.product(range(k), repeat=n):
        rep = qf_membership(zeta, pi, f)
        table.append({"f": list(f), "slack": _tagged(rep.slack.tolist(), TAG_PERFECT), "member": rep.member})
        lines.append(f"{str(f):<16} {' '.join(f'{s: .6g}' for s in rep.slack):<36} {rep.member}")
    results = {"table": table, "tag": TAG_PERFECT, "any_member": any(r["member"] for r in table)}
    return inputs, results, lines, EXIT_OK


def _parse_functional(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"--functional expects comma-separated numbers, got {text!r}") from None


def cmd_cloud(args, notes):
    pi = _load_pi(args.pi)
    n = pi.shape[0]
    k = _resolve_k(args, n, notes)
    functionals = [_parse_functional(s) for s in (args.functional or [])] or [[1.0] * n]
    for ell in functionals:
        if len(ell) != n:
            raise InputError(f"--functional needs {n} weights, got {len(ell)}")
        diagonal_functional(ell)
    if args.count < 1:
        raise InputError("--count must be >= 1")
    config = SamplerConfig(
        seed=args.seed, n=n, k=k, count=args.count,
        mu_mode=MuMode(args.mu_mode), nu_mode=NuMode(args.nu_mode),
    )
    summary, raw = interventional_cloud(pi, k, config, functionals, keep_raw=bool(args.export_jsonl))
    if args.export_jsonl:
        with open(args.export_jsonl, "w") as fh:
            for s in raw:
                fh.write(json.dumps({"index": s.index, "draw": s.draw, "zeta": s.zeta.tolist(), "residual": s.residual}) + "\n")
    violations = summary.violations(1e-9)
    inputs = {
        "pi": pi, "k": k, "count": args.count, "seed": args.seed, "functionals": functionals,
        "mu_mode": config.mu_mode.value, "nu_mode": config.nu_mode.value,
    }
    results = {
        "count": _tagged(summary.count, EMPIRICAL),
        "functional_min": {name: _tagged(v, EMPIRICAL) for name, v in summary.functional_min.items()},
        "functional_max": {name: _tagged(v, EMPIRICAL) for name, v in summary.functional_max.items()},
        "bounds": {name: _tagged(v, TAG_DIAGONAL) for name, v in summary.bound_values.items()},
        "min_slack": {name: _tagged(v, EMPIRICAL) for name, v in summary.bound_slack.items()},
        "worst_residual": _tagged(summary.worst_residual, EMPIRICAL),
        "diameter": _tagged(summary.diameter, EMPIRICAL),
        "violations": sorted(violations),
    }
    lines = [f"cloud of {summary.count} compatible models (seed {args.seed}, k = {k})"]
    for name in summary.functional_min:
        lines.append(f"  {name}: min {summary.functional_min[name]:.12g}, max {summary.functional_max[name]:.12g}")
    lines.append(f"  worst compatibility residual {summary.worst_residual:.3g}, diameter {summary.diameter:.6g}")
    lines.append("  min slack against registered bounds:")
    for name, s in summary.bound_slack.items():
        flag = "  VIOLATED" if name in violations else ""
        lines.append(f"    {name:<40} {s: .6g}{flag}")
    return inputs, results, lines, EXIT_VIOLATION if violations else EXIT_OK


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a machine-readable run report")

    parser = argparse.ArgumentParser(
        prog="causal-bounds",
        description="Bounds on interventional distributions under a discrete latent confounder.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound-diagonal", parents=[common], help="closed-form lower bound on a diagonal functional")
    p.add_argument("pi", help="observed joint JSON file")
    p.add_argument("--weights", type=float, nargs="+", help="diagonal weights ell_x (default: all ones)")
    p.add_argument("--k", type=int, help="number of latent values (default: n)")
    p.set_defaults(func=cmd_bound_diagonal)

    p = sub.add_parser("bound-deviation", parents=[common], help="bounds on ||zeta - eta||_1 for a latent joint")
    p.add_argument("pi")
    p.add_argument("mu", help="latent joint JSON file")
    p.add_argument("--constant", choices=[m.value for m in PinskerConstant], default="corrected")
    p.set_defaults(func=cmd_bound_deviation)

    p = sub.add_parser("solve-mu", parents=[common], help="solve the kernel LP for a fixed latent joint")
    p.add_argument("pi")
    p.add_argument("mu")
    p.add_argument("objective", help="JSON file with ell[x][z] (or a diagonal vector)")
    p.add_argument("--dump-nu", action="store_true")
    p.set_defaults(func=cmd_solve_mu)

    p = sub.add_parser("perfect", help="perfect-channel geometry")
    p.add_argument("pi")
    p.add_argument("--k", type=int)
    actions = p.add_subparsers(dest="action", required=True)
    actions.add_parser("enumerate", parents=[common])
    for name in ("membership", "witness"):
        a = actions.add_parser(name, parents=[common])
        a.add_argument("zeta", help="conditional matrix JSON file")
    p.set_defaults(func=cmd_perfect)

    p = sub.add_parser("cloud", parents=[common], help="Monte-Carlo self-test of every registered bound")
    p.add_argument("pi")
    p.add_argument("--k", type=int)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--functional", action="append", help="comma-separated diagonal weights; repeatable")
    p.add_argument("--mu-mode", choices=[m.value for m in MuMode], default=MuMode.VERTEX_BIASED.value)
    p.add_argument("--nu-mode", choices=[m.value for m in NuMode], default=NuMode.MIXED.value)
    p.add_argument("--export-jsonl", metavar="PATH", help="write one sampled zeta per line")
    p.set_defaults(func=cmd_cloud)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command if args.command != "perfect" else f"perfect {args.action}"
    notes: list[str] = []
    start = time.perf_counter()
    try:
        inputs, results, lines, code = args.func(args, notes)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalFailure, SolverFailure) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except TooLarge as exc:
        print(f"too large: {exc.count} candidates (limit {exc.limit})", file=sys.stderr)
        return EXIT_SIZE
    except CausalBoundsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    elapsed = time.perf_counter() - start
    for note in notes:
        print(f"note: {note}" if not note.startswith("WARNING") else note, file=sys.stderr)
    if notes:
        results["notes"] = notes
    if args.json:
        report = {
            "schema": SCHEMA,
            "command": command,
            "input_digest": input_digest(command, inputs),
            "results": _jsonable(results),
            "timing": {"seconds": elapsed},
            "version": __version__,
        }
        print(json.dumps(report, indent=2))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
