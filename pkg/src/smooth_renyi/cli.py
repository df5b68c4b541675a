"""Command-line entry point: ``smooth-renyi {entropy,guess,code,asymptotics,oracle}``.

Exit status is 0 on success, 1 on invalid input and 2 when a size budget is
exceeded; failures print a JSON object to stderr. All values are in nats
unless ``--bits`` is given, which rescales logarithmic quantities only.
"""
import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import io as sio
from ._validation import alpha_from_rho, check_alpha, check_epsilon, check_rho
from .asymptotics import convergence_report, vanishing_vs_zero_error_contrast
from .coding import (
    LENGTH_RULES,
    build_code,
    code_error_probability,
    code_moment,
    coding_exponent_curve,
    decode,
    encode_records,
    kraft_holds,
)
from .distributions import DEFAULT_MAX_CELLS, make_mixture, mixture_block
from .entropy import (
    arimoto_conditional_renyi,
    renner_wolf_entropy,
    result_from_allocation,
    smooth_conditional_entropy,
)
from .exceptions import BudgetError, SmoothRenyiError, ValidationError
from .guessing import (
    converse_bound,
    direct_bound,
    evaluate,
    guessing_exponent_curve,
    optimal_strategy,
    optimize_with_penalty,
    simulate_guessing,
    smooth_entropy_strategy,
)
from .oracle import oracle_allocation

# keys holding logarithmic quantities, rescaled by --bits
LOG_KEYS = frozenset({
    "value", "rate", "target", "gap", "lower_bound", "sensitivity_rate", "exponent",
    "bound_lo", "bound_hi", "guess_exponent", "entropy_exponent", "zero_error_exponent",
    "arikan_exponent", "shannon_target", "cost_exponent", "shannon_exponent", "solver_value",
    "oracle_value",
})
FORMATS = ("json", "csv")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _add_source(p, need_mixture=False):
    if need_mixture:
        p.add_argument("--mixture", help="mixture JSON file")
        p.add_argument("--dist", help="joint JSON file, read as a one-component mixture")
    else:
        p.add_argument("--dist", help="joint JSON file")
        p.add_argument("--mixture", help="mixture JSON file (block of length --n)")
        p.add_argument("--n", type=_positive_int, default=1, help="block length for --mixture")


def _add_common(p):
    p.add_argument("--out", help="output path, or 'json'/'csv' to pick the format (default stdout)")
    p.add_argument("--format", choices=FORMATS, default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=_positive_int, default=1, help="accepted for interface parity")
    p.add_argument("--bits", action="store_true", help="report logarithmic quantities in bits")
    p.add_argument("--max-cells", type=_positive_int, default=DEFAULT_MAX_CELLS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smooth-renyi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("entropy", help="smooth, Arimoto, worst-case or oracle entropy")
    _add_source(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--variant", choices=("smooth", "arimoto", "renner-wolf", "oracle"), default="smooth")
    p.add_argument("--step", type=float, default=1e-4, help="oracle grid step")
    _add_common(p)

    p = sub.add_parser("guess", help="least-cost guessing with a give-up option")
    _add_source(p, need_mixture=True)
    p.add_argument("--n", type=_positive_int, default=1, help="block length for --mixture")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--strategy", choices=("optimal", "smooth-entropy"), default="optimal")
    p.add_argument("--penalty", type=float, help="optimize the budget for this error penalty")
    p.add_argument("--simulate", type=_positive_int, metavar="TRIALS")
    p.add_argument("--exponent", action="store_true", help="tabulate per-letter exponents")
    p.add_argument("--n-max", type=_positive_int, default=6)
    _add_common(p)

    p = sub.add_parser("code", help="prefix code with escape")
    _add_source(p, need_mixture=True)
    p.add_argument("--n", type=_positive_int, default=1, help="block length for --mixture")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--lengths", choices=LENGTH_RULES, default="shannon",
                   help="payload length rule (default: Shannon lengths of the tilted truncation)")
    p.add_argument("--emit-codebook", metavar="PATH")
    p.add_argument("--encode-file", metavar="PATH", help="lines 'x,y'")
    p.add_argument("--decode-file", metavar="PATH", help="lines 'y,bit_length,hex'")
    p.add_argument("--exponent", action="store_true")
    p.add_argument("--n-max", type=_positive_int, default=6)
    _add_common(p)

    p = sub.add_parser("asymptotics", help="finite-block rates against the single-letter target")
    _add_source(p, need_mixture=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--n-max", type=_positive_int, default=8)
    p.add_argument("--contrast", action="store_true",
                   help="one-component source: exponents with and without error allowance")
    _add_common(p)

    p = sub.add_parser("oracle", help="exhaustive allocation search next to the solver")
    _add_source(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--step", type=float, default=1e-4)
    _add_common(p)
    return parser


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def _scale(obj, factor):
    if isinstance(obj, dict):
        return {k: (v * factor if k in LOG_KEYS and isinstance(v, (int, float)) and not isinstance(v, bool)
                    else _scale(v, factor)) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_scale(v, factor) for v in obj]
    return obj


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def render(payload, rows, fmt) -> str:
    """JSON of ``payload`` or CSV of ``rows`` (list of flat dicts)."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(rows[0].keys()))
        for r in rows:
            writer.writerow([_fmt(v) for v in r.values()])
        return buf.getvalue()
    return json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n"


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _output_target(args):
    fmt, path = args.format, args.out
    if path in FORMATS:
        if fmt is not None and fmt != path:
            raise ValidationError(f"--out {path} conflicts with --format {fmt}")
        fmt, path = path, None
    return fmt or "json", path


# ---------------------------------------------------------------------------
# sources


def _load_joint(args):
    if bool(args.dist) == bool(args.mixture):
        raise ValidationError("give exactly one of --dist or --mixture")
    if args.dist:
        return sio.load_joint(args.dist)
    return mixture_block(sio.load_mixture(args.mixture), args.n, args.max_cells)


def _load_mixture(args):
    if bool(args.dist) == bool(args.mixture):
        raise ValidationError("give exactly one of --dist or --mixture")
    if args.mixture:
        return sio.load_mixture(args.mixture)
    return make_mixture([sio.load_joint(args.dist)], [1.0])


# ---------------------------------------------------------------------------
# subcommands


def cmd_entropy(args):
    joint = _load_joint(args)
    alpha = check_alpha(args.alpha)
    eps = check_epsilon(args.epsilon)
    payload = {"variant": args.variant, "alpha": alpha, "epsilon": eps}
    if args.variant == "arimoto":
        res = result_from_allocation(joint, alpha, 0.0, np.zeros(joint.y_size))
        payload.update(value=arimoto_conditional_renyi(joint, alpha), epsilon=0.0,
                       allocation=res.allocation, truncation=res.truncation)
    elif args.variant == "renner-wolf":
        payload.update(value=renner_wolf_entropy(joint, alpha, eps, args.max_cells))
    else:
        res = (oracle_allocation(joint, alpha, eps, args.step) if args.variant == "oracle"
               else smooth_conditional_entropy(joint, alpha, eps))
        payload.update(value=res.value, objective=res.objective,
                       allocation=res.allocation, truncation=res.truncation)
    row = {k: payload[k] for k in ("variant", "alpha", "epsilon", "value")}
    return payload, [row]


def cmd_guess(args):
    rho = check_rho(args.rho)
    eps = check_epsilon(args.epsilon)
    if args.simulate and args.seed is None:
        raise ValidationError("--simulate requires --seed")
    if args.exponent:
        mix = _load_mixture(args)
        rows = [r.to_dict() for r in guessing_exponent_curve(
            mix, rho, eps, range(1, args.n_max + 1), args.max_cells)]
        return {"rho": rho, "epsilon": eps, "rows": rows}, rows
    joint = _load_joint(args)
    if args.penalty is not None:
        if args.penalty < 0:
            raise ValidationError("--penalty must be nonnegative")
        eps, _ = optimize_with_penalty(joint, rho, args.penalty)
    make = optimal_strategy if args.strategy == "optimal" else smooth_entropy_strategy
    strategy = make(joint, rho, eps)
    ev = evaluate(strategy, joint, rho, args.penalty)
    payload = {
        "rho": rho,
        "epsilon": eps,
        "strategy_kind": args.strategy,
        **ev.to_dict(),
        "cost_lower": converse_bound(joint, rho, eps),
        "cost_upper": direct_bound(joint, rho, eps),
        "strategy": strategy.to_dict(),
    }
    row = {k: payload[k] for k in ("rho", "epsilon", "error_prob", "cost", "cost_lower", "cost_upper")}
    if args.simulate:
        sim = simulate_guessing(strategy, joint, rho, args.seed, args.simulate)
        payload["simulation"] = sim.to_dict()
        row.update({f"sim_{k}": v for k, v in sim.to_dict().items()})
    return payload, [row]


def cmd_code(args):
    rho = check_rho(args.rho)
    eps = check_epsilon(args.epsilon)
    if args.exponent:
        mix = _load_mixture(args)
        rows = [r.to_dict() for r in coding_exponent_curve(
            mix, rho, eps, range(1, args.n_max + 1), args.max_cells)]
        return {"rho": rho, "epsilon": eps, "rows": rows}, rows
    joint = _load_joint(args)
    spec = build_code(joint, rho, eps, args.lengths)
    if args.emit_codebook:
        sio.dump_json({"rho": rho, "epsilon": eps, "lengths": args.lengths, "escape": "1",
                       "codebook": spec.codebook()},
                      args.emit_codebook)
    if args.encode_file:
        if args.seed is None:
            raise ValidationError("--encode-file requires --seed")
        pairs = sio.read_pairs(args.encode_file)
        words = encode_records(spec, pairs, args.seed)
        return None, [sio.format_encoded(y, w) for (_, y), w in zip(pairs, words)]
    if args.decode_file:
        records = sio.read_encoded(args.decode_file)
        return None, [sio.format_decoded(decode(spec, bits, y), y) for y, bits in records]
    entropy_moment = direct_bound(joint, rho, eps)
    payload = {
        "rho": rho,
        "epsilon": eps,
        "lengths": args.lengths,
        "error_prob": code_error_probability(spec, joint),
        "moment": code_moment(spec, joint, rho),
        "moment_lower": entropy_moment,
        "moment_upper": 4.0 ** rho * entropy_moment + eps * 2.0 ** rho,
        "kraft_ok": all(kraft_holds(spec.lengths[spec.support(y), y]) for y in range(spec.y_size)),
    }
    return payload, [payload]


def cmd_asymptotics(args):
    mix = _load_mixture(args)
    eps = check_epsilon(args.epsilon)
    if args.contrast:
        if args.rho is None:
            raise ValidationError("--contrast requires --rho")
        if mix.n_components != 1:
            raise ValidationError("--contrast needs a one-component source")
        rows = [r.to_dict() for r in vanishing_vs_zero_error_contrast(
            mix.components[0], args.rho, eps, args.n_max, args.max_cells)]
        return {"rho": check_rho(args.rho), "epsilon": eps, "rows": rows}, rows
    if (args.alpha is None) == (args.rho is None):
        raise ValidationError("give exactly one of --alpha or --rho")
    alpha = check_alpha(args.alpha) if args.alpha is not None else alpha_from_rho(args.rho)
    report = convergence_report(mix, alpha, eps, args.n_max, max_cells=args.max_cells)
    payload = {"alpha": alpha, "epsilon": eps, **report.to_dict()}
    return payload, payload["rows"]


def cmd_oracle(args):
    joint = _load_joint(args)
    alpha = check_alpha(args.alpha)
    eps = check_epsilon(args.epsilon)
    ref = oracle_allocation(joint, alpha, eps, args.step)
    sol = smooth_conditional_entropy(joint, alpha, eps)
    rel = abs(sol.objective - ref.objective) / max(abs(ref.objective), 1e-300)
    payload = {
        "alpha": alpha,
        "epsilon": eps,
        "step": args.step,
        "oracle_value": ref.value,
        "solver_value": sol.value,
        "relative_objective_gap": rel,
        "oracle_allocation": ref.allocation,
        "solver_allocation": sol.allocation,
    }
    row = {k: payload[k] for k in ("alpha", "epsilon", "oracle_value", "solver_value", "relative_objective_gap")}
    return payload, [row]


COMMANDS = {
    "entropy": cmd_entropy,
    "guess": cmd_guess,
    "code": cmd_code,
    "asymptotics": cmd_asymptotics,
    "oracle": cmd_oracle,
}


def _fail(exc, status):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n")
    return status


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        fmt, path = _output_target(args)
        payload, rows = COMMANDS[args.command](args)
        if payload is None:
            text = "".join(line + "\n" for line in rows)
        else:
            factor = 1.0 / math.log(2.0) if args.bits else 1.0
            payload = _scale(_clean(payload), factor)
            rows = [_scale(_clean(r), factor) for r in rows]
            payload["unit"] = "bits" if args.bits else "nats"
            text = render(payload, rows, fmt)
        with _sink(path) as fh:
            fh.write(text)
    except BudgetError as exc:
        return _fail(exc, 2)
    except (SmoothRenyiError, ValueError, OSError) as exc:
        return _fail(exc, 1)
    return 0


def main():
    sys.exit(run())
