"""Command-line front end.

Commands: validate, simulate, exact, sweep, demo. Exit codes: 0 success or
pass, 1 validation failure, 2 unsupported input, 3 runtime (I/O) failure.
The default seed comes from OPQKD_SEED when set.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile

from .adversary import (
    ConditionalInterceptResend,
    canonical_variant,
    conditional_b_basis,
    make_strategy,
)
from .analysis import dimension_sweep, exact_undetected_prob, min_p, p3_formula
from .errors import InsufficientDataError, InvalidSetError, UnsupportedDimensionError
from .protocol import ProtocolConfig, run_session, summarize_session
from .qcore import MeasurementBasis, RngStream, born_probabilities, tensor
from .stateset import (
    SetParameters,
    StateSet,
    bob_basis,
    build_3x3,
    build_symmetric,
    check_conditions,
    is_four_fold_symmetric,
    stateset_from_text,
    stateset_to_text,
)

SEED_ENV_VAR = "OPQKD_SEED"
_KEY_PREVIEW_BITS = 64


def _write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".opqkd-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV_VAR, "0")
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV_VAR}={raw!r} is not an integer") from None


def _parse_params(text: str) -> SetParameters:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 8:
        raise ValueError("--params needs exactly eight comma-separated amplitudes")
    try:
        values = [complex(p) for p in parts]
    except ValueError:
        raise ValueError(f"could not parse amplitudes from {text!r}") from None
    return SetParameters(*values)


def _load_set(args) -> tuple[StateSet, str]:
    if getattr(args, "set_file", None):
        with open(args.set_file, "r", encoding="utf-8") as handle:
            return stateset_from_text(handle.read()), f"file:{args.set_file}"
    if getattr(args, "params", None):
        if args.dim != 3:
            raise ValueError("--params applies only to --dim 3")
        return build_3x3(_parse_params(args.params)), "parameterized-3x3"
    return build_symmetric(args.dim), f"symmetric-{args.dim}"


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _report_text(header: str, pairs: list[tuple[str, object]], comments: tuple[str, ...] = ()) -> str:
    lines = [f"# opqkd {header} report"]
    lines.extend(f"# {c}" for c in comments)
    lines.extend(f"{key} = {_fmt(value)}" for key, value in pairs)
    return "\n".join(lines) + "\n"


def _csv_text(headers: list[str], rows: list[list[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow(["" if v is None else _fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def _emit(args, text: str) -> None:
    output = getattr(args, "output", None)
    if output:
        _write_atomic(output, text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    try:
        state_set, desc = _load_set(args)
    except InvalidSetError as exc:
        sys.stdout.write(_report_text("validate", [
            ("command", "validate"),
            ("set", "unbuildable"),
            ("error", str(exc)),
            ("verdict", "fail"),
        ]))
        return 1
    report = check_conditions(state_set)
    symmetric = is_four_fold_symmetric(state_set.layout)
    failures = " ".join(f"{i}:{sub}" for i, sub in report.failures()) or "none"
    verdict = "pass" if report.passed else "fail"
    pairs = [
        ("command", "validate"),
        ("dim", state_set.n),
        ("set", desc),
        ("orthogonal_complete", True),
        ("conditions_pass", report.passed),
        ("condition_failures", failures),
        ("four_fold_symmetric", symmetric),
        ("verdict", verdict),
    ]
    _emit(args, _report_text("validate", pairs))
    if args.export:
        _write_atomic(args.export, stateset_to_text(state_set))
    return 0 if report.passed else 1


def _key_material(key_indices: tuple[int, ...], n_squared: int) -> tuple[int, str]:
    """Pack kept labels (round order, most significant first) into the low
    floor(k log2(n^2)) bits of the base-n^2 integer they spell."""
    if not key_indices:
        return 0, ""
    bit_count = int(math.floor(len(key_indices) * math.log2(n_squared)))
    if bit_count == 0:
        return 0, ""
    value = 0
    for idx in key_indices:
        value = value * n_squared + idx
    return bit_count, format(value & ((1 << bit_count) - 1), f"0{bit_count}b")


def cmd_simulate(args) -> int:
    state_set, desc = _load_set(args)
    seed = _resolve_seed(args)
    strategy = make_strategy(args.strategy, state_set if args.strategy != "none" else None)
    config = ProtocolConfig(state_set, args.rounds, args.check_fraction, seed, strategy)
    result = run_session(config)
    summary = summarize_session(result)
    bit_count, bits = _key_material(result.key_indices, len(state_set))

    pairs = [
        ("command", "simulate"),
        ("dim", state_set.n),
        ("set", desc),
        ("strategy", canonical_variant(args.strategy)),
        ("rounds", summary.rounds),
        ("check_fraction", args.check_fraction),
        ("seed", seed),
        ("rounds_checked", summary.checked_rounds),
        ("mismatches", summary.mismatches),
        ("detected", summary.detected),
        ("mismatch_rate", summary.mismatch_rate),
        ("mismatch_ci_low", summary.mismatch_ci_low),
        ("mismatch_ci_high", summary.mismatch_ci_high),
        ("undetected_correct", summary.undetected_correct),
        ("match_rate", summary.match_rate),
        ("match_ci_low", summary.match_ci_low),
        ("match_ci_high", summary.match_ci_high),
        ("key_rounds", summary.key_rounds),
        ("bits_per_round", summary.bits_per_round),
        ("key_bits", summary.key_bits),
        ("key_bit_count", bit_count),
        ("key_preview", bits[:_KEY_PREVIEW_BITS] if bits else "n/a"),
        ("eve_accuracy", summary.eve_accuracy),
    ]
    comments = (
        "key bits: low floor(k*log2(n^2)) bits of the base-n^2 integer",
        "spelled by the kept labels in round order, most significant first",
    )
    _emit(args, _report_text("simulate", pairs, comments))

    if args.transcript:
        rows = [
            [rec.round_id, rec.alice_index, rec.bob_index, int(rec.checked), int(rec.mismatch)]
            for rec in result.records
        ]
        _write_atomic(args.transcript, _csv_text(
            ["round_id", "alice_index", "bob_index", "checked", "mismatch"], rows))
    if args.eve_transcript:
        rows = []
        for rec, eve in zip(result.records, result.eve_records):
            correct = None if eve.inferred_state is None else int(eve.inferred_state == rec.alice_index)
            rows.append([eve.round_id, eve.variant, eve.a_outcome, eve.b_outcome,
                         eve.inferred_state, correct])
        _write_atomic(args.eve_transcript, _csv_text(
            ["round_id", "variant", "a_outcome", "b_outcome", "inferred_state", "correct"], rows))
    if args.key_out:
        _write_atomic(args.key_out, bits + "\n")
    return 0


def cmd_exact(args) -> int:
    state_set, desc = _load_set(args)
    result = exact_undetected_prob(state_set, args.strategy)
    closed = None
    if result.variant == "substitute-collective":
        closed = 1.0 / state_set.n
    elif desc.startswith("symmetric-"):
        closed = min_p(state_set.n)
    elif desc == "parameterized-3x3" and result.variant == "intercept-resend-conditional":
        closed = p3_formula(_parse_params(args.params))
    pairs: list[tuple[str, object]] = [
        ("command", "exact"),
        ("dim", state_set.n),
        ("set", desc),
        ("strategy", result.variant),
        ("value", result.value),
        ("closed_form", closed),
    ]
    pairs.extend((f"contribution_{i}", c) for i, c in enumerate(result.contributions))
    _emit(args, _report_text("exact", pairs))
    return 0


def cmd_sweep(args) -> int:
    seed = _resolve_seed(args)
    rows = dimension_sweep(args.max_dim, args.strategy, args.trials, seed, args.exact_budget)
    table = [
        [r.n, r.variant, r.exact, r.closed_form, r.gap_to_half,
         r.mc_estimate, r.ci_low, r.ci_high, r.trials, r.seed]
        for r in rows
    ]
    text = _csv_text(
        ["n", "strategy", "exact", "closed_form", "gap_to_half",
         "mc_estimate", "ci_low", "ci_high", "trials", "seed"], table)
    _emit(args, text)
    return 0


def _format_ket(ket) -> str:
    terms = []
    for k, z in enumerate(ket.amps):
        if abs(z) <= 1e-12:
            continue
        terms.append(f"({z.real:+.4f}{z.imag:+.4f}j)|{k}>")
    return " + ".join(terms)


def cmd_demo(args) -> int:
    seed = _resolve_seed(args)
    out = sys.stdout.write
    state_set = build_3x3()
    out("balanced 3x3 set: nine orthogonal two-particle product states\n")
    for st in state_set:
        out(f"  state {st.index}:  A = {_format_ket(st.ket_a)}   B = {_format_ket(st.ket_b)}\n")

    label = 2
    prepared = state_set[label]
    out(f"\none intercept-resend round, prepared label {label} (seed {seed})\n")
    strategy = ConditionalInterceptResend(state_set)
    rng = RngStream(seed, 0)
    rnd = strategy.begin_round(0)

    probs_a = born_probabilities(prepared.ket_a, MeasurementBasis.computational(state_set.n))
    dist = ", ".join(f"P({m})={p:.4f}" for m, p in enumerate(probs_a) if p > 1e-12)
    out(f"  leg 1: attacker measures A in the computational basis: {dist}\n")
    forwarded_a = strategy.first_leg(rnd, prepared.ket_a, rng)
    out(f"  leg 1: outcome {rnd.a_outcome}, forwards {_format_ket(forwarded_a)}\n")

    basis = conditional_b_basis(state_set, rnd.a_outcome)
    out(f"  leg 2: basis matched to outcome {rnd.a_outcome}:\n")
    for v in basis.vectors:
        out(f"         {_format_ket(v)}\n")
    forwarded_b = strategy.second_leg(rnd, prepared.ket_b, rng)
    out(f"  leg 2: outcome {rnd.b_outcome}, forwards {_format_ket(forwarded_b)}\n")
    out(f"  attacker guesses label {rnd.inferred}\n")

    joint = tensor(forwarded_a, forwarded_b)
    probs = born_probabilities(joint, bob_basis(state_set))
    dist = ", ".join(f"P({i})={p:.4f}" for i, p in enumerate(probs) if p > 1e-12)
    out(f"  receiver's joint measurement: {dist}\n")
    exact = exact_undetected_prob(state_set, "intercept")
    out(f"  averaged over everything, this attack survives a checked round "
        f"with probability {exact.value:.6f}\n")
    return 0


def _add_set_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, default=3, help="grid dimension n (default 3)")
    p.add_argument("--params", default=None,
                   help="eight comma-separated complex amplitudes a,b,c,d,e,f,g,h (dim 3 only)")
    p.add_argument("--set-file", default=None, help="load a serialized state set")


def _add_seed_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help=f"random seed (default: ${SEED_ENV_VAR} or 0)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opqkd",
        description="Orthogonal product-state key distribution: sets, sessions, attacks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="build a set and re-check its structure")
    _add_set_args(p)
    p.add_argument("--export", default=None, help="write the serialized set here")
    p.add_argument("--output", default=None, help="write the report here instead of stdout")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run a full session")
    _add_set_args(p)
    _add_seed_arg(p)
    p.add_argument("--strategy", choices=("none", "intercept", "complementary", "substitute"),
                   default="none")
    p.add_argument("--rounds", type=int, default=10000)
    p.add_argument("--check-fraction", type=float, default=0.1)
    p.add_argument("--output", default=None, help="write the report here instead of stdout")
    p.add_argument("--transcript", default=None, help="write per-round CSV here")
    p.add_argument("--eve-transcript", default=None, help="write the attacker's CSV here")
    p.add_argument("--key-out", default=None, help="write the full key bitstring here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("exact", help="exact survival probability by enumeration")
    _add_set_args(p)
    p.add_argument("--strategy", choices=("intercept", "complementary", "substitute"),
                   default="intercept")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("sweep", help="survival probability across dimensions, as CSV")
    _add_seed_arg(p)
    p.add_argument("--max-dim", type=int, default=9)
    p.add_argument("--strategy", choices=("intercept", "complementary", "substitute"),
                   default="intercept")
    p.add_argument("--trials", type=int, default=0,
                   help="Monte Carlo trials per dimension (0 disables)")
    p.add_argument("--exact-budget", type=int, default=9,
                   help="largest n still solved by full enumeration")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("demo", help="walk one attacked round at dimension 3")
    _add_seed_arg(p)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnsupportedDimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InvalidSetError, InsufficientDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
