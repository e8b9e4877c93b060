"""Command-line front end.

Machine-readable results (JSON or CSV) go to --out or standard output;
human-readable progress and timing go to standard error, keeping the data
stream byte-stable across runs. Exit codes: 0 success, 1 invalid input,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from .discord import StepSchedule, discord, discord_rank2_exact
from .eof_bound import eof_two_element_bound
from .linalg import partial_trace, von_neumann_entropy
from .measures import concurrence, eof_from_concurrence, mutual_information
from .scan import (
    ScanConfig,
    mdms_transition_search,
    profile_to_csv,
    run_scan,
    step_size_profile,
)
from .states import (
    bell_state,
    load_state,
    maximally_mixed,
    mdms_state,
    save_state,
    state_to_dict,
    swap_parties,
    validate,
)

NAMED_STATES = ("bell-phi+", "bell-phi-", "bell-psi+", "bell-psi-", "mdms", "maximally-mixed")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(data: dict, out: str | None) -> None:
    _emit(json.dumps(data, indent=2, sort_keys=True) + "\n", out)


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _add_state_args(p: argparse.ArgumentParser) -> None:
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--state", help="path to a state JSON file")
    grp.add_argument("--named", choices=NAMED_STATES, help="built-in state")
    p.add_argument("--m", type=float, default=0.11, help="MDMS m parameter (with --named mdms)")
    p.add_argument("--eps", type=float, default=0.2349602, help="MDMS epsilon parameter (with --named mdms)")


def _add_search_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--polish", dest="polish", action="store_true", default=True)
    p.add_argument("--no-polish", dest="polish", action="store_false")
    p.add_argument("--floor-3", type=float, default=0.1, help="m=3 grid floor in units of pi")
    p.add_argument("--floor-4", type=float, default=0.15, help="m=4 grid floor in units of pi")
    p.add_argument("--polish-starts", type=int, default=8)
    p.add_argument("--threads", type=int, default=1)


def _resolve_state(args) -> np.ndarray:
    if args.state:
        rho = load_state(args.state)
    elif args.named == "mdms":
        rho = mdms_state(args.m, args.eps)
    elif args.named == "maximally-mixed":
        rho = maximally_mixed()
    else:
        rho = bell_state(args.named)
    report = validate(rho)
    if not report.is_valid:
        if report.hermiticity_residual > 1e-10:
            detail = f"hermiticity residual {report.hermiticity_residual:.3e}"
        elif report.trace_deviation > 1e-10:
            detail = f"trace deviation {report.trace_deviation:.3e}"
        else:
            detail = f"minimum eigenvalue {report.min_eigenvalue:.3e}"
        raise ValueError(f"input is not a valid density matrix: {detail}")
    return rho


def _schedules(args) -> dict[int, StepSchedule]:
    return {
        2: StepSchedule.default(2),
        3: StepSchedule.default(3, args.floor_3 * math.pi),
        4: StepSchedule.default(4, args.floor_4 * math.pi),
    }


def _figure_path(out: str) -> str:
    return (out[: -len(".csv")] if out.endswith(".csv") else out) + ".png"


def _cmd_discord(args) -> int:
    rho = _resolve_state(args)
    if args.measure_party == "A":
        rho = swap_parties(rho)
    t0 = time.perf_counter()
    result = discord(
        rho,
        schedules=_schedules(args),
        polish_enabled=args.polish,
        workers=args.threads,
        polish_starts=args.polish_starts,
    )
    elapsed = time.perf_counter() - t0
    s_a = von_neumann_entropy(partial_trace(rho, "B"))
    info = mutual_information(rho)
    data = result.to_dict()
    data["measured_party"] = args.measure_party
    data["mutual_information"] = info
    data["classical_correlation"] = s_a - result.conditional_entropy
    _emit_json(data, args.out)
    _info(
        f"discord = {result.value:.9f} bits (m={result.m}, {result.method}) in {elapsed:.2f} s"
    )
    return 0


def _cmd_concurrence(args) -> int:
    rho = _resolve_state(args)
    c = concurrence(rho)
    _emit_json(
        {"concurrence": c, "entanglement_of_formation": eof_from_concurrence(c)},
        args.out,
    )
    return 0


def _cmd_validate(args) -> int:
    rho = load_state(args.state)
    report = validate(rho)
    _emit_json(
        {
            "dim": report.dim,
            "hermiticity_residual": report.hermiticity_residual,
            "trace_deviation": report.trace_deviation,
            "min_eigenvalue": report.min_eigenvalue,
            "rank": report.rank,
            "valid": report.is_valid,
        },
        args.out,
    )
    return 0 if report.is_valid else 1


def _cmd_random(args) -> int:
    from .states import random_state

    rho = random_state(args.rank, args.seed, args.dim)
    if args.out:
        save_state(rho, args.out)
    else:
        _emit_json(state_to_dict(rho), None)
    _info(f"rank-{args.rank} state from seed {args.seed}")
    return 0


def _cmd_scan(args) -> int:
    if args.config:
        cfg = ScanConfig.from_json(args.config)
    else:
        cfg = ScanConfig()
    if args.n is not None:
        cfg.n_states = args.n
    if args.rank is not None:
        cfg.rank = args.rank if args.rank == "mixed" else int(args.rank)
    if args.seed is not None:
        cfg.base_seed = args.seed
    cfg.floor3 = args.floor_3 * math.pi
    cfg.floor4 = args.floor_4 * math.pi
    cfg.polish = args.polish
    cfg.polish_starts = args.polish_starts
    cfg.workers = args.threads
    done = {"n": 0}

    def progress(rec):
        done["n"] += 1
        if done["n"] % 25 == 0 or done["n"] == cfg.n_states:
            _info(f"  scanned {done['n']}/{cfg.n_states} states")

    t0 = time.perf_counter()
    summary = run_scan(cfg, progress=progress)
    elapsed = time.perf_counter() - t0
    with open(args.out, "w") as fh:
        fh.write(summary.to_csv())
    _emit_json(summary.summary_dict(), None)
    if not args.no_figure:
        from .plots import save_scan_figure

        fig_path = _figure_path(args.out)
        save_scan_figure(summary.records, fig_path, cfg.threshold)
        _info(f"figure written to {fig_path}")
    _info(f"scan of {cfg.n_states} states finished in {elapsed:.1f} s -> {args.out}")
    return 0


def _parse_steps(spec: str) -> StepSchedule | None:
    if spec == "default":
        return None
    steps = tuple(float(s) * math.pi for s in spec.split(","))
    return StepSchedule(steps)


def _cmd_profile(args) -> int:
    rho = _resolve_state(args)
    t0 = time.perf_counter()
    rows = step_size_profile(
        rho,
        steps=_parse_steps(args.steps),
        m4_floor=args.floor_4 * math.pi,
        workers=args.threads,
    )
    elapsed = time.perf_counter() - t0
    _emit(profile_to_csv(rows), args.out)
    if args.out and not args.no_figure:
        from .plots import save_profile_figure

        fig_path = _figure_path(args.out)
        save_profile_figure(rows, fig_path)
        _info(f"figure written to {fig_path}")
    _info(f"profile over {len(rows)} steps in {elapsed:.1f} s")
    return 0


def _cmd_transition(args) -> int:
    t0 = time.perf_counter()
    result = mdms_transition_search(
        args.m,
        args.eps,
        threshold=args.threshold,
        floor3=args.floor_3 * math.pi,
        polish=args.polish,
        polish_starts=args.polish_starts,
        workers=args.threads,
    )
    elapsed = time.perf_counter() - t0
    _emit_json(result.to_dict(), args.out)
    star = "none" if result.lambda_star is None else f"{result.lambda_star:.5f}"
    _info(f"transition lambda* = {star} ({result.message}) in {elapsed:.1f} s")
    return 0


def _cmd_eof_bound(args) -> int:
    rho = load_state(args.state)
    report = validate(rho)
    if not report.is_valid:
        raise ValueError(
            f"input is not a valid density matrix: minimum eigenvalue "
            f"{report.min_eigenvalue:.3e}, trace deviation {report.trace_deviation:.3e}"
        )
    t0 = time.perf_counter()
    bound, dec = eof_two_element_bound(
        rho, polish_enabled=args.polish, polish_starts=args.polish_starts
    )
    elapsed = time.perf_counter() - t0
    residual = float(np.max(np.abs(dec.reconstruct() - rho)))
    data = {
        "bound": bound,
        "probabilities": [float(p) for p in dec.probabilities],
        "elements_re": dec.states.real.tolist(),
        "elements_im": dec.states.imag.tolist(),
        "reconstruction_residual": residual,
    }
    if rho.shape[0] == 4:
        data["wootters_eof"] = eof_from_concurrence(concurrence(rho))
    _emit_json(data, args.out)
    _info(f"two-element bound = {bound:.9f} bits in {elapsed:.2f} s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdiscord",
        description="Quantum discord of two-qubit states via extremal POVM minimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discord", help="discord of a two-qubit state")
    _add_state_args(p)
    _add_search_args(p)
    p.add_argument("--measure-party", choices=("A", "B"), default="B")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_discord)

    p = sub.add_parser("concurrence", help="Wootters concurrence and E_F")
    _add_state_args(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_concurrence)

    p = sub.add_parser("validate", help="density-matrix validation report")
    p.add_argument("--state", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("random", help="write a random fixed-rank state")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_random)

    p = sub.add_parser("scan", help="random-state deviation scan")
    p.add_argument("--config", help="scan config JSON")
    p.add_argument("--n", type=int)
    p.add_argument("--rank")
    p.add_argument("--seed", type=int)
    _add_search_args(p)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("profile", help="discord vs angular step size")
    _add_state_args(p)
    _add_search_args(p)
    p.add_argument("--steps", default="default", help='"default" or comma list in units of pi')
    p.add_argument("--out")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("mdms-transition", help="perturbed-MDMS transition search")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--threshold", type=float, default=1e-8)
    _add_search_args(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_transition)

    p = sub.add_parser("eof-bound", help="two-element E_F upper bound of a 2xN rank-2 state")
    p.add_argument("--state", required=True)
    _add_search_args(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eof_bound)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        _info(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
