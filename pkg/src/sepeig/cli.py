"""Command-line front end.

Exit codes: 0 ran without detection, 1 input error, 2 numerical failure,
3 entanglement detected.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from sepeig import jsonio, states
from sepeig.grid import GridSpec, GridTooLarge, scan
from sepeig.linalg import Dims, partial_transpose
from sepeig.solver import ConvergenceError, SolverConfig, solve_sepeig
from sepeig.witness import Kind, Verdict, bound_check, build_witness, npt_check, test_lower, test_upper

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_DETECTED = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    tol: float = 1e-10
    starts: int = 64
    output: str | None = None
    format: str = "json"

    def solver(self) -> SolverConfig:
        return SolverConfig(starts=self.starts, tol=self.tol, seed=self.seed, dedup_tol=max(1e-7, 10 * self.tol))


class _Out:
    def __init__(self, run: RunConfig):
        self.run = run
        self.chunks: list[str] = []

    def record(self, obj: dict):
        self.chunks.append(json.dumps({"run": asdict(self.run), **obj}) + "\n")

    def raw(self, text: str):
        self.chunks.append(text)

    def flush(self):
        text = "".join(self.chunks)
        if self.run.output:
            Path(self.run.output).write_text(text)
        else:
            sys.stdout.write(text)


def _header_to_stderr(run: RunConfig):
    print("# sepeig " + json.dumps(asdict(run)), file=sys.stderr)


def _pairs(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in v]


def _emit_verdict(out: _Out, verdict: Verdict, extra: dict | None = None) -> int:
    if out.run.format == "text":
        out.raw(f"{verdict.kind.value} margin={verdict.margin:.12g}\n{verdict.detail}\n")
    else:
        rec = verdict.to_dict()
        if verdict.witness_used is not None:
            rec["f_value"] = verdict.witness_used.f_value
        out.record({**rec, **(extra or {})})
    if verdict.kind in (Kind.ENTANGLED, Kind.BOUND_ENTANGLED, Kind.NPT):
        return EXIT_DETECTED
    if verdict.kind is Kind.INCONCLUSIVE and "solver failure" in verdict.detail:
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_sepeig(args, run: RunConfig, out: _Out) -> int:
    op = jsonio.load_operator(args.operator)
    spec = solve_sepeig(op, run.solver())
    if run.format == "text":
        out.raw(f"sup_g={spec.sup_g:.12g} inf_g={spec.inf_g:.12g} converged_fraction={spec.converged_fraction:.4g}\n")
        for p in spec.pairs:
            out.raw(f"g={p.g:.12g} residual={p.residual:.3g}\n")
        return EXIT_OK
    out.record(
        {
            "sup_g": spec.sup_g,
            "inf_g": spec.inf_g,
            "converged_fraction": spec.converged_fraction,
            "starts_used": spec.starts_used,
            "spectrum": [
                {"g": p.g, "a": _pairs(p.a.coeffs), "b": _pairs(p.b.coeffs), "residual": p.residual} for p in spec.pairs
            ],
        }
    )
    return EXIT_OK


def cmd_test(args, run: RunConfig, out: _Out) -> int:
    rho = jsonio.load_density(args.state)
    op = jsonio.load_operator(args.operator)
    verdict = (test_lower if args.lower else test_upper)(rho, op, run.solver())
    return _emit_verdict(out, verdict, {"test": "lower" if args.lower else "upper"})


def cmd_witness(args, run: RunConfig, out: _Out) -> int:
    w = build_witness(jsonio.load_operator(args.operator), run.solver())
    if run.format == "text":
        out.raw(f"f_AB={w.f_value:.12g}\nmin eigenvalue={w.op.eigvalsh()[0]:.12g}\n")
    else:
        out.record({**jsonio.operator_to_dict(w.op), "f_value": w.f_value})
    return EXIT_OK


def cmd_pt(args, run: RunConfig, out: _Out) -> int:
    _header_to_stderr(run)
    out.raw(jsonio.dumps(jsonio.operator_to_dict(partial_transpose(jsonio.load_operator(args.operator)))))
    return EXIT_OK


def cmd_npt(args, run: RunConfig, out: _Out) -> int:
    return _emit_verdict(out, npt_check(jsonio.load_density(args.state)))


def cmd_bound(args, run: RunConfig, out: _Out) -> int:
    rho = jsonio.load_density(args.state)
    if npt_check(rho).kind is Kind.NPT:
        raise ValueError("state is NPT; use npt_check")
    cands = [jsonio.load_operator(p) for p in args.candidate]
    verdict = bound_check(rho, cands, run.solver(), random_candidates=args.budget, seed=run.seed)
    return _emit_verdict(out, verdict)


def _parse_support(items):
    if not items:
        return None
    out = []
    for it in items:
        r, c = it.split(",")
        out.append((int(r), int(c)))
    return tuple(out)


def cmd_scan(args, run: RunConfig, out: _Out) -> int:
    rho = jsonio.load_density(args.state)
    spec = GridSpec(rho.dims, args.delta_r, args.delta_phi, cap=args.cap, support=_parse_support(args.support))
    if spec.count > spec.cap:
        raise GridTooLarge(spec.count, spec.cap)
    grid_info = {"delta_r": spec.delta_r, "delta_phi": spec.delta_phi, "epsilon": spec.epsilon, "count": spec.count}
    text = run.format == "text"
    if text:
        out.raw(f"grid: {spec.count} operators, epsilon={spec.epsilon:.6g}\n")
    else:
        out.record({"grid": grid_info})
    report = scan(
        rho,
        spec,
        run.solver(),
        resume_from=args.resume_from,
        on_record=lambda r: out.raw(
            f"index={r.index} margin={r.margin:.12g} f={r.f_value:.12g}\n" if text else json.dumps(r.to_dict()) + "\n"
        ),
    )
    summary = {
        "scanned": report.scanned,
        "last_index": report.last_index,
        "detections": len(report.detections),
        "best_index": report.best.index if report.best else None,
        "best_margin": report.best_margin if report.best else None,
        "failures": report.failures,
        "interrupted": report.interrupted,
    }
    if text:
        out.raw(" ".join(f"{k}={v}" for k, v in summary.items()) + "\n")
    else:
        out.raw(json.dumps({"summary": summary}) + "\n")
    if report.detections:
        return EXIT_DETECTED
    return EXIT_NUMERIC if report.failures else EXIT_OK


def cmd_gen_state(args, run: RunConfig, out: _Out) -> int:
    _header_to_stderr(run)
    trunc = states.FockTruncation(args.n_max)
    name = args.name
    if name == "bell":
        st = states.bell_phi()
    elif name == "bell-plus":
        st = states.bell_phi_plus()
    elif name == "werner":
        st = states.werner(args.p)
    elif name == "chi-minus":
        st = states.chi_minus(complex(args.alpha), complex(args.beta), trunc)
    elif name == "rho-mix":
        st = states.rho_mix(complex(args.alpha), complex(args.beta), args.eta, trunc)
    elif name == "tiles":
        st = states.tiles_upb_state()
    elif name == "random-product":
        st = states.random_product(Dims(*args.dims), run.seed)
    elif name == "random-separable":
        st = states.random_separable(Dims(*args.dims), args.terms, run.seed)
    elif name == "bell-projector":
        out.raw(jsonio.dumps(jsonio.operator_to_dict(states.bell_phi().projector())))
        return EXIT_OK
    else:  # argparse restricts choices
        raise ValueError(f"unknown state {name!r}")
    out.raw(jsonio.dumps(jsonio.state_to_dict(st)))
    return EXIT_OK


STATE_NAMES = (
    "bell",
    "bell-plus",
    "bell-projector",
    "werner",
    "chi-minus",
    "rho-mix",
    "tiles",
    "random-product",
    "random-separable",
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit seed for all random draws")
    common.add_argument("--tol", type=float, default=1e-10, help="solver convergence tolerance")
    common.add_argument("--starts", type=int, default=64, help="random starts per solver branch")
    common.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(prog="sepeig", description="Separability eigenvalue entanglement tests.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sepeig", parents=[common], help="solve the separability eigenvalue problem")
    p.add_argument("operator")
    p.set_defaults(func=cmd_sepeig)

    p = sub.add_parser("test", parents=[common], help="test a state with an operator")
    p.add_argument("state")
    p.add_argument("operator")
    p.add_argument("--lower", action="store_true", help="use the infimum condition")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("witness", parents=[common], help="optimal witness f_AB(A) 1 - A")
    p.add_argument("operator")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("pt", parents=[common], help="partial transpose of an operator file")
    p.add_argument("operator")
    p.set_defaults(func=cmd_pt)

    p = sub.add_parser("npt", parents=[common], help="negative partial transpose check")
    p.add_argument("state")
    p.set_defaults(func=cmd_npt)

    p = sub.add_parser("bound", parents=[common], help="PPT bound-entanglement search")
    p.add_argument("state")
    p.add_argument("--candidate", action="append", default=[], help="positive operator file (repeatable)")
    p.add_argument("--budget", type=int, default=None, help="number of random candidates")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("scan", parents=[common], help="scan a grid of test operators")
    p.add_argument("state")
    p.add_argument("--delta-r", type=float, required=True)
    p.add_argument("--delta-phi", type=float, required=True)
    p.add_argument("--cap", type=int, default=10**6)
    p.add_argument("--resume-from", type=int, default=1)
    p.add_argument("--support", nargs="*", help="restrict varied components to 'row,col' pairs")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("gen-state", parents=[common], help="write an example state file")
    p.add_argument("name", choices=STATE_NAMES)
    p.add_argument("--p", type=float, default=1.0, help="Werner weight")
    p.add_argument("--alpha", default="0.5")
    p.add_argument("--beta", default="0.5")
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--dims", type=int, nargs=2, default=(2, 2))
    p.add_argument("--terms", type=int, default=4)
    p.set_defaults(func=cmd_gen_state)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    run = RunConfig(seed=args.seed, tol=args.tol, starts=args.starts, output=args.output, format=args.format)
    out = _Out(run)
    try:
        code = args.func(args, run, out)
    except ConvergenceError as exc:
        print(f"sepeig: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"sepeig: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
