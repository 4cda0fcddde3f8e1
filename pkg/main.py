import argparse
import logging
import sys
from typing import List, Optional

import numpy as np
import pandas as pd

from src.ainfinity.deformation import AInfinityDeformation
from src.ainfinity.potential import disc_potential
from src.ainfinity.relations import check_ainfinity, check_superfiltered_unital
from src.algebra.scalars import parse_ring
from src.algebra.series import (
    TruncatedSeries,
    format_series,
    laurent_expand,
    random_series,
)
from src.config import Settings, load_settings, validate_job_config
from src.hochschild.clifford import (
    clifford_complex,
    complex_cohomology,
    embed_and_centre_check,
    jacobian_algebra,
    vector_to_multivector,
)
from src.hochschild.cochains import hh_via_insertion, hh_window_complex
from src.lmf.equivalence import (
    FOUND,
    INDETERMINATE,
    potential_equivalence_search,
)
from src.lmf.pipeline import composite_equivalence
from src.mf.factorization import stabilize_skyscraper
from src.mf.mirror import mirror_object
from src.serialization import (
    TOOL_VERSION,
    algebra_from_json,
    algebra_to_json,
    diffeo_to_json,
    factorization_to_json,
    load_potential,
    read_json,
    report_to_json,
    series_to_json,
    write_json,
)
from src.shared_models import (
    ArityCapError,
    CertifiedWindow,
    InvalidInputError,
    JobConfig,
    NotInvertibleError,
    RingMismatchError,
    VerificationError,
    add_issue,
    new_report,
)
from src.transfer.minimal_model import clifford_check, minimal_model

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_INDETERMINATE = 3

POTENTIAL_JOBS = {"minimal-model", "disc-potential", "mirror", "hochschild"}


def parse_args(argv: Optional[List[str]] = None, settings: Optional[Settings] = None):
    settings = settings or Settings()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ring", default=None,
                        help="Q or Fp:<p> (default: the ring of the input file)")
    common.add_argument("--vars", type=int, default=None, dest="nvars")
    common.add_argument("--order", type=int, default=settings.default_order)
    common.add_argument("--arity", type=int, default=settings.default_arity)
    common.add_argument("--length", type=int, default=settings.default_length)
    common.add_argument("--d", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="Path of the JSON report")
    common.add_argument("--force", action="store_true", help="Override the n/N guard rails")

    parser = argparse.ArgumentParser(
        description="Exact A-infinity deformations, matrix factorisations and Hochschild windows."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("stabilize", "minimal-model"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--potential", required=True)
    for name in ("disc-potential", "mirror", "verify"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--algebra", required=True)
    p = sub.add_parser("equivalent", parents=[common])
    p.add_argument("--p1", required=True)
    p.add_argument("--p2", required=True)
    p = sub.add_parser("hochschild", parents=[common])
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--algebra")
    source.add_argument("--potential")
    sub.add_parser("selftest", parents=[common])
    return parser.parse_args(argv)


def job_config(args) -> JobConfig:
    inputs = [getattr(args, k) for k in ("potential", "algebra", "p1", "p2")
              if getattr(args, k, None)]
    return JobConfig(ring=args.ring, nvars=args.nvars, order=args.order, arity=args.arity,
                     length=args.length, d=args.d, seed=args.seed, inputs=inputs,
                     out=args.out, force=args.force)


def _finish(report: dict, config: JobConfig, window: Optional[CertifiedWindow] = None) -> dict:
    data = report_to_json(report, window)
    if config.out:
        write_json(config.out, data)
    return data


def _print_issues(report: dict) -> None:
    for issue in report.get("issues", []):
        print(f"  - {issue}")
    if "first_failure" in report:
        print(f"  first failure: {report['first_failure']}")


def _algebra_data(path: str) -> dict:
    data = read_json(path)
    return data.get("algebra", data) if isinstance(data, dict) else data


def _load_algebra(path: str, validate: bool = True) -> AInfinityDeformation:
    return algebra_from_json(_algebra_data(path), validate=validate)


def _load_potential(config: JobConfig, path: str) -> TruncatedSeries:
    ring = parse_ring(config.ring) if config.ring else None
    w = load_potential(path, ring, config.order)
    if config.nvars is not None and config.nvars != w.nvars:
        raise InvalidInputError(f"--vars {config.nvars} but the potential has {w.nvars}")
    return w


# -- subcommands ------------------------------------------------------------------


def cmd_stabilize(config: JobConfig) -> int:
    w = _load_potential(config, config.inputs[0])
    X = stabilize_skyscraper(w)
    report = X.check()
    report["factorization"] = factorization_to_json(X)
    _finish(report, config, CertifiedWindow(order=config.order))
    print(f"Stabilised skyscraper of w = {format_series(w)}: "
          f"{'D^2 = w id' if report['is_valid'] else 'FAILED'}")
    _print_issues(report)
    return EXIT_OK if report["is_valid"] else EXIT_FAIL


def cmd_minimal_model(config: JobConfig) -> int:
    w = _load_potential(config, config.inputs[0])
    A, _, _ = minimal_model(w, config.arity)
    report = new_report(CertifiedWindow(order=config.order, arity=config.arity))
    for stage, sub in (("ainfinity", check_ainfinity(A)),
                       ("unital", check_superfiltered_unital(A)),
                       ("clifford", clifford_check(A, w))):
        report[stage] = sub
        for issue in sub["issues"]:
            add_issue(report, f"[{stage}] {issue}", sub.get("first_failure"))
    report["algebra"] = algebra_to_json(A)
    _finish(report, config)
    print(f"Minimal model of w = {format_series(w)}: {len(A.ops)} nonzero operations, "
          f"{'valid' if report['is_valid'] else 'INVALID'}")
    _print_issues(report)
    return EXIT_OK if report["is_valid"] else EXIT_FAIL


def cmd_disc_potential(config: JobConfig) -> int:
    A = _load_algebra(config.inputs[0])
    order = min(config.order, A.order, A.arity_cap)
    P = disc_potential(A, order)
    report = new_report(CertifiedWindow(order=order, arity=A.arity_cap))
    report["potential"] = series_to_json(P)
    _finish(report, config)
    print(format_series(P))
    return EXIT_OK


def cmd_mirror(config: JobConfig) -> int:
    A = _load_algebra(config.inputs[0])
    X = mirror_object(A, min(config.order, A.order), verify=False)
    report = X.check()
    report["factorization"] = factorization_to_json(X)
    _finish(report, config, CertifiedWindow(order=X.order, arity=A.arity_cap))
    print(f"Mirror of {A.name or 'algebra'} factorises {format_series(X.potential)}: "
          f"{'ok' if report['is_valid'] else 'FAILED'}")
    _print_issues(report)
    return EXIT_OK if report["is_valid"] else EXIT_FAIL


def cmd_equivalent(config: JobConfig, settings: Settings) -> int:
    P1 = _load_potential(config, config.inputs[0])
    P2 = _load_potential(config, config.inputs[1])
    result = potential_equivalence_search(P1, P2, config.d, config.order, settings.node_limit)
    report = result.report()
    if result.diffeo is not None:
        report["witness"] = diffeo_to_json(result.diffeo)
    _finish(report, config)
    print(f"{result.verdict} (d={config.d}, order={config.order}, ring={P1.ring}, "
          f"{result.nodes} nodes)")
    for note in result.notes:
        print(f"  note: {note}")
    if result.verdict == FOUND:
        return EXIT_OK
    if result.verdict == INDETERMINATE:
        logger.warning("Equivalence search was not exhaustive")
        return EXIT_INDETERMINATE
    return EXIT_FAIL


def _cochain_to_json(z) -> dict:
    return {"parity": z.parity, "components": [
        {"inputs": [[int(i) for i in range(1, z.nvars + 1) if m >> (i - 1) & 1] for m in masks],
         "output": value} for masks, value in z.components.items()]}


def cmd_hochschild(config: JobConfig) -> int:
    if _is_algebra(config.inputs[0]):
        A = _load_algebra(config.inputs[0])
        window = hh_window_complex(A, config.length)
        report = hh_via_insertion(A, config.length)
        report["representatives"] = [_cochain_to_json(z) for t in (0, 1)
                                     for z in window.representatives.get(t, [])]
        report["certified"] = {"order": min(config.length, A.arity_cap - 2),
                               "length": config.length}
        report["centre_check"] = "pass" if report["is_valid"] else "fail"
    else:
        P = _load_potential(config, config.inputs[0])
        C = clifford_complex(P)
        H = complex_cohomology(C)
        report = embed_and_centre_check(P)
        report["jacobian_rank"] = jacobian_algebra(P).rank
        report["representatives"] = [
            vector_to_multivector(P.ring, P.nvars, z, C.window[1])
            for e in sorted(H.representatives) for z in H.representatives[e]
        ]
        report["certified"] = {"order": C.window[1], "length": None}
    _finish(report, config)
    table = pd.DataFrame(report["ranks"])
    print(table.to_string(index=False) if not table.empty else "All ranks vanish")
    print(f"centre check: {report['centre_check']}")
    _print_issues(report)
    return EXIT_OK if report["is_valid"] else EXIT_FAIL


def _is_algebra(path: str) -> bool:
    data = _algebra_data(path)
    return isinstance(data, dict) and "ops" in data


def cmd_verify(config: JobConfig) -> int:
    A = _load_algebra(config.inputs[0], validate=False)
    report = new_report(CertifiedWindow(order=A.order, arity=A.arity_cap))
    for stage, check in (("unital", check_superfiltered_unital), ("ainfinity", check_ainfinity)):
        sub = check(A)
        report[stage] = sub
        for issue in sub["issues"]:
            add_issue(report, f"[{stage}] {issue}", sub.get("first_failure"))
        if not sub["is_valid"]:
            break
    _finish(report, config)
    print(f"{A.name or 'algebra'}: {'PASS' if report['is_valid'] else 'FAIL'}")
    _print_issues(report)
    return EXIT_OK if report["is_valid"] else EXIT_FAIL


# -- selftest ---------------------------------------------------------------------


def _case(rows: list, name: str, ring, fn) -> None:
    try:
        ok, detail = fn()
    except (VerificationError, ArityCapError) as e:
        ok, detail = False, str(e)
    rows.append({"case": name, "ring": str(ring), "result": "pass" if ok else "FAIL",
                 "detail": detail})


def _transfer_case(w: TruncatedSeries, K: int):
    A, _, T = minimal_model(w, K)
    checks = [check_ainfinity(A), check_superfiltered_unital(A), clifford_check(A, w)]
    ok = all(r["is_valid"] for r in checks) and disc_potential(A, w.order) == w
    return ok, f"{len(A.ops)} ops"


def _formality_case(ring, expected: str, order: int = 5):
    P1 = laurent_expand({(1,): 1, (-1,): 1, (0,): -2}, [1], order, ring)
    P2 = TruncatedSeries.monomial(ring, 1, (2,), 1, order)
    result = potential_equivalence_search(P1, P2, 1, order)
    return result.verdict == expected, result.verdict


def _jacobian_case(P: TruncatedSeries):
    H = complex_cohomology(clifford_complex(P))
    jac = jacobian_algebra(P)
    return H.total_rank() == jac.rank, f"rank {H.total_rank()}"


def _hkr_case(ring, n: int, L: int):
    A = AInfinityDeformation.formal(ring, n, L + 2, L)
    window = hh_window_complex(A, L)
    return all(r == 1 for r in window.ranks.values()) and len(window.ranks) == 2 * L, \
        f"{len(window.ranks)} graded pieces"


def _pipeline_case(w: TruncatedSeries):
    A, _, _ = minimal_model(w, w.order + 1)
    result = composite_equivalence(A, w.order - 1)
    return result.report["is_valid"], f"arity {result.report['certified'].get('arity')}"


def cmd_selftest(config: JobConfig) -> int:
    rings = [parse_ring(config.ring or "Q")]
    if rings[0].characteristic != 2:
        rings.append(parse_ring("Fp:2"))
    rng = np.random.default_rng(config.seed)
    rows: list = []
    for ring in rings:
        w = random_series(rng, ring, 1, 4, min_degree=2)
        if w.is_zero():
            w = TruncatedSeries.monomial(ring, 1, (2,), 1, 4)
        _case(rows, "transfer (random n=1)", ring, lambda w=w: _transfer_case(w, 5))
        x2 = TruncatedSeries(ring, 1, {(2,): 1, (3,): 1}, 5)
        _case(rows, "jacobian x^2 + x^3", ring, lambda x2=x2: _jacobian_case(x2))
        if ring.characteristic != 2:
            _case(rows, "hkr formal n=1", ring, lambda ring=ring: _hkr_case(ring, 1, 3))
        w2 = TruncatedSeries(ring, 2, {(1, 1): 1, (0, 3): 1}, 3)
        _case(rows, "transfer x1 x2 + x2^3", ring, lambda w2=w2: _transfer_case(w2, 4))
        sq = TruncatedSeries(ring, 1, {(2,): 1}, 3)
        _case(rows, "pipeline x^2", ring, lambda sq=sq: _pipeline_case(sq))
    _case(rows, "formality over Q", "Q", lambda: _formality_case(parse_ring("Q"), FOUND))
    _case(rows, "formality over F3", "Fp:3", lambda: _formality_case(parse_ring("Fp:3"), FOUND))
    _case(rows, "formality over F2", "Fp:2",
          lambda: _formality_case(parse_ring("Fp:2"), "NOT-EQUIVALENT"))
    table = pd.DataFrame(rows)
    print(table.to_string(index=False))
    report = new_report()
    for row in rows:
        if row["result"] != "pass":
            add_issue(report, f"{row['case']} over {row['ring']}: {row['detail']}")
    report["cases"] = rows
    _finish(report, config)
    return EXIT_OK if report["is_valid"] else EXIT_FAIL


def run(args, settings: Settings) -> int:
    config = job_config(args)
    validate_job_config(config, settings, needs_potential=args.command in POTENTIAL_JOBS)
    if args.command == "stabilize":
        return cmd_stabilize(config)
    if args.command == "minimal-model":
        return cmd_minimal_model(config)
    if args.command == "disc-potential":
        return cmd_disc_potential(config)
    if args.command == "mirror":
        return cmd_mirror(config)
    if args.command == "equivalent":
        return cmd_equivalent(config, settings)
    if args.command == "hochschild":
        return cmd_hochschild(config)
    if args.command == "verify":
        return cmd_verify(config)
    return cmd_selftest(config)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse the command line, run one job and return its exit code.
    """
    try:
        settings = load_settings()
    except InvalidInputError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=getattr(logging, settings.log_level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = parse_args(argv, settings)
    logger.debug(f"ainf-mf-engine {TOOL_VERSION}: {args.command}")
    try:
        return run(args, settings)
    except (InvalidInputError, RingMismatchError, NotInvertibleError, ArityCapError) as e:
        print(f"Input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except VerificationError as e:
        logger.error(f"Verification failed at stage {e.stage}: {e}")
        print(f"Verification failed: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
