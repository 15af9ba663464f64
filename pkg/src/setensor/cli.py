"""Command-line front end.

Subcommands:
    info      tensor summary: symmetry, entry extrema, Z-pattern, unfolding range
    meig      extremal M-eigenvalues, full spectrum for n <= 3
    check-se  strong-ellipticity certification: projection certificate first,
              eigenvalue route as fallback and for disproofs
    classify  Z/M-structure ladder plus the C1..C13 condition battery
    unfold    dump an n^2-by-n^2 unfolding matrix for external tooling

Exit codes: 0 affirmative verdict, 1 negative verdict, 2 undecided or
boundary, 3 solver/runtime error, 4 input error.  JSON output is
byte-identical across runs with the same configuration and seed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import m_class, m_eigen, se_pocs, tensor_core as tc
from .errors import (
    DimensionMismatch,
    DimensionTooSmall,
    NonFiniteEntry,
    ParseError,
    SetensorError,
    SymmetryViolation,
)

INPUT_ERRORS = (
    ParseError,
    SymmetryViolation,
    NonFiniteEntry,
    DimensionTooSmall,
    DimensionMismatch,
)

EXIT_AFFIRMATIVE = 0
EXIT_NEGATIVE = 1
EXIT_UNDECIDED = 2
EXIT_SOLVER_ERROR = 3
EXIT_INPUT_ERROR = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="setensor",
        description="Verification toolkit for the strong ellipticity of "
        "fourth-order elasticity tensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", "-i", required=True, help="tensor JSON file")
        p.add_argument("--format", choices=("text", "json"), default="text",
                       help="report format (default: text)")
        p.add_argument("--output", "-o", default=None,
                       help="write the report to a file instead of stdout")
        p.add_argument("--seed", type=int, default=42,
                       help="seed for restarts and sampling (default: 42)")
        p.add_argument("--tol", type=float, default=None,
                       help="solver tolerance override")
        p.add_argument("--max-iter", type=int, default=None,
                       help="iteration budget override")

    p_info = sub.add_parser("info", help="tensor summary")
    common(p_info)

    p_meig = sub.add_parser("meig", help="M-eigenvalue computation")
    common(p_meig)
    p_meig.add_argument("--grid", type=int, default=None,
                        help="enumeration grid density")
    p_meig.add_argument("--no-enumerate", action="store_true",
                        help="skip the spectrum enumeration")

    p_se = sub.add_parser("check-se", help="strong ellipticity verification")
    common(p_se)
    p_se.add_argument("--epsilon", type=float, default=None,
                      help="strictness shift (default: 1e-6 * max diagonal; "
                           "0 certifies semidefiniteness only)")

    p_cls = sub.add_parser("classify", help="M-structure classification")
    common(p_cls)
    p_cls.add_argument("--samples", type=int, default=1000,
                       help="sample count for the quantified conditions")
    p_cls.add_argument("--grid", type=int, default=None,
                       help="enumeration grid density for C4")
    p_cls.add_argument("--z-tol", type=float, default=0.0,
                       help="tolerance for the Z sign pattern (default: 0)")

    p_unf = sub.add_parser("unfold", help="dump an unfolding matrix")
    common(p_unf)
    p_unf.add_argument("--mode", choices=("x", "y"), default="x",
                       help="unfolding mode (default: x)")
    return parser


def _load(args) -> tc.ElasticityTensor:
    return tc.load_tensor(args.input)


def _pair_dict(pair) -> dict:
    return {
        "lambda": float(pair.lam),
        "x": pair.x.tolist(),
        "y": pair.y.tolist(),
        "diagnostics": {
            k: v for k, v in sorted(pair.diagnostics.items())
            if isinstance(v, (int, float, bool, str))
        },
    }


def _decision_band(A) -> float:
    return 1e-8 * max(1.0, A.max_abs_entry())


def cmd_info(args):
    A = _load(args)
    zp = m_class.z_pattern(A)
    diag = A.diagonal_entries()
    off_mask = np.ones_like(A.entries, dtype=bool)
    idx = np.arange(A.n)
    off_mask[idx[:, None], idx[:, None], idx[None, :], idx[None, :]] = False
    off = A.entries[off_mask]
    eigs = np.linalg.eigvalsh(tc.unfold(A, "x").matrix)
    report = {
        "command": "info",
        "input": args.input,
        "n": A.n,
        "symmetry_ok": True,
        "max_abs_entry": A.max_abs_entry(),
        "diagonal_min": float(diag.min()),
        "diagonal_max": float(diag.max()),
        "offdiagonal_min": float(off.min()) if off.size else 0.0,
        "offdiagonal_max": float(off.max()) if off.size else 0.0,
        "z_pattern": zp.to_dict(),
        "unfolding_eigenvalue_min": float(eigs.min()),
        "unfolding_eigenvalue_max": float(eigs.max()),
        "unfolding_psd": bool(eigs.min() >= -1e-10 * max(1.0, abs(eigs).max())),
    }
    lines = [
        f"tensor: {args.input}",
        f"n = {A.n}, symmetry check passed",
        f"diagonal entries a_iikk in [{report['diagonal_min']:.6g}, "
        f"{report['diagonal_max']:.6g}]",
        f"off-diagonal entries in [{report['offdiagonal_min']:.6g}, "
        f"{report['offdiagonal_max']:.6g}]",
        f"Z-pattern: {zp.is_z} ({len(zp.violations)} positive off-diagonal "
        "entries)",
        f"unfolding eigenvalues in [{report['unfolding_eigenvalue_min']:.6g}, "
        f"{report['unfolding_eigenvalue_max']:.6g}] "
        f"(PSD: {report['unfolding_psd']})",
    ]
    return report, lines, EXIT_AFFIRMATIVE


def cmd_meig(args):
    A = _load(args)
    power_opts = {"seed": args.seed}
    if args.tol is not None:
        power_opts["tol"] = args.tol
    if args.max_iter is not None:
        power_opts["max_iter"] = args.max_iter
    pmax = m_eigen.power_method_max(A, **power_opts)
    pmin = m_eigen.power_method_min(A, **power_opts)
    spectrum = None
    if A.n <= 3 and not args.no_enumerate:
        enum_opts = {}
        if args.grid is not None:
            enum_opts["grid_density"] = args.grid
        spectrum = m_eigen.enumerate_spectrum(A, **enum_opts)

    lam_min = pmin.lam
    lam_max = pmax.lam
    notes = []
    if spectrum is not None:
        lam_min = min(lam_min, spectrum.min_eigenvalue())
        lam_max = max(lam_max, spectrum.max_eigenvalue())
        gap = abs(pmin.lam - spectrum.min_eigenvalue())
        if gap > 1e-6 * max(1.0, abs(pmin.lam)):
            notes.append(
                f"power method and enumeration disagree on the minimum by {gap:.3e}"
            )
    band = _decision_band(A)
    if lam_min > band:
        verdict = "strong ellipticity holds"
        code = EXIT_AFFIRMATIVE
    elif lam_min < -band:
        verdict = "strong ellipticity fails"
        code = EXIT_NEGATIVE
    else:
        verdict = "boundary: minimal M-eigenvalue is zero within tolerance"
        code = EXIT_UNDECIDED

    report = {
        "command": "meig",
        "input": args.input,
        "n": A.n,
        "seed": args.seed,
        "max": _pair_dict(pmax),
        "min": _pair_dict(pmin),
        "spectrum": None if spectrum is None else {
            "complete": spectrum.complete,
            "eigenvalues": [float(v) for v in spectrum.eigenvalues()],
            "pairs": [_pair_dict(p) for p in spectrum.pairs],
            "diagnostics": {
                k: v for k, v in sorted(spectrum.diagnostics.items())
                if isinstance(v, (int, float, bool, str))
            },
        },
        "minimal_eigenvalue": float(lam_min),
        "maximal_eigenvalue": float(lam_max),
        "verdict": verdict,
        "justification": "strong ellipticity holds if and only if every "
        "M-eigenvalue is positive",
        "notes": notes,
    }
    lines = [
        f"tensor: {args.input} (n = {A.n})",
        f"maximal M-eigenvalue: {lam_max:.10g}",
        f"  x = {np.round(pmax.x, 6).tolist()}, y = {np.round(pmax.y, 6).tolist()}",
        f"minimal M-eigenvalue: {lam_min:.10g}",
        f"  x = {np.round(pmin.x, 6).tolist()}, y = {np.round(pmin.y, 6).tolist()}",
    ]
    if spectrum is not None:
        vals = ", ".join(f"{v:.6g}" for v in spectrum.eigenvalues())
        lines.append(f"enumerated eigenvalues ({len(spectrum.pairs)} pairs): {vals}")
        for p in spectrum.pairs:
            if p.diagnostics.get("degenerate_manifold"):
                lines.append(
                    f"  level {p.lam:.6g} is a degenerate manifold "
                    f"({p.diagnostics['distinct_directions']} directions found)"
                )
    for note in notes:
        lines.append(f"note: {note}")
    lines.append(f"verdict: {verdict}")
    lines.append(f"justification: {report['justification']}")
    return report, lines, code


def cmd_check_se(args):
    A = _load(args)
    epsilon = args.epsilon if args.epsilon is not None else se_pocs.default_epsilon(A)
    pocs_opts = {"epsilon": epsilon}
    if args.max_iter is not None:
        pocs_opts["max_iter"] = args.max_iter
    if args.tol is not None:
        pocs_opts["residual_tol"] = args.tol
    outcome = se_pocs.pocs_verify(A, **pocs_opts)

    report = {
        "command": "check-se",
        "input": args.input,
        "n": A.n,
        "epsilon": float(epsilon),
        "pocs_status": outcome.status,
        "pocs_diagnostics": {
            k: v for k, v in sorted(outcome.diagnostics.items())
            if isinstance(v, (int, float, bool, str))
        },
        "certificate": None,
    }
    lines = [
        f"tensor: {args.input} (n = {A.n})",
        f"projection certification with epsilon = {epsilon:.6g}: {outcome.status}",
        f"  iterations = {outcome.diagnostics['iterations']}, final residual = "
        f"{outcome.diagnostics['final_residual']:.3e}",
    ]

    if outcome.status != se_pocs.INCONCLUSIVE:
        err = outcome.certificate.reconstruction_error(A)
        report["certificate"] = outcome.certificate.to_dict(reconstruction_error=err)
        if outcome.status == se_pocs.CERTIFIED_M_PD:
            verdict = "strong ellipticity holds (strict certificate)"
            justification = (
                "a weakly symmetric tensor with positive definite unfolding "
                "matches the pairwise entry sums, so the biquadratic form is "
                "a strictly positive sum of squares"
            )
        else:
            verdict = (
                "M-positive semidefinite certified (strict strong ellipticity "
                "not established; rerun with a positive epsilon)"
            )
            justification = (
                "a weakly symmetric tensor with positive semidefinite "
                "unfolding matches the pairwise entry sums, so the "
                "biquadratic form is a sum of squares"
            )
        code = EXIT_AFFIRMATIVE
        lines.append(
            f"certificate: {outcome.certificate.rank()} rank-one terms, "
            f"reconstruction error {err:.3e}"
        )
    else:
        power_opts = {"seed": args.seed}
        pmin = m_eigen.power_method_min(A, **power_opts)
        report["min"] = _pair_dict(pmin)
        band = _decision_band(A)
        lines.append(
            "projection route inconclusive; falling back to the eigenvalue "
            "route"
        )
        lines.append(f"minimal M-eigenvalue estimate: {pmin.lam:.10g}")
        if pmin.lam < -band:
            verdict = "strong ellipticity fails"
            justification = (
                "a negative M-eigenvalue makes the biquadratic form negative "
                "at its eigenvector pair"
            )
            code = EXIT_NEGATIVE
        elif pmin.lam > band:
            verdict = "strong ellipticity holds (eigenvalue route)"
            justification = (
                "the minimal M-eigenvalue is positive, and strong ellipticity "
                "holds if and only if every M-eigenvalue is positive"
            )
            code = EXIT_AFFIRMATIVE
        else:
            verdict = (
                "undecided: certification not established and the minimal "
                "M-eigenvalue is zero within tolerance"
            )
            justification = (
                "the certificate search is sufficient only, and the "
                "eigenvalue estimate sits on the boundary"
            )
            code = EXIT_UNDECIDED

    report["verdict"] = verdict
    report["justification"] = justification
    lines.append(f"verdict: {verdict}")
    lines.append(f"justification: {justification}")
    return report, lines, code


def cmd_classify(args):
    A = _load(args)
    power_opts = {"seed": args.seed}
    if args.tol is not None:
        power_opts["tol"] = args.tol
    if args.max_iter is not None:
        power_opts["max_iter"] = args.max_iter
    enum_opts = {}
    if args.grid is not None:
        enum_opts["grid_density"] = args.grid
    report_obj = m_class.classify_with_battery(
        A, n_samples=args.samples, seed=args.seed, z_tol=args.z_tol,
        power_opts=power_opts, enum_opts=enum_opts,
    )
    verdict = report_obj.verdict
    if verdict == m_class.NONSINGULAR_M:
        code = EXIT_AFFIRMATIVE
        justification = (
            "the largest diagonal entry exceeds the spectral radius of the "
            "nonnegative complement, which is equivalent to M-positive "
            "definiteness for Z-pattern tensors"
        )
    elif verdict in (m_class.NOT_M, m_class.NOT_Z):
        code = EXIT_NEGATIVE
        justification = (
            "positive off-diagonal entries rule out the s*E - B "
            "representation" if verdict == m_class.NOT_Z else
            "the spectral radius of the nonnegative complement exceeds the "
            "largest diagonal entry, so a negative M-eigenvalue exists"
        )
    else:
        code = EXIT_UNDECIDED
        justification = (
            "the largest diagonal entry and the complement spectral radius "
            "agree within tolerance; the tensor sits on the semidefinite "
            "boundary"
        )

    report = {
        "command": "classify",
        "input": args.input,
        "n": A.n,
        "seed": args.seed,
        "samples": args.samples,
        **report_obj.to_dict(),
        "justification": justification,
    }
    lines = [
        f"tensor: {args.input} (n = {A.n})",
        f"Z-pattern: {report_obj.z_pattern.is_z} "
        f"({len(report_obj.z_pattern.violations)} positive off-diagonal entries)",
        f"alpha (max diagonal entry) = {report_obj.alpha:.10g}",
    ]
    if report_obj.rho_shift is not None:
        lines.append(
            f"rho_M(alpha*E - A) = {report_obj.rho_shift:.10g} "
            f"(margin {report_obj.margin:.3e})"
        )
    if report_obj.min_eigenvalue is not None:
        lines.append(
            f"minimal M-eigenvalue estimate = {report_obj.min_eigenvalue:.10g}"
        )
    for cid in m_class.ALL_CONDITIONS:
        if cid in report_obj.condition_results:
            res = report_obj.condition_results[cid]
            suffix = ""
            if res.status == m_class.PASS and not res.decisive:
                suffix = " (sampled)"
            note = res.diagnostics.get("note")
            if res.status == m_class.SKIPPED and note:
                suffix = f" ({note})"
            lines.append(f"  {cid}: {res.status}{suffix}")
    if not report_obj.consistency_ok:
        for note in report_obj.consistency_notes:
            lines.append(f"WARNING: {note}")
    lines.append(f"verdict: {verdict}")
    lines.append(f"justification: {justification}")
    return report, lines, code


def cmd_unfold(args):
    A = _load(args)
    unfolded = tc.unfold(A, args.mode)
    report = {
        "command": "unfold",
        "input": args.input,
        "n": A.n,
        "mode": args.mode,
        "matrix": unfolded.matrix.tolist(),
    }
    lines = [
        " ".join(f"{v:.12g}" for v in row) for row in unfolded.matrix
    ]
    return report, lines, EXIT_AFFIRMATIVE


_COMMANDS = {
    "info": cmd_info,
    "meig": cmd_meig,
    "check-se": cmd_check_se,
    "classify": cmd_classify,
    "unfold": cmd_unfold,
}


def _emit(args, report, lines):
    if args.format == "json":
        payload = json.dumps(report, indent=2, sort_keys=True) + "\n"
    else:
        payload = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol is not None and args.tol <= 0:
        print("input error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.max_iter is not None and args.max_iter <= 0:
        print("input error: --max-iter must be positive", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        report, lines, code = _COMMANDS[args.command](args)
    except INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except SetensorError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_ERROR
    report["exit_code"] = code
    _emit(args, report, lines)
    return code


if __name__ == "__main__":
    sys.exit(main())
