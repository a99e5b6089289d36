"""Command-line entry point: ``python -m ewkit <command> ...``.

Exit codes: 0 ok, 2 usage / invalid parameters, 3 a check failed,
4 the checks passed only after a stated formula was replaced by a corrected reading.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import matrix_core as mc
from .config import default_seed
from .errors import EwkitError
from .optimality import certify_witness, optimality_certificate, spanning_vectors
from .positive_maps import FAMILIES, MapSpec, PhaseCollection, positivity_probe
from .states import (
    holevo_form,
    phi6_spa_decomposition,
    ppt_entangled_state,
    spa_separability_certificate_reduction,
)
from .witness_engine import Witness, block_positivity_probe, choi_of_map, spa

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_DISCREPANCY = 0, 2, 3, 4
PSD_TOL = mc.TOL_PSD


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    inputs: dict
    seed: int
    results: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    discrepancies: list = field(default_factory=list)

    def check(self, name: str, passed: bool, margin: float | None = None) -> bool:
        self.checks.append({"name": name, "passed": bool(passed),
                            "margin": None if margin is None else float(margin)})
        return bool(passed)

    @property
    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_json(self) -> dict:
        out = {
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "checks": self.checks,
            "seed": self.seed,
            "versions": f"ewkit {__version__}; numpy {np.__version__}",
        }
        if self.discrepancies:
            out["discrepancies"] = self.discrepancies
        return out

    def dumps(self) -> str:
        return json.dumps(_plain(self.to_json()), sort_keys=True, indent=2) + "\n"

    def summary(self) -> str:
        lines = [f"{'check':<36} {'status':<6} {'margin':>14}", "-" * 58]
        for c in self.checks:
            m = "" if c["margin"] is None else f"{c['margin']:.6e}"
            lines.append(f"{c['name']:<36} {'PASS' if c['passed'] else 'FAIL':<6} {m:>14}")
        return "\n".join(lines) + "\n"


def _plain(obj):
    """Make numpy scalars/arrays JSON friendly."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# z-spec grammar

_ENTRY = re.compile(r"(\d+)\s*,\s*(\d+)\s*:\s*([^,;\s]+)")
_POLAR = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)?)\*?pi(?:/(\d+\.?\d*))?$")


def parse_value(text: str) -> complex:
    """``-1``, ``0.5+0.2i``, ``pi``, ``-pi/2``, ``0.25pi`` (the last three are angles)."""
    t = text.strip()
    m = _POLAR.match(t)
    if m:
        coef = m.group(1)
        c = {"": 1.0, "+": 1.0, "-": -1.0}.get(coef)
        c = float(coef) if c is None else c
        den = float(m.group(2)) if m.group(2) else 1.0
        return complex(np.exp(1j * np.pi * c / den))
    try:
        return complex(t.replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse phase value {text!r}") from None


def parse_zspec(spec: str | None, n_labels: int) -> PhaseCollection:
    if spec is None or spec.strip() == "":
        return PhaseCollection(n_labels)
    spec = spec.strip()
    if spec.startswith("all:"):
        return PhaseCollection.uniform(n_labels, parse_value(spec[4:]))
    entries = {}
    pos = 0
    for m in _ENTRY.finditer(spec):
        if spec[pos:m.start()].strip(" ,;"):
            raise UsageError(f"bad z-spec near {spec[pos:m.start()]!r}")
        i, j = int(m.group(1)), int(m.group(2))
        if not (1 <= i <= n_labels and 1 <= j <= n_labels) or i == j:
            raise UsageError(f"pair ({i},{j}) outside 1..{n_labels}")
        v = parse_value(m.group(3))
        entries[(i, j) if i < j else (j, i)] = v if i < j else np.conj(v)
        pos = m.end()
    if not entries or spec[pos:].strip(" ,;"):
        raise UsageError(f"bad z-spec {spec!r}")
    return PhaseCollection(n_labels, entries)


def build_spec(family: str, n: int | None, k: int | None, z: str | None) -> MapSpec:
    even = family in ("robertson", "gen-robertson", "breuer-hall")
    if even:
        if k is None:
            if n is None:
                raise UsageError(f"{family} needs --k")
            k = n // 2 if n % 2 == 0 else None
            if k is None:
                raise UsageError(f"{family} needs an even dimension")
        dim, labels = 2 * k, k
    else:
        if n is None:
            raise UsageError(f"{family} needs --n")
        dim, labels = n, n
    phases = None
    if family in ("gen-reduction", "gen-robertson"):
        phases = parse_zspec(z, labels)
    elif z is not None:
        raise UsageError(f"{family} takes no phases")
    return MapSpec(family, dim, phases)


def load_witness(path: str) -> Witness:
    try:
        with open(path) as fh:
            return Witness.from_json(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read witness {path}: {exc}") from None


# Commands

def cmd_witness(args, report: RunReport) -> int:
    spec = build_spec(args.family, args.n, args.k, args.z)
    w = choi_of_map(spec)
    lam = float(mc.min_eigenvalue(w.op))
    probe = block_positivity_probe(w, args.samples, report.seed)
    report.results.update({
        "map": spec.to_json(),
        "lambda_min": lam,
        "trace": w.normalized_trace,
        "block_probe_min": probe.min_found,
        "dim": w.op.shape[0],
    })
    report.check("hermitian", mc.is_hermitian(w.op))
    report.check("unit_trace", abs(w.normalized_trace - 1) <= 1e-10, w.normalized_trace - 1)
    report.check("block_positive", probe.min_found >= -PSD_TOL, probe.min_found)
    if args.out:
        write_atomic(args.out, json.dumps(_plain(w.to_json()), sort_keys=True) + "\n")
        report.results["out"] = str(args.out)
    return EXIT_OK if report.all_passed else EXIT_CHECK


def cmd_spa(args, report: RunReport) -> int:
    w = load_witness(args.witness)
    res = spa(w)
    report.results.update(res.to_json())
    report.results["already_positive"] = res.already_positive
    report.check("unit_trace", abs(w.normalized_trace - 1) <= 1e-10, w.normalized_trace - 1)
    report.check("spa_on_psd_boundary", abs(res.psd_margin) <= PSD_TOL or res.already_positive,
                 res.psd_margin)
    return EXIT_OK if report.all_passed else EXIT_CHECK


def cmd_optimality(args, report: RunReport) -> int:
    w = load_witness(args.witness)
    if w.dims[0] != w.dims[1]:
        raise UsageError("optimality needs an n x n witness")
    if args.angles == "auto":
        cert = certify_witness(w)
    else:
        cert = optimality_certificate(w, spanning_vectors(w.dims[0]))
    report.results.update(cert)
    report.check("zero_expectations", cert["all_zero"], cert["max_abs_expectation"])
    report.check("span_rank_full", cert["span_rank"] == w.dims[0] ** 2, cert["span_rank"])
    return EXIT_OK if cert["certified"] else EXIT_CHECK


def cmd_state_ppt(args, report: RunReport) -> int:
    z = parse_zspec(args.z, args.k)
    state = ppt_entangled_state(args.k, z)
    w = load_witness(args.detect) if args.detect else state.detection_target
    if w.op.shape != state.op.shape:
        raise UsageError("witness and state dimensions differ")
    value = float(np.real(np.trace(w.op @ state.op)))
    target = -1.0 / (24 * args.k * (args.k - 1))
    c = state.certificates
    report.results.update({
        "reading": state.reading,
        "detection_value": value,
        "expected_detection": target,
        "psd_margin": c["positivity"]["margin"],
        "ppt_margin": c["ppt"]["margin"],
        "trace": c["trace"]["value"],
    })
    report.check("trace_one", c["trace"]["passed"], c["trace"]["value"] - 1)
    report.check("psd", c["positivity"]["passed"], c["positivity"]["margin"])
    report.check("ppt", c["ppt"]["passed"], c["ppt"]["margin"])
    report.check("detected", value < -PSD_TOL and abs(value - target) <= 1e-10, value - target)
    for d in state.discrepancies:
        report.discrepancies.append({
            "reading": d["reading"],
            "failing_checks": d["failed"],
            "details": d["checks"],
        })
    if args.out:
        write_atomic(args.out, json.dumps(_plain(state.to_json()), sort_keys=True) + "\n")
        report.results["out"] = str(args.out)
    if not report.all_passed:
        return EXIT_CHECK
    return EXIT_DISCREPANCY if report.discrepancies else EXIT_OK


def cmd_probe(args, report: RunReport) -> int:
    spec = build_spec(args.family, args.n, args.k, args.z)
    rep = positivity_probe(spec, args.samples, report.seed)
    report.results.update({"map": spec.to_json(), **rep.to_json()})
    report.check("positive", rep.min_found >= -PSD_TOL, rep.min_found)
    return EXIT_OK if report.all_passed else EXIT_CHECK


def cmd_certify_spa_separable(args, report: RunReport) -> int:
    z = parse_zspec(args.z, args.n)
    dec = spa_separability_certificate_reduction(args.n, z)
    hv = holevo_form(dec, args.n)
    report.results.update({
        "terms": len(dec.terms),
        "target_residual": dec.target_residual,
        "holevo_resolution_residual": hv["resolution_residual"],
        "holevo_channel_residual": hv["channel_residual"],
    })
    report.check("reconstruction", dec.target_residual <= 1e-8, dec.target_residual)
    report.check("terms_product", dec.terms_are_product())
    report.check("holevo_resolution", hv["resolution_residual"] <= 1e-6, hv["resolution_residual"])
    if args.out:
        write_atomic(args.out, json.dumps(_plain(dec.to_json()), sort_keys=True) + "\n")
        report.results["out"] = str(args.out)
    return EXIT_OK if report.all_passed else EXIT_CHECK


def cmd_phi6(args, report: RunReport) -> int:
    res = phi6_spa_decomposition()
    d = res["D"]
    report.results.update({
        "twirl": res["twirl"],
        "coefficients": res["coefficients"],
        "residual": res["residual"],
        "attempts": res["attempts"],
        "d_min": float(np.min(np.diag(d).real)),
    })
    report.check("off_diagonal_residual", res["residual"] <= 1e-8, res["residual"])
    report.check("remainder_psd", float(np.min(np.diag(d).real)) >= -PSD_TOL,
                 float(np.min(np.diag(d).real)))
    for a in res["attempts"]:
        if not a["passed"]:
            report.discrepancies.append({"twirl": a["twirl"], "failing_checks": ["off_diagonal_residual"],
                                         "residual": a["residual"]})
    if not report.all_passed:
        return EXIT_CHECK
    return EXIT_DISCREPANCY if report.discrepancies else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS lets the flags appear before or after the subcommand
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="default: $EWKIT_SEED or 42")
    common.add_argument("--report", default=argparse.SUPPRESS,
                        help="write the run report here instead of stdout")
    common.add_argument("--summary", action="store_true", default=argparse.SUPPRESS,
                        help="print a table of checks to stderr")
    p = argparse.ArgumentParser(prog="ewkit", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **kw: _add(*a, parents=[common], **kw)

    def map_args(sp):
        sp.add_argument("--family", required=True, choices=FAMILIES)
        sp.add_argument("--n", type=int)
        sp.add_argument("--k", type=int)
        sp.add_argument("--z", help="all:<v> | i,j:<re>[+<im>i] | i,j:pi/2 ...")

    sp = sub.add_parser("witness", help="build a witness from a map")
    map_args(sp)
    sp.add_argument("--samples", type=int, default=2000)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("spa", help="structural physical approximation of a witness")
    sp.add_argument("witness")
    sp.set_defaults(func=cmd_spa)

    sp = sub.add_parser("optimality", help="spanning product-vector certificate")
    sp.add_argument("witness")
    sp.add_argument("--angles", choices=("auto", "zero"), default="auto")
    sp.set_defaults(func=cmd_optimality)

    sp = sub.add_parser("state-ppt", help="PPT entangled state and its detection")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--z")
    sp.add_argument("--detect", help="witness JSON to evaluate on the state")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_state_ppt)

    sp = sub.add_parser("probe", help="sampled positivity probe of a map")
    map_args(sp)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.set_defaults(func=cmd_probe)

    sp = sub.add_parser("certify-spa-separable", help="product decomposition of the reduction SPA")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--z")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_certify_spa_separable)

    sp = sub.add_parser("phi6", help="separable decomposition of the SPA of Phi_6 at z = -1")
    sp.set_defaults(func=cmd_phi6)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for name, default in (("seed", None), ("report", None), ("summary", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    seed = args.seed if args.seed is not None else default_seed()
    inputs = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "command", "report", "summary", "seed")}
    report = RunReport(args.command, inputs, seed)
    try:
        code = args.func(args, report)
    except (UsageError, EwkitError, ValueError) as exc:
        print(f"ewkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = report.dumps()
    if args.report:
        write_atomic(args.report, text)
    else:
        sys.stdout.write(text)
    if args.summary:
        sys.stderr.write(report.summary())
    return code


if __name__ == "__main__":
    sys.exit(main())
