"""derived-intersect: run one problem file and emit a JSON report.

Exit codes: 0 verified success, 1 negative mathematical verdict, 2 input
error, 3 internal invariant violation (or the DI_MAX_DEGREE cap was hit).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction
from math import comb

import jsonschema

from . import __version__
from .ak import (
    CharacteristicTooSmall,
    ExtractionError,
    QuantizedCycle,
    ak_complex,
    atiyah_morphism,
    change_quantization_iso,
    psi_theta,
    extract_splitting_from_formality,
)
from .cycles import (
    DegenerateInput,
    NonSplit,
    adapt_coordinates,
    excess_sequence,
    find_module_splitting,
    reduction_to_diagonal,
)
from .graded_split import (
    GradedBundleMap,
    LineBundleSum,
    NotSurjective,
    find_graded_section,
    projective_ring,
)
from .groebner import DegreeLimitExceeded, groebner_basis
from .koszul import derived_restriction, tor_excess_compare, tor_ranks
from .matrix import PolyMatrix
from .polyring import parse_field

COMMANDS = ("tor", "excess", "ak", "formality", "split", "diag", "graded-split")
ORDERS = ("degrevlex", "deglex", "lex")

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3

_int_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}
_poly_matrix = {
    "type": "array",
    "items": {"type": "array", "items": {"type": ["string", "integer"]}},
}
_options = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "field": {"type": "string", "pattern": "^(qq|fp(:[0-9]+)?)$"},
        "order": {"enum": list(ORDERS)},
        "seed": {"type": "integer"},
        "shear": {"type": "boolean"},
        "verbosity": {"type": "integer", "minimum": 0},
    },
}
_common = {
    "version": {"type": ["string", "integer"]},
    "kind": {"enum": list(COMMANDS)},
    "options": _options,
}

PAIR_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["ambient", "X"],
    "properties": {
        **_common,
        "ambient": {"type": "integer", "minimum": 1},
        "X": _int_matrix,
        "Y": _int_matrix,
        "phi": _poly_matrix,
    },
}

DIAG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["ambient", "X"],
    "properties": {
        **_common,
        "ambient": {"type": "integer", "minimum": 1},
        "X": _int_matrix,
    },
}

GRADED_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["proj_dim", "source_twists", "target_twists", "matrix"],
    "properties": {
        **_common,
        "proj_dim": {"type": "integer", "minimum": 1},
        "source_twists": {"type": "array", "items": {"type": "integer"}},
        "target_twists": {"type": "array", "items": {"type": "integer"}},
        "matrix": _poly_matrix,
        "variables": {"type": "array", "items": {"type": "string"}},
    },
}

INPUT_SCHEMAS = {
    **{c: PAIR_SCHEMA for c in ("tor", "excess", "ak", "formality", "split")},
    "diag": DIAG_SCHEMA,
    "graded-split": GRADED_SCHEMA,
}

REPORT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["engine", "command", "field", "order", "seed", "input", "verdict", "status", "results"],
    "properties": {
        "engine": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name", "version"],
            "properties": {"name": {"const": "derived-intersect"}, "version": {"type": "string"}},
        },
        "command": {"enum": list(COMMANDS)},
        "field": {"type": "string"},
        "order": {"enum": list(ORDERS)},
        "seed": {"type": "integer"},
        "input": {"type": "object"},
        "verdict": {"type": "string"},
        "status": {"enum": ["ok", "negative", "invariant-violation", "degree-limit"]},
        "results": {"type": "object"},
        "violations": {"type": "array", "items": {"type": "string"}},
        "error": {"type": "string"},
    },
}


class InputError(ValueError):
    pass


def _json_ready(obj):
    """Plain JSON values with deterministic string forms for exact numbers."""
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if hasattr(obj, "to_json"):
        return _json_ready(obj.to_json())
    return str(obj)


def _mat(M: PolyMatrix):
    return [[str(a) for a in row] for row in M.entries]


def _field_name(p: int) -> str:
    return f"fp:{p}" if p else "qq"


# ---------------------------------------------------------------------------
# subcommands; each fills ``res`` in place so a partial report survives an abort


def _pair(problem, ctx):
    X = problem["X"]
    Y = problem.get("Y", X)
    return adapt_coordinates(X, Y, problem["ambient"], ctx["field"], ctx["order"])


def _tor_section(pair, res, viol, seed):
    dr = derived_restriction(pair)
    ranks = tor_ranks(pair, dr, seed=seed)
    expected = [comb(pair.r, k) for k in range(pair.codim_x + 1)]
    cmp_ = tor_excess_compare(pair, dr)
    ok_chi, chi_terms, chi_h = dr.complex.euler_characteristic_check(random.Random(seed))
    gb = groebner_basis(pair.equations("X") + pair.equations("Y") or [pair.ring().zero()])
    res["tor_ranks"] = ranks
    res["expected_ranks"] = expected
    res["excess_comparison"] = cmp_.to_json()
    res["checks"] = {
        "euler_characteristic": ok_chi,
        "complex_valid": bool(dr.complex.validate()),
        "buchberger": gb.check_buchberger(),
    }
    if ranks != expected:
        viol.append("generic Tor ranks differ from the binomial ranks of the excess bundle")
    if not cmp_.verdict:
        viol.append("excess bundle comparison failed")
    if not all(res["checks"].values()):
        viol.append("engine self-check failed")
    return dr, cmp_.verdict


def run_tor(problem, ctx, res, viol):
    pair = _pair(problem, ctx)
    res["pair"] = pair.to_json()
    res["excess_rank"] = pair.r
    res["transverse"] = pair.is_transverse()
    _, ok = _tor_section(pair, res, viol, ctx["seed"])
    return f"excess-match: {str(ok).lower()}", False


def _split_section(pair, ctx, res, viol):
    ses = excess_sequence(pair, ctx["seed"] if ctx["shear"] else None)
    res["sequence"] = ses.to_json()
    bad = ses.check()
    viol.extend(bad)
    w = find_module_splitting(ses)
    if isinstance(w, NonSplit):
        res["splitting"] = {"split": False, "certificate": w.to_json()}
        return ses, None
    res["splitting"] = {"split": True, "witness": w.to_json(), "verified": w.check(ses)}
    if not w.check(ses):
        viol.append("splitting witness fails its identities")
    return ses, w


def run_excess(problem, ctx, res, viol):
    pair = _pair(problem, ctx)
    res["pair"] = pair.to_json()
    res["excess_rank"] = pair.r
    _, w = _split_section(pair, ctx, res, viol)
    return ("split", False) if w else ("non-split", True)


def run_split(problem, ctx, res, viol):
    pair = _pair(problem, ctx)
    res["blocks"] = pair.to_json()["blocks"]
    _, w = _split_section(pair, ctx, res, viol)
    return ("split", False) if w else ("non-split", True)


def _parse_phi(problem, pair):
    RX = pair.ring_x()
    c = pair.codim_x
    raw = problem.get("phi")
    if raw is None:
        return None
    if len(raw) != c or any(len(row) != RX.nvars for row in raw):
        raise InputError(f"phi must be {c} x {RX.nvars} with entries in {', '.join(RX.names) or 'constants'}")
    try:
        rows = [[RX.parse(str(a)) for a in row] for row in raw]
    except ValueError as exc:
        raise InputError(f"phi: {exc} (tangent coordinates of X: {', '.join(RX.names)})") from exc
    return PolyMatrix(RX, c, RX.nvars, rows)


def run_ak(problem, ctx, res, viol):
    pair = _pair(problem, ctx)
    phi = _parse_phi(problem, pair)
    qc0 = QuantizedCycle.from_pair(pair)
    qc = QuantizedCycle.from_pair(pair, phi)
    data = ak_complex(qc)
    res["codim"] = qc.codim
    res["conormal"] = list(qc.conormal)
    res["tangent"] = list(qc.tangent)
    res["ranks"] = data.ranks()
    res["expected_ranks"] = [comb(qc.codim + 1, k + 1) for k in range(qc.codim + 1)]
    d2 = data.check_d2()
    res["d_squared_zero"] = bool(d2)
    res["action_square_zero"] = data.check_square_zero()
    res["equivariance_failures"] = data.check_equivariance()
    resol = data.check_resolution()
    res["resolution"] = resol
    res["differential_scale"] = data.scale_note
    if not d2:
        viol.append(f"d^2 != 0: {d2.detail}")
    if not res["action_square_zero"] or res["equivariance_failures"]:
        viol.append("N* action is not a square-zero equivariant action")
    if res["ranks"] != res["expected_ranks"]:
        viol.append("AK ranks differ from C(c+1, k+1)")
    if not resol["ok"]:
        viol.append("AK complex is not a resolution of a free rank-one module")
    if phi is not None:
        ch = change_quantization_iso(qc0, phi)
        res["change_of_quantization"] = {
            "verdict": ch.verdict,
            "chain_map_ok": ch.chain_map_ok,
            "module_map_ok": ch.module_map_ok,
            "inverse_ok": ch.inverse_ok,
            "map": ch.map.to_json(),
        }
        if not ch.verdict:
            viol.append("change of quantization is not a verified isomorphism")
    return f"resolution: {str(resol['ok']).lower()}", False


def _formality_section(pair, ctx, res, viol):
    ses, w = _split_section(pair, ctx, res, viol)
    if w is None:
        return False
    dr = derived_restriction(pair)
    pt = psi_theta(pair, ses, w, dr=dr)
    res["theta"] = {
        "component_shapes": pt.component_shapes(),
        "components": {f"{-k}": _mat(pt.theta.f(-k)) for k in range(pair.codim_x + 1)},
        "chain_map_valid": bool(pt.theta_valid),
        "quasi_iso": pt.quasi_iso.to_json(),
        "is_augmentation": pt.is_augmentation,
    }
    res["psi"] = {"chain_map_valid": bool(pt.gamma_valid), "factorization_ok": pt.factorization_ok,
                  "restricted_ak_ranks": pt.restricted.ranks(),
                  "restricted_ak_quotient_check": pt.restricted.quotient_check}
    if not pt.verdict:
        viol.append("Θ is not a verified quasi-isomorphism")
    if pair.is_transverse() and not pt.is_augmentation:
        viol.append("transverse pair: Θ is not the augmentation")
    at = atiyah_morphism(pair, ses, dr)
    res["atiyah"] = {"chain_map_valid": bool(at.valid), "iso_on_H1": at.iso.verdict}
    if not at.verdict:
        viol.append("Atiyah morphism is not an isomorphism on H^{-1}")
    try:
        ex = extract_splitting_from_formality(pair, pt.theta, ses)
    except ExtractionError as exc:
        viol.append(f"extraction failed: {exc}")
        return False
    res["extraction"] = ex.to_json()
    res["extraction"]["roundtrip_equals_input"] = ex.retraction == w.retraction
    if not ex.verdict:
        viol.append("extracted retraction fails rho * alpha = id")
    return pt.verdict and ex.verdict


def run_formality(problem, ctx, res, viol):
    pair = _pair(problem, ctx)
    res["pair"] = pair.to_json()
    ok = _formality_section(pair, ctx, res, viol)
    if "splitting" in res and not res["splitting"]["split"]:
        return "non-split", True
    return f"formal: {str(ok).lower()}", False


def run_diag(problem, ctx, res, viol):
    m = problem["ambient"]
    red = reduction_to_diagonal(problem["X"], m, ctx["field"], ctx["order"])
    pair = red.pair
    res["reduction"] = {
        "m": m,
        "codim": red.codim,
        "diagonal_ok": red.diagonal_ok,
        "conormal_ranks_ok": red.conormal_ranks_ok,
        "excess_rank": pair.r,
        "pair": pair.to_json(),
    }
    if not (red.diagonal_ok and red.conormal_ranks_ok):
        viol.append("doubled pair does not have the expected intersection or excess rank")
    tor = {}
    _, ok_tor = _tor_section(pair, tor, viol, ctx["seed"])
    res["tor"] = tor
    form = {}
    ok_form = _formality_section(pair, ctx, form, viol)
    res["formality"] = form
    return f"diagonal-formal: {str(ok_tor and ok_form).lower()}", False


def run_graded(problem, ctx, res, viol):
    n = problem["proj_dim"]
    try:
        ring = projective_ring(n, ctx["field"], problem.get("variables"))
        A = LineBundleSum(n, problem["source_twists"])
        B = LineBundleSum(n, problem["target_twists"])
        raw = problem["matrix"]
        if len(raw) != B.rank or any(len(row) != A.rank for row in raw):
            raise InputError(f"matrix must be {B.rank} x {A.rank}")
        M = PolyMatrix(ring, B.rank, A.rank, [[ring.parse(str(a)) for a in row] for row in raw])
        pi = GradedBundleMap(A, B, M)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out = find_graded_section(pi)
    res.update(out.to_json())
    res["source"] = str(A)
    res["target"] = str(B)
    if out.verdict == "non-split":
        return "non-split", True
    return "split", False


RUNNERS = {
    "tor": run_tor,
    "excess": run_excess,
    "ak": run_ak,
    "formality": run_formality,
    "split": run_split,
    "diag": run_diag,
    "graded-split": run_graded,
}


# ---------------------------------------------------------------------------


def _summary(report, elapsed):
    lines = [f"derived-intersect {report['command']}  field={report['field']}  seed={report['seed']}"]
    r = report["results"]
    for key in ("tor_ranks", "expected_ranks", "ranks", "excess_rank", "transverse"):
        if key in r:
            lines.append(f"  {key}: {r[key]}")
    if "theta" in r:
        lines.append(f"  theta shapes: {r['theta']['component_shapes']}")
    for v in report.get("violations", []):
        lines.append(f"  violation: {v}")
    if "error" in report:
        lines.append(f"  error: {report['error']}")
    lines.append(f"  verdict: {report['verdict']}  (status {report['status']}, {elapsed:.2f} s)")
    return "\n".join(lines)


def build_parser():
    ap = argparse.ArgumentParser(prog="derived-intersect", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("problem", help="problem file (JSON)")
        sp.add_argument("--field", help="qq or fp:<prime>")
        sp.add_argument("--order", choices=ORDERS)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--pretty", action="store_true", help="print a summary before the JSON report")
        sp.add_argument("--out", help="write the JSON report here instead of standard output")
    return ap


def load_problem(path, command):
    try:
        with open(path) as fh:
            problem = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(problem, INPUT_SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"{path}: {where}: {exc.message}") from exc
    kind = problem.get("kind")
    if kind is not None and kind != command:
        raise InputError(f"problem kind {kind!r} does not match command {command!r}")
    return problem


def execute(command, problem, field=None, order=None, seed=None):
    """Run one problem; return (exit code, report).  Raises InputError."""
    opts = problem.get("options", {})
    try:
        p = parse_field(field or opts.get("field", "qq"))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    ctx = {
        "field": p,
        "order": order or opts.get("order", "degrevlex"),
        "seed": seed if seed is not None else opts.get("seed", 0),
        "shear": opts.get("shear", False),
    }
    report = {
        "engine": {"name": "derived-intersect", "version": __version__},
        "command": command,
        "field": _field_name(p),
        "order": ctx["order"],
        "seed": ctx["seed"],
        "input": problem,
    }
    res, viol = {}, []
    try:
        verdict, negative = RUNNERS[command](problem, ctx, res, viol)
    except (DegenerateInput, CharacteristicTooSmall, NotSurjective) as exc:
        raise InputError(str(exc)) from exc
    except DegreeLimitExceeded as exc:
        report.update(results=res, verdict="aborted", status="degree-limit", error=str(exc))
        return EXIT_INVARIANT, report
    except (AssertionError, ExtractionError) as exc:
        report.update(results=res, verdict="aborted", status="invariant-violation",
                      error=str(exc), violations=viol)
        return EXIT_INVARIANT, report
    report.update(results=res, verdict=verdict)
    if viol:
        report.update(status="invariant-violation", violations=viol)
        return EXIT_INVARIANT, report
    if negative:
        report["status"] = "negative"
        return EXIT_NEGATIVE, report
    report["status"] = "ok"
    return EXIT_OK, report


def render(report) -> str:
    report = _json_ready(report)
    jsonschema.validate(report, REPORT_SCHEMA)
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        problem = load_problem(args.problem, args.command)
        code, report = execute(args.command, problem, args.field, args.order, args.seed)
    except InputError as exc:
        print(f"derived-intersect: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = render(report)
    if args.pretty:
        print(_summary(report, time.perf_counter() - t0))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
