"""``convexo`` command-line interface.

Problem files are JSON objects::

    {"polynomial": {"vars": n, "terms": [{"exp": [...], "coef": c}, ...]},
     "region": {"type": "box" | "ball" | "polytope" | "semialgebraic", ...},
     "loja": {"C": ..., "K": ..., "L": ...},      # optional
     "radius_hint": r, "xi": [...], "xi_radius": r, "a0": [...]}   # optional

Reports are deterministic JSON (sorted keys) carrying ``"schema": 1``, the
tool version, the seed and provenance strings. ``critical`` writes JSON
lines: one record per step and a final summary.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .certificates import (THM_COMPACT, THM_DOUBLE_EXP, THM_INTEGER, THM_NONCOMPACT, Family,
                           LojasiewiczData, certify)
from .convexifier import ConvexifierSpec
from .critical import ProximalConfig, proximal_search
from .exceptions import (ArgumentError, ConfigurationError, ConvexoError, DimensionError, DomainError,
                         PreconditionError, StallError, UndefinedDegreeError, UnsupportedProjectionError)
from .polynomial import Polynomial
from .region import region_from_json
from .solver import argmin
from .verifier import FAIL, INCONCLUSIVE, practical_n, reproduce_counterexamples, verify_convexity

EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAIL, EXIT_INCONCLUSIVE, EXIT_DOMAIN = 0, 1, 2, 3, 4
SCHEMA = 1
PROVENANCE_CATALOG = [THM_COMPACT, THM_INTEGER, THM_NONCOMPACT, THM_DOUBLE_EXP]
PRACTICAL = "practical (empirically verified)"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="convexo", description="Exponential convexification of positive polynomials.")
    parser.add_argument("--version", action="version", version=f"convexo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("bound", "verify", "minimize", "critical", "reproduce-counterexamples"):
        p = sub.add_parser(name)
        p.add_argument("--problem", required=name != "reproduce-counterexamples")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--family", choices=[f.value for f in Family], default=Family.SINGLE_EXP.value)
        p.add_argument("--n", type=float, default=None, help="exponent override")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--max-iter", type=int, default=None)
        p.add_argument("--budget", type=int, default=1000, help="verification sample count")
        p.add_argument("--out", default=None)
    return parser


class Problem:
    def __init__(self, obj: dict):
        if not isinstance(obj, dict):
            raise ArgumentError("problem file must hold a JSON object")
        try:
            self.f = Polynomial.from_json(obj["polynomial"])
            region = dict(obj["region"])
        except KeyError as exc:
            raise ArgumentError(f"problem is missing {exc}") from exc
        if self.f.is_zero():
            raise UndefinedDegreeError("zero polynomial")
        if "radius_hint" in obj and "radius_hint" not in region:
            region["radius_hint"] = obj["radius_hint"]
        try:
            self.X = region_from_json(region, self.f.num_vars)
        except (KeyError, TypeError) as exc:
            raise ArgumentError(f"malformed region: missing {exc}") from exc
        loja = obj.get("loja")
        self.loja = None if loja is None else LojasiewiczData(loja["C"], loja["K"], loja["L"])
        n = self.f.num_vars
        self.xi = np.asarray(obj["xi"], dtype=float) if "xi" in obj else None
        self.xi_radius = obj.get("xi_radius")
        self.a0 = np.asarray(obj["a0"], dtype=float) if "a0" in obj else None
        for name in ("xi", "a0"):
            v = getattr(self, name)
            if v is not None and v.size != n:
                raise DimensionError(f"{name} must have {n} entries")

    def default_point(self):
        x = np.zeros(self.f.num_vars)
        return self.X.project(x) if self.X.supports_projection() else x


def load_problem(path: str) -> Problem:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read problem file: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return Problem(obj)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, Family):
        return o.value
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(o):
    """Replace non-finite floats, which strict JSON cannot carry, by strings."""
    if isinstance(o, float) and not math.isfinite(o):
        return "nan" if math.isnan(o) else ("inf" if o > 0 else "-inf")
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def dumps(obj) -> str:
    return json.dumps(_clean(json.loads(json.dumps(obj, default=_jsonable))), sort_keys=True)


def _header(args, command) -> dict:
    return {"schema": SCHEMA, "version": __version__, "seed": args.seed, "command": command,
            "provenance_catalog": PROVENANCE_CATALOG}


def _default_xi_radius(prob: Problem, family: Family):
    if prob.xi_radius is not None:
        return float(prob.xi_radius)
    if family is Family.SINGLE_EXP:
        return None
    R = prob.X.radius_bound()
    return float(R) if R is not None else 1.0


def _choose_n(args, prob, family):
    """Exponent and its provenance: override, else the practical search."""
    if args.n is not None:
        return args.n, "user", None
    res = practical_n(family, prob.f, prob.X, _default_xi_radius(prob, family), budget=args.budget, seed=args.seed)
    if res.N is None:
        raise PreconditionError("no practical exponent found up to the search limit")
    return res.N, PRACTICAL, res


def cmd_bound(args, prob):
    family = Family(args.family)
    out = _header(args, "bound")
    out["family"] = family.value
    try:
        cert = certify(prob.f, prob.X, family, loja=prob.loja, seed=args.seed)
        out["certified"] = dict(cert.to_json(), label="theorem-backed")
        out["provenance"] = cert.provenance
        out["certified_N_log10"] = cert.n_certified.log10
    except PreconditionError as exc:
        out["certified"] = None
        out["certified_error"] = str(exc)
        out["provenance"] = None
    res = practical_n(family, prob.f, prob.X, _default_xi_radius(prob, family), budget=args.budget, seed=args.seed)
    out["practical"] = dict(res.to_json(), label="empirically verified")
    out["practical_N"] = res.N
    return out, EXIT_OK


def cmd_verify(args, prob):
    family = Family(args.family)
    N, source, _ = _choose_n(args, prob, family)
    xi = prob.xi if prob.xi is not None else np.zeros(prob.f.num_vars)
    spec = ConvexifierSpec(family, N, xi, prob.f)
    res = verify_convexity(spec, prob.X, budget=args.budget, seed=args.seed)
    out = _header(args, "verify")
    out.update(res.to_json())
    out.update(family=family.value, N=N, provenance=source, xi=xi)
    code = {FAIL: EXIT_VERIFY_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE}.get(res.status, EXIT_OK)
    return out, code


def cmd_minimize(args, prob):
    family = Family(args.family)
    N, source, _ = _choose_n(args, prob, family)
    xi = prob.xi if prob.xi is not None else prob.default_point()
    spec = ConvexifierSpec(family, N, xi, prob.f)
    res = argmin(spec, prob.X, tol=args.tol or 1e-8, max_iter=args.max_iter or 10_000, seed=args.seed)
    out = _header(args, "minimize")
    out.update(res.to_json())
    out.update(family=family.value, N=N, provenance=source, xi=xi)
    return out, EXIT_OK if res.converged else EXIT_INCONCLUSIVE


def cmd_critical(args, prob):
    family = None if args.family == Family.SINGLE_EXP.value and args.n is None else Family(args.family)
    cfg = ProximalConfig(family=family, N=args.n, step_tol=args.tol or 1e-7,
                         budget=args.max_iter or 10_000, seed=args.seed)
    a0 = prob.a0 if prob.a0 is not None else prob.default_point()
    trace = proximal_search(prob.f, prob.X, a0, cfg)
    records = trace.records()
    header = _header(args, "critical")
    for r in records:
        r["schema"] = SCHEMA
    records[-1].update(header)
    records[-1]["provenance"] = "user" if args.n is not None else (
        "shifted, N=1" if trace.shift else PRACTICAL)
    code = EXIT_OK if trace.status == "converged" else EXIT_INCONCLUSIVE
    return records, code


def cmd_reproduce(args, prob):
    rep = reproduce_counterexamples()
    out = _header(args, "reproduce-counterexamples")
    out.update(rep)
    return out, EXIT_OK if rep["ok"] else EXIT_VERIFY_FAIL


COMMANDS = {"bound": cmd_bound, "verify": cmd_verify, "minimize": cmd_minimize, "critical": cmd_critical,
            "reproduce-counterexamples": cmd_reproduce}


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w") as fh:
            fh.write(text)


def run(argv=None) -> int:
    """Parse ``argv``, run the subcommand and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
        prob = load_problem(args.problem) if args.problem else None
        result, code = COMMANDS[args.command](args, prob)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (UsageError, ArgumentError, DimensionError, ConfigurationError, UnsupportedProjectionError) as exc:
        print(f"convexo: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, UndefinedDegreeError, PreconditionError) as exc:
        print(f"convexo: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except StallError as exc:
        print(f"convexo: inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except ConvexoError as exc:
        print(f"convexo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(result, list):
        text = "".join(dumps(r) + "\n" for r in result)
    else:
        text = dumps(result) + "\n"
    _emit(text, args.out)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
