"""Command-line front end: ``restricted-lie {verify,cohomology,classify,deform}``.

Exit codes: 0 success, 1 mathematical failure (a witness is printed),
2 input error (bad JSON, schema violation, unknown catalog name).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import catalog
from .algebra import (
    DEFAULT_MAX_SWEEP,
    LieAlgebra,
    RestrictedLieAlgebra,
    RestrictedModule,
    adjoint_module,
    trivial_module,
    verify_restricted,
)
from .gf import PrimeField, is_prime, row_basis

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class DocumentError(ValueError):
    """Schema violation; ``path`` is a JSON path such as ``$.brackets[2].coeffs``."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


# -- document schema ---------------------------------------------------------


def _int(obj, path: str, lo: int | None = None) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise DocumentError(path, f"expected an integer, got {type(obj).__name__}")
    if lo is not None and obj < lo:
        raise DocumentError(path, f"must be >= {lo}")
    return obj


def _get(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise DocumentError(path, "expected an object")
    if key not in obj:
        raise DocumentError(f"{path}.{key}", "missing required field")
    return obj[key]


def _array(obj, shape: tuple[int, ...], path: str, p: int) -> np.ndarray:
    """Nested integer lists of exactly ``shape``, reduced mod p."""
    if not shape:
        return np.int64(_int(obj, path) % p)
    if not isinstance(obj, list):
        raise DocumentError(path, f"expected a list of length {shape[0]}")
    if len(obj) != shape[0]:
        raise DocumentError(path, f"expected length {shape[0]}, got {len(obj)}")
    return np.array([_array(v, shape[1:], f"{path}[{i}]", p) for i, v in enumerate(obj)], dtype=np.int64).reshape(shape)


def _names(obj, dim: int, path: str, default_prefix: str) -> list[str]:
    if obj is None:
        return [f"{default_prefix}{i}" for i in range(dim)]
    if not isinstance(obj, list) or len(obj) != dim or not all(isinstance(s, str) for s in obj):
        raise DocumentError(path, f"expected {dim} strings")
    return list(obj)


def _sparse_in(entries, dim: int, p: int, path: str, skew: bool) -> np.ndarray:
    """``[{i, j, coeffs}]`` into a (dim, dim, dim) tensor; skew or symmetric completion."""
    if not isinstance(entries, list):
        raise DocumentError(path, "expected a list of {i, j, coeffs} entries")
    out = np.zeros((dim, dim, dim), dtype=np.int64)
    for k, e in enumerate(entries):
        ep = f"{path}[{k}]"
        i = _int(_get(e, "i", ep), f"{ep}.i", 0)
        j = _int(_get(e, "j", ep), f"{ep}.j", 0)
        for name, v in (("i", i), ("j", j)):
            if v >= dim:
                raise DocumentError(f"{ep}.{name}", f"index {v} out of range for dimension {dim}")
        if skew and i == j:
            raise DocumentError(ep, "a bracket entry needs i != j")
        vec = _array(_get(e, "coeffs", ep), (dim,), f"{ep}.coeffs", p)
        out[i, j] += vec
        if i != j:
            out[j, i] += -vec if skew else vec
    return out % p


def _sparse_out(t: np.ndarray, strict: bool) -> list[dict]:
    n = t.shape[0]
    out = []
    for i in range(n):
        for j in range(i + 1 if strict else i, n):
            if t[i, j].any():
                out.append({"i": i, "j": j, "coeffs": [int(v) for v in t[i, j]]})
    return out


@dataclass
class AlgebraDocument:
    """Parsed JSON input.  All arrays are reduced mod p; names are cosmetic."""

    p: int
    basis: list[str]
    brackets: np.ndarray
    pmap: np.ndarray
    module: dict | None = None
    rinehart: dict | None = None
    deformation: dict | None = None

    @property
    def dim(self) -> int:
        return len(self.basis)

    @classmethod
    def from_dict(cls, obj) -> "AlgebraDocument":
        if not isinstance(obj, dict):
            raise DocumentError("$", "expected a JSON object")
        p = _int(_get(obj, "p", "$"), "$.p", 2)
        if not is_prime(p):
            raise DocumentError("$.p", f"{p} is not prime")
        n = _int(_get(obj, "dim", "$"), "$.dim", 1)
        basis = _names(obj.get("basis"), n, "$.basis", "e")
        c = _sparse_in(obj.get("brackets", []), n, p, "$.brackets", skew=True)
        pmap = _array(obj.get("pmap", [[0] * n] * n), (n, n), "$.pmap", p)
        module = None
        if obj.get("module") is not None:
            mp = "$.module"
            md = _int(_get(obj["module"], "dim", mp), f"{mp}.dim", 1)
            module = {"dim": md, "rho": _array(_get(obj["module"], "rho", mp), (n, md, md), f"{mp}.rho", p)}
        rinehart = None
        if obj.get("rinehart") is not None:
            rp = "$.rinehart"
            alg = _get(obj["rinehart"], "algebra", rp)
            ap = f"{rp}.algebra"
            d = _int(_get(alg, "dim", ap), f"{ap}.dim", 1)
            unit = _int(alg.get("unit", 0), f"{ap}.unit", 0)
            if unit >= d:
                raise DocumentError(f"{ap}.unit", f"index {unit} out of range for dimension {d}")
            rinehart = {
                "algebra": {
                    "dim": d,
                    "unit": unit,
                    "basis": _names(alg.get("basis"), d, f"{ap}.basis", "a"),
                    "products": _sparse_in(_get(alg, "products", ap), d, p, f"{ap}.products", skew=False),
                },
                "action": _array(_get(obj["rinehart"], "action", rp), (d, n, n), f"{rp}.action", p),
                "anchor": _array(_get(obj["rinehart"], "anchor", rp), (n, d, d), f"{rp}.anchor", p),
            }
        deformation = None
        if obj.get("deformation") is not None:
            dp = "$.deformation"
            dobj = obj["deformation"]
            order = _int(_get(dobj, "order", dp), f"{dp}.order", 1)
            ms, ws, ss = dobj.get("m", []), dobj.get("omega", []), dobj.get("sigma", [])
            for key, val in (("m", ms), ("omega", ws)):
                if not isinstance(val, list) or len(val) != order:
                    raise DocumentError(f"{dp}.{key}", f"expected {order} entries, one per order")
            if not isinstance(ss, list) or len(ss) > order:
                raise DocumentError(f"{dp}.sigma", f"expected at most {order} entries")
            if ss and rinehart is None:
                raise DocumentError(f"{dp}.sigma", "symbol maps need a rinehart block")
            d = rinehart["algebra"]["dim"] if rinehart else 0
            deformation = {
                "order": order,
                "m": [_sparse_in(v, n, p, f"{dp}.m[{i}]", skew=True) for i, v in enumerate(ms)],
                "omega": [_array(v, (n, n), f"{dp}.omega[{i}]", p) for i, v in enumerate(ws)],
                "sigma": [_array(v, (n, d, d), f"{dp}.sigma[{i}]", p) for i, v in enumerate(ss)],
            }
        return cls(p, basis, c, pmap, module, rinehart, deformation)

    @classmethod
    def from_algebra(cls, R: RestrictedLieAlgebra) -> "AlgebraDocument":
        return cls(R.p, list(R.basis_names), np.array(R.lie.c), np.array(R.images))

    def to_dict(self) -> dict:
        out = {
            "p": self.p,
            "dim": self.dim,
            "basis": list(self.basis),
            "brackets": _sparse_out(self.brackets, strict=True),
            "pmap": self.pmap.tolist(),
        }
        if self.module is not None:
            out["module"] = {"dim": self.module["dim"], "rho": self.module["rho"].tolist()}
        if self.rinehart is not None:
            alg = self.rinehart["algebra"]
            out["rinehart"] = {
                "algebra": {
                    "dim": alg["dim"],
                    "unit": alg["unit"],
                    "basis": list(alg["basis"]),
                    "products": _sparse_out(alg["products"], strict=False),
                },
                "action": self.rinehart["action"].tolist(),
                "anchor": self.rinehart["anchor"].tolist(),
            }
        if self.deformation is not None:
            dfm = self.deformation
            out["deformation"] = {
                "order": dfm["order"],
                "m": [_sparse_out(t, strict=True) for t in dfm["m"]],
                "omega": [w.tolist() for w in dfm["omega"]],
                "sigma": [s.tolist() for s in dfm["sigma"]],
            }
        return out

    # builders; none of them check axioms
    def field(self) -> PrimeField:
        return PrimeField(self.p)

    def lie(self) -> LieAlgebra:
        return LieAlgebra(self.field(), self.brackets, self.basis, check=False)

    def restricted(self) -> RestrictedLieAlgebra:
        return RestrictedLieAlgebra(self.lie(), self.pmap, check=False)


def load_document(path: str) -> AlgebraDocument:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DocumentError("$", f"cannot read {path}: {exc.strerror}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("$", f"invalid JSON: {exc.msg} at line {exc.lineno}") from exc
    return AlgebraDocument.from_dict(obj)


def _target(spec: str) -> tuple[AlgebraDocument, dict]:
    """A document path or a catalog name such as ``heisenberg:p=3:theta=z*``."""
    if Path(spec).is_file():
        doc = load_document(spec)
        return doc, {"file": spec}
    try:
        R = catalog.by_name(spec)
    except ValueError as exc:
        raise DocumentError("$", f"{spec!r} is neither a readable file nor a catalog name: {exc}") from exc
    return AlgebraDocument.from_algebra(R), {"catalog": spec}


# -- commands ------------------------------------------------------------------


@dataclass
class Outcome:
    code: int
    results: dict
    witnesses: list[str]
    lines: list[str]


def _check_algebra(doc: AlgebraDocument) -> tuple[RestrictedLieAlgebra | None, dict, list[str]]:
    lie = doc.lie()
    problem = lie.structure_problem()
    res = {"lie": problem is None}
    if problem is not None:
        return None, res, [problem]
    report = verify_restricted(lie, doc.pmap)
    res["restricted"] = report.passed
    if not report.passed:
        return None, res, [f"ad(e_j)^p != ad(e_j^[p]) for basis indices {report.failures()}"]
    return RestrictedLieAlgebra(lie, doc.pmap), res, []


def _structure(doc: AlgebraDocument, R: RestrictedLieAlgebra):
    from .rinehart import AssociativeAlgebra, LieRinehartStructure

    alg = doc.rinehart["algebra"]
    A = AssociativeAlgebra(doc.field(), alg["products"], alg["unit"], alg["basis"], check=False)
    return A, LieRinehartStructure(A, R, doc.rinehart["action"], doc.rinehart["anchor"])


def _deformation(doc: AlgebraDocument, R: RestrictedLieAlgebra):
    from .deformation import TruncatedDeformation

    dfm = doc.deformation
    return TruncatedDeformation(R, dfm["m"], dfm["omega"])


def cmd_verify(doc: AlgebraDocument, args) -> Outcome:
    from .deformation import verify_deformation
    from .rinehart import verify_lie_rinehart

    R, res, wit = _check_algebra(doc)
    if R is not None and doc.module is not None:
        problem = RestrictedModule(R, doc.module["rho"], check=False).module_problem()
        res["module"] = problem is None
        if problem:
            wit.append(problem)
    if R is not None and doc.rinehart is not None:
        A, S = _structure(doc, R)
        problem = A.structure_problem()
        res["associative"] = problem is None
        if problem:
            wit.append(problem)
        else:
            report = verify_lie_rinehart(S, args.max_sweep, seed=args.seed)
            res["rinehart"] = {c.name: c.passed for c in report.checks}
            wit += [f"{c.name}: {c.witness}" for c in report.failures()]
    if R is not None and doc.deformation is not None:
        report = verify_deformation(_deformation(doc, R), args.max_sweep, seed=args.seed)
        res["deformation"] = report.passed
        if not report.passed:
            wit.append(report.first_failure().witness)
    flat = [v for v in res.values() if isinstance(v, bool)]
    flat += [v for v in res.get("rinehart", {}).values()]
    ok = all(flat)
    lines = [f"{k}: {_fmt(v)}" for k, v in res.items()] + [f"witness: {w}" for w in wit]
    lines.append("PASS" if ok else "FAIL")
    return Outcome(EXIT_OK if ok else EXIT_FAIL, res, wit, lines)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "pass" if v else "FAIL"
    if isinstance(v, dict):
        return ", ".join(f"{k}={_fmt(x)}" for k, x in v.items())
    return str(v)


def _module_for(doc: AlgebraDocument, R: RestrictedLieAlgebra, kind: str):
    if kind == "adjoint":
        return adjoint_module(R)
    if kind == "trivial":
        return trivial_module(R)
    if doc.module is None:
        raise DocumentError("$.module", "--module document needs a module block")
    return RestrictedModule(R, doc.module["rho"])


def cmd_cohomology(doc: AlgebraDocument, args) -> Outcome:
    from .cohomology_ce import ce_cocycles, ce_cohomology_dim, ce_matrix

    R, res, wit = _check_algebra(doc)
    if R is None:
        return Outcome(EXIT_FAIL, res, wit, [f"witness: {w}" for w in wit] + ["FAIL"])
    M = _module_for(doc, R, args.module)
    p, k = R.p, args.degree
    if args.flavor == "ce":
        if k < 0:
            raise DocumentError("$", "degree must be non-negative")
        dim = ce_cohomology_dim(M, k)
        Z = ce_cocycles(M, k) if k <= R.dim else np.zeros((0, 0), dtype=np.int64)
        B = row_basis(ce_matrix(M, k - 1).T, p) if k >= 1 else np.zeros((0, Z.shape[1] if Z.size else 0), dtype=np.int64)
        oracle = None
    elif args.flavor == "restricted":
        from .cohomology_restricted import d_star_1_matrix, h1_star_dim, h2_star
        from .gf import nullspace

        if p == 2:
            raise DocumentError("$.p", "the restricted flavor needs p > 2; use char2")
        if k == 1:
            dim = h1_star_dim(M)
            Z = nullspace(d_star_1_matrix(M), p)
            B = row_basis(ce_matrix(M, 0).T, p)
            oracle = None
        elif k == 2:
            H = h2_star(R, M, args.max_sweep)
            dim, Z, B, oracle = H.dim, H.cocycles, H.coboundaries, H.oracle_checked
        else:
            raise DocumentError("$", "the restricted flavor is provided in degrees 1 and 2")
    else:
        from .cohomology_char2 import h_n_star2

        if p != 2:
            raise DocumentError("$.p", "the char2 flavor needs p = 2")
        if not 0 <= k <= 4:
            raise DocumentError("$", "the char2 flavor is provided in degrees 0 to 4")
        H = h_n_star2(R, M, k)
        dim, Z, B, oracle = H.dim, H.cocycles, H.coboundaries, H.oracle_checked
    res.update({
        "flavor": args.flavor,
        "degree": k,
        "module": args.module,
        "dim": int(dim),
        "cocycles": np.asarray(Z).tolist(),
        "coboundaries": np.asarray(B).tolist(),
        "oracle_checked": oracle,
    })
    lines = [
        f"H^{k} ({args.flavor}, {args.module} module): dim {dim}",
        f"cocycles: {len(Z)}  coboundaries: {len(B)}",
    ]
    return Outcome(EXIT_OK, res, wit, lines)


def cmd_classify(p: int) -> Outcome:
    if p not in (2, 3, 5, 7):
        raise DocumentError("$.p", "classification is provided for p in {2, 3, 5, 7}")
    classes = catalog.classify_heisenberg(p)
    table = [{"representative": c.name, "theta": list(c.representative), "size": len(c.members)} for c in classes]
    lines = [f"{len(classes)} classes over GF({p})"] + [f"  {t['representative']:>8}  {t['size']} forms" for t in table]
    return Outcome(EXIT_OK, {"p": p, "count": len(classes), "classes": table}, [], lines)


def cmd_deform(doc: AlgebraDocument, args) -> Outcome:
    from .deformation import find_extension, infinitesimal_cocycle_check, obstruction, verify_deformation

    if doc.deformation is None:
        raise DocumentError("$.deformation", "missing required field")
    R, res, wit = _check_algebra(doc)
    if R is None:
        return Outcome(EXIT_FAIL, res, wit, [f"witness: {w}" for w in wit] + ["FAIL"])
    D = _deformation(doc, R)
    report = verify_deformation(D, args.max_sweep, seed=args.seed)
    res["deformation"] = report.passed
    if not report.passed:
        wit.append(report.first_failure().witness)
        return Outcome(EXIT_FAIL, res, wit, ["deformation: FAIL", f"witness: {wit[-1]}"])
    lines = ["deformation: pass"]
    code = EXIT_OK
    if args.action == "class":
        info = infinitesimal_cocycle_check(D, args.max_sweep)
        res["infinitesimal_cocycle"] = info.is_cocycle
        res["class_trivial"] = info.class_is_trivial
        lines += [f"infinitesimal is a cocycle: {info.is_cocycle}", f"class is trivial: {info.class_is_trivial}"]
        if not info.is_cocycle:
            code = EXIT_FAIL
            wit.append("infinitesimal is not a restricted 2-cocycle")
        if doc.rinehart is not None:
            from .rinehart import verify_lr_deformation

            _, S = _structure(doc, R)
            lr = verify_lr_deformation(S, D, doc.deformation["sigma"], args.max_sweep, seed=args.seed)
            res["rinehart_classification"] = lr.classification
            lines.append(f"Lie-Rinehart deformation: {lr.classification}")
            wit += [o.witness for o in lr.orders if o.witness]
            if lr.classification == "invalid":
                code = EXIT_FAIL
    elif args.action == "obstruct":
        obs = obstruction(D, max_sweep=args.max_sweep)
        res["vanishes"] = obs.vanishes()
        res["obs1"] = [[*map(int, i), int(obs.obs1[tuple(i)])] for i in np.argwhere(obs.obs1)]
        res["obs2"] = [[*map(int, i), int(obs.obs2[tuple(i)])] for i in np.argwhere(obs.obs2)]
        lines.append(f"obstructions at order {obs.order} vanish: {obs.vanishes()}")
    elif args.action == "extend":
        ext = find_extension(D, args.max_sweep)
        res["extends"] = ext is not None
        if ext is None:
            code = EXIT_FAIL
            wit.append("the obstruction is not a coboundary")
            lines.append("no extension to the next order")
        else:
            m_next, w_next = ext.candidate
            res["next"] = {"m": _sparse_out(m_next, strict=True), "omega": np.asarray(w_next).tolist()}
            lines.append(f"extends to order {D.order + 1}; verified: {ext.verified}")
    return Outcome(code, res, wit, lines)


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a machine-readable report")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled sweeps")
    common.add_argument("--max-sweep", type=int, default=DEFAULT_MAX_SWEEP, help="exhaustive-check threshold")
    ap = argparse.ArgumentParser(prog="restricted-lie", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="check every axiom in a document")
    v.add_argument("file")
    c = sub.add_parser("cohomology", parents=[common], help="cohomology dimension and bases")
    c.add_argument("target", help="document path or catalog name")
    c.add_argument("--flavor", choices=["ce", "restricted", "char2"], default="restricted")
    c.add_argument("--degree", type=int, default=2)
    c.add_argument("--module", choices=["adjoint", "trivial", "document"], default="adjoint")
    k = sub.add_parser("classify", parents=[common], help="restricted Heisenberg classes over GF(p)")
    k.add_argument("p", type=int)
    d = sub.add_parser("deform", parents=[common], help="deformation checks")
    d.add_argument("file")
    d.add_argument("action", choices=["verify", "class", "obstruct", "extend"])
    return ap


def _inputs(args, doc: AlgebraDocument | None, source: dict) -> dict:
    out = dict(source)
    if doc is not None:
        out["document"] = doc.to_dict()
    for key in ("flavor", "degree", "module", "action", "p"):
        if key in vars(args) and not (key == "p" and args.command != "classify"):
            out[key] = getattr(args, key)
    return out


def run(argv=None) -> tuple[int, dict]:
    """Run a command; returns the exit code and the JSON report."""
    args = build_parser().parse_args(argv)
    doc, source = None, {}
    try:
        if args.command == "classify":
            outcome = cmd_classify(args.p)
        elif args.command == "cohomology":
            doc, source = _target(args.target)
            outcome = cmd_cohomology(doc, args)
        else:
            doc = load_document(args.file)
            source = {"file": args.file}
            outcome = cmd_verify(doc, args) if args.command == "verify" else cmd_deform(doc, args)
    except DocumentError as exc:
        report = {"command": args.command, "inputs": _inputs(args, doc, source),
                  "error": {"path": exc.path, "message": str(exc)}, "exit_code": EXIT_INPUT}
        return EXIT_INPUT, report | {"_lines": [f"input error: {exc}"]}
    report = {
        "command": args.command,
        "inputs": _inputs(args, doc, source),
        "results": outcome.results,
        "witnesses": outcome.witnesses,
        "exit_code": outcome.code,
    }
    return outcome.code, report | {"_lines": outcome.lines}


def main(argv=None) -> int:
    args_json = "--json" in (sys.argv[1:] if argv is None else argv)
    code, report = run(argv)
    lines = report.pop("_lines")
    if args_json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print("\n".join(lines), file=sys.stderr if code == EXIT_INPUT else sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
