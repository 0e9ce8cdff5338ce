"""Problem and report files (schema version "1").

Both are JSON with a strict schema: unknown fields are rejected and every
validation error names the offending field. Complex scalars are stored as
``[re, im]`` pairs; floats use Python's shortest round-trip decimal form,
so files re-read losslessly. Reports are written atomically (temp file +
rename) and carry a digest of the input file they were computed from.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from . import __version__
from .algebra import AlgebraElement, AlgebraSignature, SubspaceBasis
from .errors import CstarApproxError, ProblemFormatError
from .infinite import (
    ConstantWeights,
    ExplicitWeights,
    GeometricWeights,
    TailOperator,
)
from .solver import DistanceReport, DualCertificate, SolveOptions

SCHEMA_VERSION = "1"

_OPTION_FIELDS = {"tol", "max_iter", "penalty", "seed", "restarts"}


@dataclass
class Problem:
    """Parsed and validated problem file."""

    schema_version: str
    norm: str
    options: SolveOptions
    signature: AlgebraSignature | None = None
    x: AlgebraElement | None = None
    basis: SubspaceBasis | None = None
    tail_x: TailOperator | None = None
    tail_basis: list | None = None
    truncation_n: int | None = None

    @property
    def is_tail(self) -> bool:
        return self.tail_x is not None


def _fail(field, message):
    raise ProblemFormatError(field, message)


def _check_keys(d, allowed, path):
    if not isinstance(d, dict):
        _fail(path, "expected an object")
    for key in d:
        if key not in allowed:
            _fail(f"{path}.{key}", "unknown field")


def _complex_in(v, field):
    if (
        not isinstance(v, (list, tuple))
        or len(v) != 2
        or not all(isinstance(t, (int, float)) for t in v)
    ):
        _fail(field, "expected a [re, im] pair")
    return complex(v[0], v[1])


def _complex_out(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _block_in(entries, n, field):
    if not isinstance(entries, list) or len(entries) != n * n:
        _fail(field, f"expected {n * n} row-major [re, im] entries")
    vals = [_complex_in(e, f"{field}[{i}]") for i, e in enumerate(entries)]
    return np.array(vals, dtype=np.complex128).reshape(n, n)


def _element_in(blocks, signature, field):
    if not isinstance(blocks, list) or len(blocks) != signature.num_blocks:
        _fail(field, f"expected {signature.num_blocks} blocks")
    mats = [
        _block_in(b, n, f"{field}[{i}]")
        for i, (b, n) in enumerate(zip(blocks, signature.block_dims))
    ]
    try:
        return AlgebraElement(signature, mats)
    except (ValueError, CstarApproxError) as exc:
        _fail(field, str(exc))


def _element_out(el: AlgebraElement) -> list:
    return [[_complex_out(z) for z in b.ravel()] for b in el.blocks]


def _matrix_out(m: np.ndarray) -> list:
    return [_complex_out(z) for z in np.asarray(m).ravel()]


def _weights_in(d, field):
    _check_keys(d, {"rule", "value", "first", "ratio", "values", "tail_value"}, field)
    rule = d.get("rule")
    try:
        if rule == "constant":
            _check_keys(d, {"rule", "value"}, field)
            return ConstantWeights(_complex_in(d["value"], f"{field}.value"))
        if rule == "geometric":
            _check_keys(d, {"rule", "first", "ratio"}, field)
            return GeometricWeights(
                _complex_in(d["first"], f"{field}.first"), float(d["ratio"])
            )
        if rule == "explicit":
            _check_keys(d, {"rule", "values", "tail_value"}, field)
            values = tuple(
                _complex_in(v, f"{field}.values[{i}]")
                for i, v in enumerate(d.get("values", []))
            )
            tail = _complex_in(d.get("tail_value", [0.0, 0.0]), f"{field}.tail_value")
            return ExplicitWeights(values=values, tail_value=tail)
    except KeyError as exc:
        _fail(f"{field}.{exc.args[0]}", "missing field")
    except ValueError as exc:
        _fail(field, str(exc))
    _fail(f"{field}.rule", "must be constant, geometric, or explicit")


def _weights_out(w) -> dict:
    if isinstance(w, ConstantWeights):
        return {"rule": "constant", "value": _complex_out(w.value)}
    if isinstance(w, GeometricWeights):
        return {"rule": "geometric", "first": _complex_out(w.first), "ratio": w.ratio}
    if isinstance(w, ExplicitWeights):
        return {
            "rule": "explicit",
            "values": [_complex_out(v) for v in w.values],
            "tail_value": _complex_out(w.tail_value),
        }
    raise ValueError("weight rule is not serializable")


def _tail_operator_in(d, field):
    _check_keys(d, {"head_dim", "head", "weights", "coupling"}, field)
    if "head_dim" not in d or not isinstance(d["head_dim"], int) or d["head_dim"] < 1:
        _fail(f"{field}.head_dim", "expected a positive integer")
    n = d["head_dim"]
    if "head" not in d:
        _fail(f"{field}.head", "missing field")
    head = _block_in(d["head"], n, f"{field}.head")
    if "weights" not in d:
        _fail(f"{field}.weights", "missing field")
    weights = _weights_in(d["weights"], f"{field}.weights")
    coupling = []
    for i, entry in enumerate(d.get("coupling", [])):
        if not isinstance(entry, list) or len(entry) != 3:
            _fail(f"{field}.coupling[{i}]", "expected [row, col, [re, im]]")
        r, c, v = entry
        if not isinstance(r, int) or not isinstance(c, int) or r < 0 or c < 0:
            _fail(f"{field}.coupling[{i}]", "row/col must be nonnegative integers")
        coupling.append((r, c, _complex_in(v, f"{field}.coupling[{i}][2]")))
    try:
        return TailOperator(head=head, weights=weights, coupling=tuple(coupling))
    except (ValueError, CstarApproxError) as exc:
        _fail(field, str(exc))


def _tail_operator_out(op: TailOperator) -> dict:
    return {
        "head_dim": op.head_dim,
        "head": _matrix_out(op.head),
        "weights": _weights_out(op.weights),
        "coupling": [[r, c, _complex_out(v)] for r, c, v in op.coupling],
    }


def _options_in(d) -> SolveOptions:
    if d is None:
        return SolveOptions()
    _check_keys(d, _OPTION_FIELDS, "options")
    for key in ("tol", "penalty"):
        if key in d and not isinstance(d[key], (int, float)):
            _fail(f"options.{key}", "expected a number")
    for key in ("max_iter", "seed", "restarts"):
        if key in d and not isinstance(d[key], int):
            _fail(f"options.{key}", "expected an integer")
    try:
        return SolveOptions(**d)
    except (TypeError, ValueError) as exc:
        _fail("options", str(exc))


def problem_from_dict(data: dict) -> Problem:
    _check_keys(
        data,
        {"schema_version", "norm", "signature", "x", "basis", "tail", "options"},
        "problem",
    )
    if data.get("schema_version") != SCHEMA_VERSION:
        _fail("schema_version", f'expected "{SCHEMA_VERSION}"')
    norm = data.get("norm")
    if norm not in ("operator", "trace"):
        _fail("norm", 'must be "operator" or "trace"')
    options = _options_in(data.get("options"))

    has_finite = any(k in data for k in ("signature", "x", "basis"))
    has_tail = "tail" in data
    if has_finite == has_tail:
        _fail("tail", "exactly one of tail or signature/x/basis must be given")

    if has_tail:
        tail = data["tail"]
        _check_keys(tail, {"x", "basis", "truncation_n"}, "tail")
        if "x" not in tail:
            _fail("tail.x", "missing field")
        tail_x = _tail_operator_in(tail["x"], "tail.x")
        tail_basis = None
        if "basis" in tail:
            entries = tail["basis"]
            if not isinstance(entries, list) or not entries:
                _fail("tail.basis", "expected a nonempty list")
            tail_basis = [
                _tail_operator_in(g, f"tail.basis[{i}]") for i, g in enumerate(entries)
            ]
        trunc = tail.get("truncation_n")
        if trunc is not None and (not isinstance(trunc, int) or trunc < 1):
            _fail("tail.truncation_n", "expected a positive integer")
        return Problem(
            schema_version=SCHEMA_VERSION, norm=norm, options=options,
            tail_x=tail_x, tail_basis=tail_basis, truncation_n=trunc,
        )

    for key in ("signature", "x", "basis"):
        if key not in data:
            _fail(key, "missing field")
    sig_raw = data["signature"]
    if (
        not isinstance(sig_raw, list)
        or not sig_raw
        or not all(isinstance(n, int) and n >= 1 for n in sig_raw)
    ):
        _fail("signature", "expected a nonempty list of positive integers")
    signature = AlgebraSignature(tuple(sig_raw))
    x = _element_in(data["x"], signature, "x")
    basis_raw = data["basis"]
    if not isinstance(basis_raw, list) or not basis_raw:
        _fail("basis", "expected a nonempty list of elements")
    elements = [
        _element_in(b, signature, f"basis[{i}]") for i, b in enumerate(basis_raw)
    ]
    try:
        basis = SubspaceBasis(signature, elements)
    except CstarApproxError as exc:
        _fail("basis", str(exc))
    return Problem(
        schema_version=SCHEMA_VERSION, norm=norm, options=options,
        signature=signature, x=x, basis=basis,
    )


def load_problem(path) -> Problem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        _fail("(file)", str(exc))
    except json.JSONDecodeError as exc:
        _fail("(file)", f"invalid JSON: {exc}")
    return problem_from_dict(data)


def input_digest(path) -> str:
    with open(path, "rb") as fh:
        return "sha256:" + hashlib.sha256(fh.read()).hexdigest()


# ---------------------------------------------------------------------------
# Reports


def certificate_payload(cert: DualCertificate | None):
    if cert is None:
        return None
    return {
        "witness": _element_out(cert.witness),
        "dual_norm": float(cert.dual_norm),
        "feasibility_residual": float(cert.feasibility_residual),
        "value": float(cert.value),
    }


def report_payload(
    report: DistanceReport, norm: str, digest: str,
    interval=None, truncation_n=None,
) -> dict:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "input_digest": digest,
        "norm": norm,
        "distance": float(report.primal_value),
        "best_coeffs": [_complex_out(c) for c in report.best_coeffs],
        "best_approx": _element_out(report.best_approx),
        "certificate": certificate_payload(report.certificate),
        "gap": float(report.gap),
        "iterations": int(report.iterations),
        "converged": bool(report.converged),
    }
    if interval is not None:
        payload["interval"] = {"lo": float(interval[0]), "hi": float(interval[1])}
    if truncation_n is not None:
        payload["truncation_n"] = int(truncation_n)
    return payload


def write_report(path, payload: dict):
    """Serialize deterministically and atomically (temp file + rename)."""
    text = json.dumps(payload, sort_keys=True, indent=2)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


_REPORT_FIELDS = {
    "schema_version", "tool_version", "input_digest", "norm", "distance",
    "best_coeffs", "best_approx", "certificate", "gap", "iterations",
    "converged", "interval", "truncation_n",
}


def load_report(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        _fail("(report)", str(exc))
    except json.JSONDecodeError as exc:
        _fail("(report)", f"invalid JSON: {exc}")
    _check_keys(data, _REPORT_FIELDS, "report")
    for key in ("schema_version", "input_digest", "norm", "distance", "converged"):
        if key not in data:
            _fail(f"report.{key}", "missing field")
    if data["schema_version"] != SCHEMA_VERSION:
        _fail("report.schema_version", f'expected "{SCHEMA_VERSION}"')
    return data


def witness_from_report(data: dict, signature: AlgebraSignature) -> DualCertificate | None:
    cert = data.get("certificate")
    if cert is None:
        return None
    fields = {"witness", "dual_norm", "feasibility_residual", "value"}
    _check_keys(cert, fields, "report.certificate")
    for key in fields:
        if key not in cert:
            _fail(f"report.certificate.{key}", "missing field")
    witness = _element_in(cert["witness"], signature, "report.certificate.witness")
    return DualCertificate(
        witness=witness, kind=data["norm"],
        feasibility_residual=float(cert["feasibility_residual"]),
        dual_norm=float(cert["dual_norm"]), value=float(cert["value"]),
    )
