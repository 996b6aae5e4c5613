"""Report assembly for the service and CLI.

Every command produces a (report dict, exit code) pair. Exit codes: 0 pass,
1 verification/condition failure, 2 invalid input, 3 search budget
exhausted. Reports are machine-readable with stable field ordering; floats
are rounded to 12 significant digits so identical inputs give identical
bytes.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from .constructions import (
    check_fast_conditions,
    diagonalize_controlled,
    coefficient_search,
    convert_to_double_group,
)
from .linalg import kak_invariants, operator_schmidt_rank
from .protocols import (
    BranchTranscript,
    ControlledUnitarySpec,
    DoubleGroupSpec,
    InvalidSpec,
    ProtocolViolation,
    entanglement_cost,
    simulate_fast_controlled,
    simulate_fast_double,
    simulate_slow_controlled,
    simulate_slow_double,
    target_unitary,
)
from .serialization import spec_to_dict, vector_to_json

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_BUDGET = 3


def fnum(x: float) -> float:
    """Round to 12 significant digits for byte-stable reports."""
    if not np.isfinite(x):
        return float(x)
    return float(f"{float(x):.12g}")


def cnum(z: complex) -> List[float]:
    return [fnum(np.real(z)), fnum(np.imag(z))]


def _product_basis(d: int):
    eye = np.eye(d, dtype=complex)
    return [eye[i] for i in range(d)]


def _inputs(spec, mode: str, seed: Optional[int]):
    d = spec.d_A * spec.d_B
    if mode == "basis":
        return _product_basis(d), None
    if mode.startswith("random:"):
        try:
            count = int(mode.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad inputs mode {mode!r}")
        used_seed = seed if seed is not None else 0
        rng = np.random.default_rng(used_seed)
        states = []
        for _ in range(count):
            v = rng.normal(size=d) + 1j * rng.normal(size=d)
            states.append(v / np.linalg.norm(v))
        return states, used_seed
    raise ValueError(f"bad inputs mode {mode!r}; use 'basis' or 'random:K'")


def _branch_summary(transcripts: List[BranchTranscript], elide: bool = True) -> list:
    out = []
    for t in transcripts:
        entry = {
            "l": t.l,
            "m": t.m,
            "probability": fnum(t.probability),
            "phase": fnum(t.phase),
            "correction": t.correction,
        }
        if not elide:
            entry["state"] = [cnum(z) for z in t.state]
        out.append(entry)
    return out


def verify_report(
    spec, tol: float = 1e-9, inputs: str = "basis", seed: Optional[int] = None
) -> Tuple[dict, int]:
    report = {"command": "verify", "tol": fnum(tol), "inputs": inputs}
    try:
        target = target_unitary(spec, tol)
    except InvalidSpec as exc:
        report["error"] = str(exc)
        return report, EXIT_INVALID
    if isinstance(spec, DoubleGroupSpec) and spec.tc is None:
        report["error"] = "double-group fixture has no TC pair; cannot simulate"
        return report, EXIT_INVALID

    try:
        states, used_seed = _inputs(spec, inputs, seed)
    except ValueError as exc:
        report["error"] = str(exc)
        return report, EXIT_INVALID
    if used_seed is not None:
        report["seed"] = used_seed

    fast = simulate_fast_controlled if isinstance(spec, ControlledUnitarySpec) else simulate_fast_double
    slow = simulate_slow_controlled if isinstance(spec, ControlledUnitarySpec) else simulate_slow_double

    runs = []
    ok = True
    first_transcripts = None
    for idx, psi in enumerate(states):
        entry = {"input": idx}
        try:
            tf = fast(spec, psi, tol=tol)
            ts = slow(spec, psi, tol=tol)
        except ProtocolViolation as exc:
            entry["violation"] = {"l": exc.l, "m": exc.m, "message": str(exc)}
            ok = False
            runs.append(entry)
            continue
        entry["fast_probability_sum"] = fnum(sum(t.probability for t in tf))
        entry["slow_probability_sum"] = fnum(sum(t.probability for t in ts))
        if first_transcripts is None:
            first_transcripts = tf
        runs.append(entry)
    report["kind"] = "controlled" if isinstance(spec, ControlledUnitarySpec) else "double-group"
    report["dims"] = {"d_A": spec.d_A, "d_B": spec.d_B}
    report["entanglement_cost_ebits"] = fnum(entanglement_cost(spec))
    report["inputs_checked"] = len(states)
    report["branches"] = _branch_summary(first_transcripts) if first_transcripts else []
    report["verdict"] = "pass" if ok else "fail"
    return report, EXIT_PASS if ok else EXIT_FAIL


def check_report(spec, tol: float = 1e-9) -> Tuple[dict, int]:
    report = {"command": "check", "tol": fnum(tol)}
    if isinstance(spec, ControlledUnitarySpec):
        report["error"] = "condition checking applies to double-group fixtures"
        return report, EXIT_INVALID
    cond = check_fast_conditions(spec.group, spec.factor, spec.coeffs, tol)
    report["conditions"] = {
        "equal_magnitude": cond.equal_magnitude,
        "c_unitary": cond.c_unitary,
        "rows_form_group": cond.rows_group is not None,
    }
    if cond.rows_group is not None:
        report["row_group_order"] = cond.rows_group.order
    report["diagnostics"] = cond.diagnostics
    report["verdict"] = "pass" if cond.passed else "fail"
    return report, EXIT_PASS if cond.passed else EXIT_FAIL


def search_report(
    spec, budget: int = 10_000_000, classify: bool = True, tol: float = 1e-9
) -> Tuple[dict, int]:
    report = {"command": "search", "budget": budget, "classify": classify, "tol": fnum(tol)}
    if isinstance(spec, ControlledUnitarySpec):
        report["error"] = "search needs a double-group fixture carrying the representation"
        return report, EXIT_INVALID
    try:
        result = coefficient_search(
            spec.group, spec.u_ops, spec.v_ops, spec.factor,
            budget=budget, tol=tol, classify=classify,
        )
    except ValueError as exc:
        report["error"] = str(exc)
        return report, EXIT_INVALID
    hits = []
    for h in result.hits:
        entry = {
            "k": list(h.kvec),
            "coeffs": vector_to_json(np.round(h.coeffs, 14)),
            "target_unitary": h.target_unitary_ok,
            "product": h.is_product,
        }
        if h.kak is not None:
            entry["kak"] = [fnum(x) for x in h.kak.as_tuple()]
        hits.append(entry)
    report["examined"] = result.examined
    report["survivors"] = hits
    if classify:
        classes = {}
        for h in result.hits:
            key = (
                "product"
                if h.is_product
                else (tuple(fnum(x) for x in h.kak.as_tuple()) if h.kak else "unclassified")
            )
            classes.setdefault(key, 0)
            classes[key] += 1
        report["classes"] = [
            {"class": list(k) if isinstance(k, tuple) else k, "count": v}
            for k, v in sorted(classes.items(), key=lambda kv: str(kv[0]))
        ]
    report["truncated"] = result.truncated
    return report, EXIT_BUDGET if result.truncated else EXIT_PASS


def convert_report(spec, tol: float = 1e-9) -> Tuple[dict, int]:
    report = {"command": "convert", "tol": fnum(tol)}
    if not isinstance(spec, ControlledUnitarySpec):
        report["error"] = "conversion applies to controlled fixtures"
        return report, EXIT_INVALID
    try:
        diag = all(
            np.max(np.abs(v - np.diag(np.diag(v)))) <= 1e-9 for v in spec.unitaries
        )
        basis_changed = False
        if not diag:
            spec, _ = diagonalize_controlled(spec)
            basis_changed = True
        conv = convert_to_double_group(spec, tol)
    except (InvalidSpec, ValueError) as exc:
        report["error"] = str(exc)
        return report, EXIT_FAIL
    report["basis_changed"] = basis_changed
    report["residual"] = fnum(conv.residual)
    report["labels"] = [int(q) for q in conv.labels]
    report["coeffs"] = vector_to_json(np.round(conv.coeffs, 14))
    report["fixture"] = spec_to_dict(conv.double_spec)
    sub_report, sub_code = verify_report(conv.double_spec, tol=tol, inputs="basis")
    report["verify"] = {"verdict": sub_report["verdict"]}
    ok = sub_code == EXIT_PASS and conv.residual <= max(tol, 1e-9)
    report["verdict"] = "pass" if ok else "fail"
    return report, EXIT_PASS if ok else EXIT_FAIL


def analytics_report(
    spec, kak: bool = True, schmidt: bool = True, cost: bool = True, tol: float = 1e-9
) -> Tuple[dict, int]:
    report = {"command": "report", "tol": fnum(tol)}
    try:
        u = target_unitary(spec, tol)
    except InvalidSpec as exc:
        report["error"] = str(exc)
        return report, EXIT_INVALID
    report["dims"] = {"d_A": spec.d_A, "d_B": spec.d_B}
    if kak:
        if u.shape == (4, 4):
            report["kak"] = [fnum(x) for x in kak_invariants(u).as_tuple()]
        else:
            report["kak"] = None
    if schmidt:
        report["schmidt_rank"] = operator_schmidt_rank(u, spec.d_A, spec.d_B, max(tol, 1e-9))
    if cost:
        report["entanglement_cost_ebits"] = fnum(entanglement_cost(spec))
    return report, EXIT_PASS
