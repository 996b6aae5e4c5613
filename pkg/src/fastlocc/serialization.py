"""JSON fixture format.

A fixture is a JSON object with ``kind`` either "controlled" or
"double-group". Complex numbers are [re, im] pairs; matrices are nested
lists of such pairs. Group descriptors are tagged unions:
``{"abelian": [r1, ...]}``, ``{"dihedral": n}`` or ``{"table": [[...]]}``.

Controlled fixtures: group (abelian only), subset, unitaries, optional
projectors. Double-group fixtures: group, u_ops, v_ops, coeffs (optional,
for search inputs), optional factor (derived from the representation when
absent), optional tc {"T": ..., "C": ...}.
"""

from __future__ import annotations

import json
from typing import List, Union

import numpy as np

from .groups import (
    AbelianCycleStructure,
    FactorSystem,
    FiniteGroupTable,
    dihedral_group,
    factor_system_from_rep,
)
from .hadamard import TCPair
from .protocols import ControlledUnitarySpec, DoubleGroupSpec

AnySpec = Union[ControlledUnitarySpec, DoubleGroupSpec]


class FixtureError(ValueError):
    """Fixture parse/validation failure, carrying the offending field path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def complex_to_pair(z: complex) -> List[float]:
    return [float(np.real(z)), float(np.imag(z))]


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[complex_to_pair(z) for z in row] for row in m]


def vector_to_json(v: np.ndarray) -> list:
    return [complex_to_pair(z) for z in np.asarray(v, dtype=complex)]


def _pair_to_complex(p, field: str) -> complex:
    if not (isinstance(p, (list, tuple)) and len(p) == 2):
        raise FixtureError(field, f"expected a [re, im] pair, got {p!r}")
    try:
        return complex(float(p[0]), float(p[1]))
    except (TypeError, ValueError):
        raise FixtureError(field, f"non-numeric entries in {p!r}")


def json_to_matrix(rows, field: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise FixtureError(field, "expected a nonempty list of rows")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise FixtureError(f"{field}[{i}]", "expected a list of [re, im] pairs")
        out.append([_pair_to_complex(p, f"{field}[{i}][{j}]") for j, p in enumerate(row)])
    widths = {len(r) for r in out}
    if len(widths) != 1:
        raise FixtureError(field, "ragged rows")
    return np.array(out, dtype=complex)


def json_to_vector(pairs, field: str) -> np.ndarray:
    if not isinstance(pairs, list) or not pairs:
        raise FixtureError(field, "expected a nonempty list of [re, im] pairs")
    return np.array(
        [_pair_to_complex(p, f"{field}[{i}]") for i, p in enumerate(pairs)], dtype=complex
    )


def group_from_descriptor(desc, field: str = "group") -> FiniteGroupTable:
    if not isinstance(desc, dict) or len(desc) != 1:
        raise FixtureError(field, "expected a single-key descriptor (abelian|dihedral|table)")
    (tag, value), = desc.items()
    if tag == "abelian":
        try:
            return AbelianCycleStructure(tuple(int(r) for r in value)).group_table()
        except (TypeError, ValueError) as exc:
            raise FixtureError(field, str(exc))
    if tag == "dihedral":
        try:
            return dihedral_group(int(value))
        except (TypeError, ValueError) as exc:
            raise FixtureError(field, str(exc))
    if tag == "table":
        try:
            return FiniteGroupTable.from_mult(value)
        except (TypeError, ValueError) as exc:
            raise FixtureError(field, str(exc))
    raise FixtureError(field, f"unknown group descriptor tag {tag!r}")


def spec_to_dict(spec: AnySpec) -> dict:
    if isinstance(spec, ControlledUnitarySpec):
        out = {
            "kind": "controlled",
            "group": {"abelian": list(spec.cycles.cycles)},
            "subset": list(spec.subset),
            "unitaries": [matrix_to_json(v) for v in spec.unitaries],
        }
        if spec.projectors is not None:
            out["projectors"] = [matrix_to_json(p) for p in spec.projectors]
        return out
    if isinstance(spec, DoubleGroupSpec):
        out = {
            "kind": "double-group",
            "group": {"table": spec.group.mult.tolist()},
            "u_ops": [matrix_to_json(m) for m in spec.u_ops],
            "v_ops": [matrix_to_json(m) for m in spec.v_ops],
            "coeffs": vector_to_json(spec.coeffs),
            "factor": matrix_to_json(spec.factor.table),
        }
        if spec.tc is not None:
            out["tc"] = {"T": matrix_to_json(spec.tc.T), "C": matrix_to_json(spec.tc.C)}
        return out
    raise TypeError(f"unsupported spec type {type(spec)!r}")


def _controlled_from_dict(d: dict) -> ControlledUnitarySpec:
    desc = d.get("group")
    if not isinstance(desc, dict) or "abelian" not in desc:
        raise FixtureError("group", "controlled fixtures need an {\"abelian\": [...]} group")
    try:
        cycles = AbelianCycleStructure(tuple(int(r) for r in desc["abelian"]))
    except (TypeError, ValueError) as exc:
        raise FixtureError("group.abelian", str(exc))
    if "subset" not in d or "unitaries" not in d:
        raise FixtureError("subset/unitaries", "required for controlled fixtures")
    subset = d["subset"]
    if not isinstance(subset, list) or not all(isinstance(k, int) for k in subset):
        raise FixtureError("subset", "expected a list of element indices")
    unitaries = [
        json_to_matrix(m, f"unitaries[{i}]") for i, m in enumerate(d["unitaries"])
    ]
    projectors = None
    if d.get("projectors") is not None:
        projectors = [
            json_to_matrix(m, f"projectors[{i}]") for i, m in enumerate(d["projectors"])
        ]
    try:
        spec = ControlledUnitarySpec(
            cycles=cycles, subset=tuple(subset), unitaries=unitaries, projectors=projectors
        )
        spec.validate()
    except ValueError as exc:
        raise FixtureError("(spec)", str(exc))
    return spec


def _double_from_dict(d: dict) -> DoubleGroupSpec:
    group = group_from_descriptor(d.get("group"))
    n = group.order
    for key in ("u_ops", "v_ops"):
        if key not in d or not isinstance(d[key], list):
            raise FixtureError(key, "required for double-group fixtures")
        if len(d[key]) != n:
            raise FixtureError(key, f"expected {n} matrices, got {len(d[key])}")
    u_ops = [json_to_matrix(m, f"u_ops[{i}]") for i, m in enumerate(d["u_ops"])]
    v_ops = [json_to_matrix(m, f"v_ops[{i}]") for i, m in enumerate(d["v_ops"])]
    if d.get("coeffs") is not None:
        coeffs = json_to_vector(d["coeffs"], "coeffs")
        if len(coeffs) != n:
            raise FixtureError("coeffs", f"expected {n} coefficients, got {len(coeffs)}")
    else:
        # search inputs carry no coefficients; a placeholder keeps the spec valid
        coeffs = np.zeros(n, dtype=complex)
        coeffs[group.identity] = 1.0
    if d.get("factor") is not None:
        table = json_to_matrix(d["factor"], "factor")
        if table.shape != (n, n):
            raise FixtureError("factor", f"expected an {n}x{n} table")
        factor = FactorSystem(table)
    else:
        try:
            factor = factor_system_from_rep(
                [np.kron(u, v) for u, v in zip(u_ops, v_ops)], group
            )
        except ValueError as exc:
            raise FixtureError("factor", f"cannot derive factor system: {exc}")
    tc = None
    if d.get("tc") is not None:
        tcd = d["tc"]
        if not isinstance(tcd, dict) or "T" not in tcd or "C" not in tcd:
            raise FixtureError("tc", "expected an object with T and C matrices")
        tc = TCPair(T=json_to_matrix(tcd["T"], "tc.T"), C=json_to_matrix(tcd["C"], "tc.C"))
    try:
        spec = DoubleGroupSpec(
            group=group, u_ops=u_ops, v_ops=v_ops, coeffs=coeffs, factor=factor, tc=tc
        )
        spec.validate()
    except ValueError as exc:
        raise FixtureError("(spec)", str(exc))
    return spec


def spec_from_dict(d: dict) -> AnySpec:
    if not isinstance(d, dict):
        raise FixtureError("(root)", "fixture must be a JSON object")
    kind = d.get("kind")
    if kind == "controlled":
        return _controlled_from_dict(d)
    if kind == "double-group":
        return _double_from_dict(d)
    raise FixtureError("kind", f"expected 'controlled' or 'double-group', got {kind!r}")


def load_fixture(path: str) -> AnySpec:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise FixtureError("(file)", str(exc))
    except json.JSONDecodeError as exc:
        raise FixtureError("(file)", f"invalid JSON at line {exc.lineno}, column {exc.colno}")
    return spec_from_dict(data)


def dump_fixture(spec: AnySpec, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")
