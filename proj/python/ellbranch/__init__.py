"""Elliptic branch sets, structural checks and lattice Dirichlet solves."""

import csv
import io
import json

from . import _core
from ._core import PreconditionError, SolveFailure, eigenvalues

__all__ = [
    "PreconditionError",
    "SolveFailure",
    "eigenvalues",
    "contains",
    "dual_contains",
    "distance_to",
    "cone_test",
    "hausdorff",
    "verify_uusc",
    "falsify_classical",
    "check_conditions",
    "solve",
    "convergence_study",
    "load_toml",
    "read_grid",
]


def _text(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def _set(obj):
    # bare names are shorthand for the two closed-form sets
    if obj in ("PSD", "DualPSD"):
        return json.dumps({"kind": "psd" if obj == "PSD" else "dual_psd"})
    return _text(obj)


def contains(set_spec, matrix):
    return _core.contains(_set(set_spec), matrix)


def dual_contains(set_spec, matrix, eps=1e-6):
    return _core.dual_contains(_set(set_spec), matrix, eps)


def distance_to(set_spec, matrix):
    return _core.distance_to(_set(set_spec), matrix)


def cone_test(set_spec, matrix):
    return json.loads(_core.cone_test(_set(set_spec), matrix))


def hausdorff(first, second, sampler=None):
    return _core.hausdorff(_set(first), _set(second), _text(sampler or {}))


def verify_uusc(map_spec, eps, sampler=None):
    return json.loads(_core.verify_uusc(_text(map_spec), eps, _text(sampler or {})))


def falsify_classical(radii):
    return json.loads(_core.falsify_classical(list(radii)))


def check_conditions(problem):
    return json.loads(_core.check_conditions(_text(problem)))


def read_grid(text):
    """Rows of a grid CSV as (point, mask, value) tuples."""
    rows = []
    for rec in csv.reader(io.StringIO(text)):
        if not rec or rec[0].startswith("x"):
            continue
        *coords, mask, value = rec
        rows.append((tuple(float(c) for c in coords), mask, float(value)))
    return rows


def solve(problem):
    out = json.loads(_core.solve(_text(problem)))
    out["solution"] = read_grid(out.pop("solution_csv"))
    out["initial"] = read_grid(out.pop("initial_csv"))
    return out


def convergence_study(problem, ladder):
    return json.loads(_core.convergence_study(_text(problem), list(ladder)))


def load_toml(path):
    with open(path, encoding="utf-8") as fh:
        return json.loads(_core.toml_to_json(fh.read()))
