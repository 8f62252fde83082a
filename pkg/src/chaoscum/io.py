"""JSON formats for kernels and chaos expansions.

Kernel::

    {"q": 2, "dim": 3, "entries": [{"idx": [1, 2], "val": 0.5}, ...]}

``idx`` is a sorted list of 1-based indices; unlisted entries are zero.

Expansion::

    {"dim": 3, "constant": 0.0, "kernels": [{"q": 2, "tensor": <kernel>}, ...]}
"""
from __future__ import annotations

import json

from .chaos import ChaosExpansion
from .errors import KernelFormatError
from .symtensor import SymTensor

__all__ = ["kernel_from_json", "kernel_to_json", "expansion_from_json", "expansion_to_json", "load"]


def _int(obj, key, minimum):
    val = obj.get(key)
    if not isinstance(val, int) or isinstance(val, bool) or val < minimum:
        raise KernelFormatError(f"{key!r} must be an integer >= {minimum}, got {val!r}")
    return val


def kernel_from_json(obj):
    if not isinstance(obj, dict):
        raise KernelFormatError("kernel must be a JSON object")
    q = _int(obj, "q", 0)
    dim = _int(obj, "dim", 1)
    entries = obj.get("entries", [])
    if not isinstance(entries, list):
        raise KernelFormatError("'entries' must be a list")
    coeffs = {}
    for e in entries:
        try:
            idx, val = e["idx"], float(e["val"])
        except (TypeError, KeyError, ValueError) as exc:
            raise KernelFormatError(f"bad entry {e!r}") from exc
        if not isinstance(idx, list) or len(idx) != q or not all(isinstance(i, int) for i in idx):
            raise KernelFormatError(f"idx {idx!r} must be a list of {q} integers")
        if idx != sorted(idx):
            raise KernelFormatError(f"idx {idx} is not sorted")
        if any(not 1 <= i <= dim for i in idx):
            raise KernelFormatError(f"idx {idx} out of range 1..{dim}")
        key = tuple(i - 1 for i in idx)
        if key in coeffs:
            raise KernelFormatError(f"duplicate idx {idx}")
        coeffs[key] = val
    return SymTensor.from_dict(q, dim, coeffs)


def kernel_to_json(f):
    entries = [{"idx": [i + 1 for i in idx], "val": val} for idx, val in f.coeffs.items() if val != 0.0]
    return {"q": f.order, "dim": f.dim, "entries": entries}


def expansion_from_json(obj):
    if not isinstance(obj, dict):
        raise KernelFormatError("expansion must be a JSON object")
    dim = _int(obj, "dim", 1)
    try:
        constant = float(obj.get("constant", 0.0))
    except (TypeError, ValueError) as exc:
        raise KernelFormatError("'constant' must be a number") from exc
    kernels = {}
    for item in obj.get("kernels", []):
        if not isinstance(item, dict) or "tensor" not in item:
            raise KernelFormatError(f"bad kernel item {item!r}")
        q = _int(item, "q", 1)
        f = kernel_from_json(item["tensor"])
        if f.order != q or f.dim != dim:
            raise KernelFormatError(f"kernel for q={q} has order {f.order}, dim {f.dim}")
        if q in kernels:
            raise KernelFormatError(f"duplicate kernel order {q}")
        kernels[q] = f
    return ChaosExpansion(dim, constant, kernels)


def expansion_to_json(F):
    return {
        "dim": F.dim,
        "constant": F.constant,
        "kernels": [{"q": q, "tensor": kernel_to_json(f)} for q, f in F.kernels.items()],
    }


def load(path):
    """Read a kernel or expansion file; returns a SymTensor or a ChaosExpansion."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise KernelFormatError(f"cannot read {path}: {exc}") from exc
    if isinstance(obj, dict) and "kernels" in obj:
        return expansion_from_json(obj)
    return kernel_from_json(obj)
