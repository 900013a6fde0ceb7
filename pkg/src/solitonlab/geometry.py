"""Curvature of compact homogeneous spaces from structure-constant data.

A principal orbit is described by the dimensions ``d_i`` of the summands of
its isotropy representation, the Killing coefficients ``b_i`` (defined by
``B|p_i = -b_i * b|p_i`` for the Killing form B and the chosen biinvariant
product b) and the totally symmetric, nonnegative structure constants
``[ijk]``.  A diagonal invariant metric is a positive scale vector x, and
scalar curvature / Ricci eigenvalues are closed-form rational expressions
in (d, b, [ijk], x).

The closed forms here are validated against a brute-force basis-level
computation in :mod:`solitonlab.lie_bases`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "IsotropyDecomposition",
    "ValidationReport",
    "scalar_curvature",
    "ricci_eigenvalues",
    "killing_curvature_bound",
    "validate",
    "load_decomposition",
    "decomposition_to_dict",
]


@dataclass(frozen=True)
class IsotropyDecomposition:
    """Structure-constant data of a homogeneous space with s summands.

    ``triples[i, j, k]`` stores the full symmetric tensor; ``c`` holds the
    optional Casimir constants (None when unknown -- the soliton systems
    never need them).  ``metadata`` records the normalization convention of
    the biinvariant product b, which the numbers silently depend on.
    """

    d: tuple[int, ...]
    b: tuple[float, ...]
    triples: np.ndarray
    c: tuple[float, ...] | None = None
    metadata: str = ""

    def __post_init__(self):
        t = np.asarray(self.triples, dtype=float)
        object.__setattr__(self, "triples", t)
        s = len(self.d)
        if t.shape != (s, s, s):
            raise ValueError(f"triples tensor must have shape {(s, s, s)}, got {t.shape}")
        if len(self.b) != s or (self.c is not None and len(self.c) != s):
            raise ValueError("d, b, c must have one entry per summand")

    @property
    def s(self) -> int:
        return len(self.d)


@dataclass
class ValidationReport:
    """Report-only result of :func:`validate`; never raised."""

    symmetry_violations: list[str] = field(default_factory=list)
    negativity_violations: list[str] = field(default_factory=list)
    wang_ziller_residuals: list[float] | None = None

    @property
    def ok(self) -> bool:
        if self.symmetry_violations or self.negativity_violations:
            return False
        if self.wang_ziller_residuals is not None:
            return all(abs(r) < 1e-10 for r in self.wang_ziller_residuals)
        return True


def _check_x(dec: IsotropyDecomposition, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dec.s,):
        raise ValueError(f"scaling vector has {x.size} entries, decomposition has {dec.s} summands")
    if np.any(x <= 0.0):
        raise ValueError("metric scalings must be strictly positive")
    return x


def scalar_curvature(dec: IsotropyDecomposition, x) -> float:
    """Scalar curvature of the diagonal metric ``x_1 b|p_1 + ... + x_s b|p_s``."""
    x = _check_x(dec, x)
    inv = 1.0 / x
    bracket = np.einsum("ijk,i,j,k->", dec.triples, inv, inv, x)
    linear = float(np.dot(np.asarray(dec.d, dtype=float) * np.asarray(dec.b), inv))
    return -0.25 * float(bracket) + 0.5 * linear


def ricci_eigenvalues(dec: IsotropyDecomposition, x) -> np.ndarray:
    """Per-summand eigenvalues of the Ricci endomorphism at scalings x."""
    x = _check_x(dec, x)
    inv = 1.0 / x
    d = np.asarray(dec.d, dtype=float)
    b = np.asarray(dec.b, dtype=float)
    # sum_{j,k} [ijk] x_k / (x_i x_j)  and  sum_{j,k} [ijk] x_i / (x_j x_k)
    mixed = inv * np.einsum("ijk,j,k->i", dec.triples, inv, x)
    plain = x * np.einsum("ijk,j,k->i", dec.triples, inv, inv)
    return 0.5 * b * inv - mixed / (2.0 * d) + plain / (4.0 * d)


def killing_curvature_bound(dec: IsotropyDecomposition, x) -> float:
    """Upper bound (1/2) sum d_i b_i / x_i on the scalar curvature.

    The bracket term of the scalar curvature is nonpositive, so this bound
    holds for every valid decomposition and scaling.
    """
    x = _check_x(dec, x)
    return 0.5 * float(np.dot(np.asarray(dec.d, float) * np.asarray(dec.b), 1.0 / x))


def validate(dec: IsotropyDecomposition, tol: float = 1e-12) -> ValidationReport:
    """Check symmetry and sign constraints plus the Wang-Ziller identity.

    The Wang-Ziller residual of summand i is
    ``sum_{j,k} [ijk] - d_i (b_i - 2 c_i)``; it is only computed when the
    Casimir constants are present.
    """
    report = ValidationReport()
    t = dec.triples
    s = dec.s
    for i in range(s):
        for j in range(s):
            for k in range(s):
                v = t[i, j, k]
                for perm in ((i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)):
                    if abs(t[perm] - v) > tol * (1.0 + abs(v)):
                        report.symmetry_violations.append(
                            f"[{i}{j}{k}]={v!r} != [{perm[0]}{perm[1]}{perm[2]}]={t[perm]!r}"
                        )
                if v < -tol:
                    report.negativity_violations.append(f"[{i}{j}{k}]={v!r} < 0")
    for i, bi in enumerate(dec.b):
        if bi < -tol:
            report.negativity_violations.append(f"b_{i}={bi!r} < 0")
    if dec.c is not None:
        report.wang_ziller_residuals = [
            float(np.sum(t[i])) - dec.d[i] * (dec.b[i] - 2.0 * dec.c[i]) for i in range(s)
        ]
    return report


def decomposition_to_dict(dec: IsotropyDecomposition) -> dict:
    """JSON-ready form storing one representative per unordered triple."""
    summands = []
    for i in range(dec.s):
        entry = {"dim": int(dec.d[i]), "b": float(dec.b[i])}
        entry["c"] = float(dec.c[i]) if dec.c is not None else None
        summands.append(entry)
    triples = []
    for i in range(dec.s):
        for j in range(i, dec.s):
            for k in range(j, dec.s):
                v = float(dec.triples[i, j, k])
                if v != 0.0:
                    triples.append({"i": i, "j": j, "k": k, "value": v})
    out = {"summands": summands, "triples": triples}
    if dec.metadata:
        out["metadata"] = dec.metadata
    return out


def load_decomposition(source) -> IsotropyDecomposition:
    """Build a decomposition from a JSON document (path, file object or dict).

    Summand indices in the triples list are 0-based; each unordered triple
    appears once and is symmetrized on load.
    """
    if isinstance(source, dict):
        doc = source
    elif hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    try:
        summands = doc["summands"]
        d = tuple(int(s["dim"]) for s in summands)
        b = tuple(float(s["b"]) for s in summands)
        cs = [s.get("c") for s in summands]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed decomposition document: {exc}") from exc
    c = None if any(v is None for v in cs) else tuple(float(v) for v in cs)
    n = len(d)
    triples = np.zeros((n, n, n))
    seen = set()
    for item in doc.get("triples", []):
        try:
            i, j, k, v = int(item["i"]), int(item["j"]), int(item["k"]), float(item["value"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed triple entry {item!r}") from exc
        if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
            raise ValueError(f"triple index out of range in {item!r}")
        key = tuple(sorted((i, j, k)))
        if key in seen:
            raise ValueError(f"duplicate triple {key} in decomposition document")
        seen.add(key)
        for perm in {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}:
            triples[perm] = v
    return IsotropyDecomposition(
        d=d, b=b, triples=triples, c=c, metadata=str(doc.get("metadata", ""))
    )
