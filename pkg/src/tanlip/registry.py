"""Model domains: built-ins and the JSON registry format."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import jsonschema
import numpy as np

from . import expr as E
from . import geometry as G
from .poly import Poly, to_poly

SCHEMA_VERSION = 1

REGISTRY_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "domains"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "domains": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "dimension", "defining", "box", "base_points"],
                "properties": {
                    "name": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_-]*$"},
                    "dimension": {"type": "integer", "minimum": 2},
                    "defining": {"type": "string"},
                    "box": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    },
                    "base_points": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "array",
                            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                        },
                    },
                    "flags": {
                        "type": "object",
                        "properties": {
                            "graph_form": {"type": "boolean"},
                            "hermitian_sos": {"type": "boolean"},
                            "pseudoconvex_asserted": {"type": "boolean"},
                        },
                        "additionalProperties": False,
                    },
                    "p_list": {"type": "array", "items": {"type": "string"}},
                    "completion": {"type": "string"},
                },
                "additionalProperties": False,
            },
        },
    },
}


class RegistryError(ValueError):
    """Registry validation failure; ``pointer`` is a JSON pointer into the document."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


@dataclass
class Domain:
    name: str
    dimension: int
    defining_source: str
    box: np.ndarray
    base_points: list
    flags: dict = field(default_factory=dict)
    p_list: list = field(default_factory=list)
    completion: str | None = None

    def __post_init__(self):
        self.box = np.asarray(self.box, dtype=float)
        self.base_points = [G.as_point(p, self.dimension) for p in self.base_points]
        self.expr = E.parse(self.defining_source, self.dimension)
        if self.box.shape != (2 * self.dimension, 2):
            raise RegistryError(f"box must have {2 * self.dimension} [lo, hi] entries")

    @cached_property
    def poly(self) -> Poly:
        return to_poly(self.expr, self.dimension, exact=False)

    @cached_property
    def exact_poly(self) -> Poly:
        return to_poly(self.expr, self.dimension, exact=True)

    @property
    def graph_form(self) -> bool:
        return bool(self.flags.get("graph_form", False))

    @property
    def hermitian_sos(self) -> bool:
        return bool(self.flags.get("hermitian_sos", False))

    def validate(self, pointer: str = ""):
        for i, P in enumerate(self.base_points):
            where = f"{pointer}/base_points/{i}"
            val = E.evaluate(self.expr, list(P))
            if abs(val) > G.BOUNDARY_TOL:
                raise RegistryError(f"|r| = {abs(val):.3e} at base point exceeds {G.BOUNDARY_TOL}", where)
            if G.real_gradient_norm(self.expr, P) < G.GRADIENT_TOL:
                raise RegistryError("degenerate gradient at base point", where)
            if not G.point_in_box(P, self.box):
                raise RegistryError("base point outside the neighbourhood box", where)
        for i, src in enumerate(self.p_list):
            p = to_poly(E.parse(src, self.dimension), self.dimension, exact=False)
            if not p.is_holomorphic():
                raise RegistryError("p_list entries must be holomorphic", f"{pointer}/p_list/{i}")
        return self

    def sample_box(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.uniform(self.box[:, 0], self.box[:, 1], size=(size, 2 * self.dimension))
        return u[:, 0::2] + 1j * u[:, 1::2]

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "dimension": self.dimension,
            "defining": self.defining_source,
            "box": self.box.tolist(),
            "base_points": [[[float(x.real), float(x.imag)] for x in P] for P in self.base_points],
            "flags": dict(self.flags),
            "p_list": list(self.p_list),
        }
        if self.completion is not None:
            out["completion"] = self.completion
        return out


def _cube(n: int, lo: float = -1.0, hi: float = 1.0) -> list:
    return [[lo, hi]] * (2 * n)


def _sos(name, n, h_terms, p_list, box=None):
    source = f"Re(z{n})" + "".join(f" + abs2({p})" for p in h_terms)
    return Domain(
        name, n, source, box or _cube(n), [[0] * n],
        {"graph_form": True, "hermitian_sos": True, "pseudoconvex_asserted": True}, list(p_list),
    )


def builtin_domains() -> dict:
    herbort_p = ["z1*z1*z1", "z1*z2", "z2*z2*z2"]
    doms = [
        _sos("halfspace", 2, [], []),
        Domain(
            "ball", 2, "abs2(z1) + abs2(z2) - 1", _cube(2, -1.5, 1.5), [[0, 1], [0.6, 0.8]],
            {"graph_form": False, "hermitian_sos": False, "pseudoconvex_asserted": True},
            completion="1 - z2 - 1/2*z1*z1",
        ),
        _sos("herbort", 3, herbort_p, herbort_p),
        _sos("dangelo", 3, ["z1*z1 - z2*z2*z2"], ["z1*z1 - z2*z2*z2"]),
    ]
    for m in (1, 2, 3):
        p = "*".join(["z1"] * m)
        doms.append(_sos(f"egg{2 * m}", 2, [p], [p]))
    return {d.name: d.validate(f"/builtin/{d.name}") for d in doms}


def get_domain(name: str, registry: dict | None = None) -> Domain:
    doms = registry if registry is not None else builtin_domains()
    if name not in doms:
        raise KeyError(f"unknown domain {name!r}; available: {', '.join(sorted(doms))}")
    return doms[name]


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def load_registry(path: str | Path | None = None) -> dict:
    """Built-in domains merged with those of a registry JSON file."""
    doms = builtin_domains()
    if path is None:
        return doms
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    validator = jsonschema.Draft202012Validator(REGISTRY_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise RegistryError(err.message, _pointer(err.absolute_path))
    for i, entry in enumerate(doc["domains"]):
        ptr = f"/domains/{i}"
        n = entry["dimension"]
        if len(entry["box"]) != 2 * n:
            raise RegistryError(f"box needs {2 * n} entries", f"{ptr}/box")
        for k, lohi in enumerate(entry["box"]):
            if lohi[0] >= lohi[1]:
                raise RegistryError("box entry must satisfy lo < hi", f"{ptr}/box/{k}")
        for k, bp in enumerate(entry["base_points"]):
            if len(bp) != n:
                raise RegistryError(f"base point needs {n} coordinates", f"{ptr}/base_points/{k}")
        try:
            dom = Domain(
                entry["name"], n, entry["defining"], entry["box"],
                [[complex(a, b) for a, b in bp] for bp in entry["base_points"]],
                dict(entry.get("flags", {})), list(entry.get("p_list", [])), entry.get("completion"),
            )
        except E.ExprError as exc:
            raise RegistryError(str(exc), f"{ptr}/defining") from exc
        doms[dom.name] = dom.validate(ptr)
    return doms
