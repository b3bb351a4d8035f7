"""Run configuration: strict JSON parsing shared by every CLI verb."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .catenoid_field import FieldConfig
from .elliptic import LatticeSumPolicy
from .errors import EllipticaError
from .lattice import Lattice


class ConfigError(EllipticaError):
    """Malformed or out-of-range run configuration."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class RunConfig:
    lattice: Lattice = field(default_factory=lambda: Lattice(1.0, 1j))
    truncation: LatticeSumPolicy = field(default_factory=LatticeSumPolicy)
    mesh_nu: int = 32
    mesh_nv: int = 32
    end_cutoff: float = 4.0
    c: float = 1.0
    copies_x: int = 1
    copies_y: int = 1
    quad_tol: float = 1e-11
    seed: int = 12345

    def field_config(self) -> FieldConfig:
        return FieldConfig(
            c=self.c, mesh_nu=self.mesh_nu, mesh_nv=self.mesh_nv,
            end_cutoff=self.end_cutoff, copies=(self.copies_x, self.copies_y),
            quad_tol=self.quad_tol,
        )


_SECTIONS = {
    "lattice": {"w1_re", "w1_im", "w2_re", "w2_im"},
    "truncation": {"radius", "tail_tol"},
    "mesh": {"nu", "nv", "end_cutoff"},
    "field": {"c", "copies_x", "copies_y"},
}
_TOP_KEYS = set(_SECTIONS) | {"quad_tol", "seed"}


def _reject_unknown(given: dict, allowed: set, where: str):
    unknown = set(given) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            line=exc.lineno, column=exc.colno,
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    _reject_unknown(raw, _TOP_KEYS, "config root")
    for name in _SECTIONS:
        if name in raw:
            if not isinstance(raw[name], dict):
                raise ConfigError(f"section {name!r} must be an object")
            _reject_unknown(raw[name], _SECTIONS[name], f"section {name!r}")

    kwargs: dict = {}
    try:
        if "lattice" in raw:
            lt = raw["lattice"]
            kwargs["lattice"] = Lattice(
                complex(float(lt.get("w1_re", 1.0)), float(lt.get("w1_im", 0.0))),
                complex(float(lt.get("w2_re", 0.0)), float(lt.get("w2_im", 1.0))),
            )
        if "truncation" in raw:
            tr = raw["truncation"]
            kwargs["truncation"] = LatticeSumPolicy(
                radius=int(tr.get("radius", 60)),
                tail_tol=tr.get("tail_tol"),
            )
        if "mesh" in raw:
            ms = raw["mesh"]
            kwargs["mesh_nu"] = int(ms.get("nu", 32))
            kwargs["mesh_nv"] = int(ms.get("nv", 32))
            kwargs["end_cutoff"] = float(ms.get("end_cutoff", 4.0))
        if "field" in raw:
            fd = raw["field"]
            kwargs["c"] = float(fd.get("c", 1.0))
            kwargs["copies_x"] = int(fd.get("copies_x", 1))
            kwargs["copies_y"] = int(fd.get("copies_y", 1))
        if "quad_tol" in raw:
            kwargs["quad_tol"] = float(raw["quad_tol"])
        if "seed" in raw:
            kwargs["seed"] = int(raw["seed"])
        cfg = RunConfig(**kwargs)
        cfg.field_config()                  # re-validate field preconditions
        cfg.truncation.validate(cfg.lattice)  # tail feasibility at this lattice
    except ConfigError:
        raise
    except EllipticaError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    if cfg.quad_tol <= 0:
        raise ConfigError("quad_tol must be positive")
    return cfg


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text)


def parse_complex(text: str) -> complex:
    """Parse CLI complex literals like '0.5+0.5i', '-2i', '1.25'."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ConfigError("empty complex literal")
    try:
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {text!r}") from exc


def complex_json(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}
