"""Run configuration: YAML documents validated by pydantic models.

Validation errors are reported with the line of the offending key in the
source document.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from biperiodic import material as mat
from biperiodic.incident import PlaneWaveSource, make_source, source_from_angles

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class VectorSource(_Strict):
    d: tuple[float, float, float]
    p: tuple[float, float, float]
    omega: float = Field(gt=0)
    eps0: float = Field(1.0, gt=0)
    mu0: float = Field(1.0, gt=0)

    @field_validator("d")
    @classmethod
    def _downward(cls, d):
        if not d[2] < 0:
            raise ValueError("d3 must be negative (downward incidence)")
        return d

    def build(self) -> PlaneWaveSource:
        return make_source(self.d, self.p, self.omega, self.eps0, self.mu0)


class AngleSource(_Strict):
    k: float = Field(gt=0)
    theta: float = Field(0.0, ge=0, lt=np.pi / 2)
    phi: float = 0.0
    psi: float = 0.0

    def build(self) -> PlaneWaveSource:
        return source_from_angles(self.k, self.theta, self.phi, self.psi)


class ConstantMaterial(_Strict):
    family: Literal["constant"]
    h: float = Field(1.0, gt=0)
    collar: float | None = None

    def build(self, base: Path):
        return mat.constant_profile(self.h, self.collar)


class SlabMaterial(_Strict):
    family: Literal["slab"]
    eps: float = Field(gt=0)
    thickness: float = Field(gt=0)
    h: float = Field(gt=0)

    def build(self, base: Path):
        return mat.slab_profile(self.eps, self.thickness, self.h)


class LayeredMaterial(_Strict):
    family: Literal["layered"]
    knots: list[float]
    values: list[float]
    h: float = Field(gt=0)

    @model_validator(mode="after")
    def _lengths(self):
        if len(self.knots) != len(self.values) or not self.knots:
            raise ValueError("knots and values must be non-empty and of equal length")
        if any(v <= 0 for v in self.values):
            raise ValueError("inverse permittivity values must be positive")
        return self

    def build(self, base: Path):
        return mat.layered_profile(self.knots, self.values, self.h)


class CutoffSpec(_Strict):
    a: float = Field(float(np.pi / 8), gt=0, lt=float(np.pi / 2))
    kind: Literal["cubic", "smooth"] = "cubic"


class ExampleMaterial(_Strict):
    family: Literal["example"]
    lam: float = Field(alias="lambda", gt=0)
    h1: float = Field(gt=0)
    h2: float = Field(gt=0)
    h: float = Field(gt=0)
    chi: CutoffSpec = CutoffSpec()
    smooth_vertical: bool = False

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @model_validator(mode="after")
    def _order(self):
        if not self.h1 < self.h2 < self.h:
            raise ValueError("need h1 < h2 < h")
        return self

    def build(self, base: Path):
        chi = mat.Bump(mat.Window1D(self.chi.a, self.chi.kind))
        return mat.build_example_profile(self.lam, self.h1, self.h2, self.h, chi, smooth_vertical=self.smooth_vertical)


class GridMaterial(_Strict):
    family: Literal["grid"]
    path: str

    def build(self, base: Path):
        p = Path(self.path)
        return mat.read_grid_file(p if p.is_absolute() else base / p)


MaterialSpec = Annotated[
    Union[ConstantMaterial, SlabMaterial, LayeredMaterial, ExampleMaterial, GridMaterial],
    Field(discriminator="family"),
]


class Discretization(_Strict):
    N: int = Field(1, ge=0, le=8)
    M: int = Field(64, ge=2)
    quad_order: int = Field(3, ge=1, le=8)


class RhoSpec(_Strict):
    re: float = Field(gt=0)
    im: float = Field(lt=0)


class ScanSpec(_Strict):
    k_min: float = Field(0.5, gt=0)
    k_max: float = Field(3.5, gt=0)
    count: int = Field(50, ge=0)
    alpha: tuple[float, float] = (0.0, 0.0)
    refine: int = Field(0, ge=0)


class ExportSpec(_Strict):
    resolution: int = Field(16, ge=1)
    nz: int = Field(9, ge=1)


class AuditSpec(_Strict):
    random_fields: int = Field(100, ge=1)
    poincare_samples: int = Field(1000, ge=1)
    garding_samples: int = Field(100, ge=1)
    garding_k: list[float] = [0.5, 1.0, 2.3, 4.0]
    identity_elements: list[int] = [16, 32, 64]
    lateral: int = Field(64, ge=8)


class OracleSpec(_Strict):
    resolution: int = Field(40_000, ge=10_000)


class RunConfig(_Strict):
    schema_version: int = SCHEMA_VERSION
    command: Literal["solve", "check-material", "scan-k", "audit", "oracle-compare"] | None = None
    source: VectorSource | AngleSource | None = None
    material: MaterialSpec
    discretization: Discretization = Discretization()
    rho: Literal["default"] | RhoSpec = "default"
    scan: ScanSpec = ScanSpec()
    export: ExportSpec = ExportSpec()
    audit: AuditSpec = AuditSpec()
    oracle: OracleSpec = OracleSpec()
    condition_density: int = Field(64, ge=4)
    seed: int = 0
    output_dir: str | None = None

    @field_validator("schema_version")
    @classmethod
    def _schema(cls, v):
        if v != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {v}; expected {SCHEMA_VERSION}")
        return v

    def rho_value(self, m) -> complex | None:
        if self.rho == "default":
            return None
        return complex(self.rho.re, self.rho.im)


class ConfigError(ValueError):
    """Invalid configuration; ``str()`` contains ``path:line: message`` entries."""


def _node_line(root, loc) -> int | None:
    """1-based line of the YAML node addressed by a pydantic error location."""
    node = root
    line = None
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                if k.value == str(key):
                    line = k.start_mark.line + 1
                    node = v
                    break
            # keys absent from the document (union tags, missing fields) are skipped
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            # discriminated-union tags and similar synthetic segments
            continue
    return line


def parse_config(text: str, source_name: str = "<config>") -> RunConfig:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source_name}:{mark.line + 1}" if mark else source_name
        raise ConfigError(f"{where}: invalid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{source_name}:1: configuration must be a mapping")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        lines = []
        for err in exc.errors():
            line = _node_line(root, err["loc"])
            loc = ".".join(str(p) for p in err["loc"])
            lines.append(f"{source_name}:{line if line else 1}: {loc}: {err['msg']}")
        raise ConfigError("\n".join(lines)) from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))
