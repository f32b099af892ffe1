from pathlib import Path

import numpy as np
import pytest

from biperiodic import material as mat
from biperiodic.config import SCHEMA_VERSION, ConfigError, load_config, parse_config

EXAMPLE = """
material:
  family: example
  lambda: 0.01
  h1: 0.3
  h2: 0.6
  h: 1.0
source:
  k: 1.5
  theta: 0.2
"""


def test_defaults_and_alias(tmp_path):
    cfg = parse_config(EXAMPLE)
    assert cfg.schema_version == SCHEMA_VERSION
    assert cfg.material.lam == 0.01
    assert cfg.discretization.N == 1 and cfg.discretization.M == 64
    assert cfg.rho == "default" and cfg.rho_value(None) is None
    assert cfg.model_dump(by_alias=True)["material"]["lambda"] == 0.01
    m = cfg.material.build(tmp_path)
    assert isinstance(m, mat.MaterialProfile) and m.h == 1.0
    src = cfg.source.build()
    assert src.k == pytest.approx(1.5)


def test_vector_source_and_rho():
    cfg = parse_config(
        "material: {family: constant}\n"
        "source: {d: [0, 0, -2], p: [1, 0, 0], omega: 2.0}\n"
        "rho: {re: 1.0, im: -0.5}\n"
    )
    assert cfg.rho_value(None) == 1 - 0.5j
    assert cfg.source.build().k == pytest.approx(2.0)


@pytest.mark.parametrize(
    "text, line, key",
    [
        ("material:\n  family: slab\n  eps: -4\n  thickness: 0.3\n  h: 1\n", 3, "eps"),
        ("material: {family: constant}\ndiscretization:\n  N: 1\n  M: 1\n", 4, "M"),
        ("material: {family: constant}\nbogus: 3\n", 2, "bogus"),
        ("material: {family: constant}\nsource:\n  d: [0, 0, 1]\n  p: [1, 0, 0]\n  omega: 1\n", 3, "d"),
        ("schema_version: 2\nmaterial: {family: constant}\n", 1, "schema_version"),
    ],
)
def test_errors_carry_line_numbers(text, line, key):
    with pytest.raises(ConfigError) as err:
        parse_config(text, "run.yaml")
    assert f"run.yaml:{line}:" in str(err.value)
    assert key in str(err.value)


def test_invalid_yaml_and_non_mapping():
    with pytest.raises(ConfigError, match=r"run.yaml:\d+: invalid YAML"):
        parse_config("material:\n  - [unclosed\n", "run.yaml")
    with pytest.raises(ConfigError, match="mapping"):
        parse_config("- 1\n- 2\n")


def test_layered_and_example_validation():
    with pytest.raises(ConfigError):
        parse_config("material: {family: layered, knots: [0, 0.5], values: [1.0], h: 1}\n")
    with pytest.raises(ConfigError):
        parse_config("material: {family: example, lambda: 1, h1: 0.6, h2: 0.3, h: 1}\n")


def test_grid_path_relative_to_config(tmp_path):
    mat.write_grid_file(tmp_path / "eps.grid", np.ones((4, 4, 5)), 1.0, 0.8)
    cfg_path = tmp_path / "run.yaml"
    cfg_path.write_text("material: {family: grid, path: eps.grid}\n")
    cfg = load_config(cfg_path)
    m = cfg.material.build(cfg_path.parent)
    assert m.h == pytest.approx(1.0)


@pytest.mark.parametrize("path", sorted(Path(__file__).resolve().parents[1].joinpath("configs").glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_load(path):
    cfg = load_config(path)
    cfg.material.build(path.parent)
