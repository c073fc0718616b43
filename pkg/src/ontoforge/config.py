"""Pipeline configuration: one TOML document, paths relative to the file.

The oracle API key never lives in the file; only the name of the
environment variable holding it does.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ontoforge.errors import ConfigError
from ontoforge.refine import BlockingConfig


@dataclass
class OracleConfig:
    kind: str = "stub"  # "http" | "stub"
    endpoint: str = ""
    model: str = ""
    api_key_env: str = ""
    max_parallel: int = 1
    timeout_seconds: float = 30.0
    retries: int = 2
    per_call_cost: Optional[float] = None
    table_path: Optional[Path] = None  # stub oracle response table


@dataclass
class PagerankConfig:
    damping: float = 0.85
    tolerance: float = 1e-10
    max_iterations: int = 200
    undirected: bool = False


@dataclass
class PipelineConfig:
    vault_root: Optional[Path] = None
    schema_path: Optional[Path] = None
    xml_path: Optional[Path] = None
    base_iri: str = "http://example.org/ontology"
    output_dir: Path = Path("out")
    ground_truth_path: Optional[Path] = None
    groups_path: Optional[Path] = None
    oracle: OracleConfig = field(default_factory=OracleConfig)
    blocking: BlockingConfig = field(default_factory=BlockingConfig)
    pagerank: PagerankConfig = field(default_factory=PagerankConfig)


def _path(base: Path, value, key: str) -> Path:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{key} must be a non-empty path string")
    path = Path(value)
    return path if path.is_absolute() else (base / path)


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}")

    base = path.parent
    config = PipelineConfig()
    if "vault_root" in raw:
        config.vault_root = _path(base, raw["vault_root"], "vault_root")
    if "schema_path" in raw:
        config.schema_path = _path(base, raw["schema_path"], "schema_path")
    if "xml_path" in raw:
        config.xml_path = _path(base, raw["xml_path"], "xml_path")
    if "ground_truth_path" in raw:
        config.ground_truth_path = _path(base, raw["ground_truth_path"], "ground_truth_path")
    if "groups_path" in raw:
        config.groups_path = _path(base, raw["groups_path"], "groups_path")
    if "base_iri" in raw:
        config.base_iri = str(raw["base_iri"]).rstrip("#/")
    if "output_dir" in raw:
        config.output_dir = _path(base, raw["output_dir"], "output_dir")

    oracle = raw.get("oracle", {})
    if oracle:
        kind = oracle.get("kind", "stub")
        if kind not in ("http", "stub"):
            raise ConfigError(f"oracle.kind must be 'http' or 'stub', got {kind!r}")
        config.oracle = OracleConfig(
            kind=kind,
            endpoint=oracle.get("endpoint", ""),
            model=oracle.get("model", ""),
            api_key_env=oracle.get("api_key_env", ""),
            max_parallel=int(oracle.get("max_parallel", 1)),
            timeout_seconds=float(oracle.get("timeout_seconds", 30.0)),
            retries=int(oracle.get("retries", 2)),
            per_call_cost=oracle.get("per_call_cost"),
            table_path=(
                _path(base, oracle["table_path"], "oracle.table_path")
                if "table_path" in oracle
                else None
            ),
        )

    blocking = raw.get("blocking", {})
    if "token_overlap" in blocking:
        config.blocking = BlockingConfig(token_overlap=int(blocking["token_overlap"]))

    ranking = raw.get("pagerank", {})
    if ranking:
        config.pagerank = PagerankConfig(
            damping=float(ranking.get("damping", 0.85)),
            tolerance=float(ranking.get("tolerance", 1e-10)),
            max_iterations=int(ranking.get("max_iterations", 200)),
            undirected=bool(ranking.get("undirected", False)),
        )
    if not 0.0 < config.pagerank.damping < 1.0:
        raise ConfigError(f"pagerank.damping must be in (0, 1), got {config.pagerank.damping}")
    if config.pagerank.tolerance <= 0:
        raise ConfigError("pagerank.tolerance must be positive")
    return config
