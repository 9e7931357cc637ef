"""Domain descriptions from TOML/JSON mappings and files."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from ..poly import Subspace, parse_subspace
from .domains import (
    ComplementOfAffine,
    Domain,
    FiniteIntersection,
    FullSpace,
    GridDomain,
    HalfSpace,
    OpenBall,
    OpenBox,
    Product,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class DomainConfigError(ValueError):
    pass


def load_mapping(path) -> dict:
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise DomainConfigError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            return json.loads(text)
        return tomllib.loads(text.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise DomainConfigError(f"{path}: {exc}") from exc


def _need(cfg: dict, key: str):
    if key not in cfg:
        raise DomainConfigError(f"domain of type {cfg.get('type')!r} needs field {key!r}")
    return cfg[key]


def _directions(cfg: dict, n: int) -> Subspace:
    dirs = cfg.get("directions", [])
    if isinstance(dirs, str):
        return parse_subspace(dirs, n)
    if not dirs:
        return Subspace.trivial(n)
    return Subspace.span([[float(x) for x in v] for v in dirs], n)


def domain_from_mapping(cfg: dict, base_dir: Path | None = None) -> Domain:
    """Build a domain from {type: ..., geometry fields}; nested under "domain" is accepted."""
    if "domain" in cfg and isinstance(cfg["domain"], dict):
        cfg = cfg["domain"]
    kind = cfg.get("type")
    try:
        if kind == "full":
            return FullSpace(int(_need(cfg, "n")))
        if kind == "ball":
            return OpenBall(tuple(_need(cfg, "center")), float(_need(cfg, "radius")))
        if kind == "box":
            return OpenBox(tuple(_need(cfg, "lo")), tuple(_need(cfg, "hi")))
        if kind == "halfspace":
            return HalfSpace(tuple(_need(cfg, "normal")), float(_need(cfg, "offset")))
        if kind == "complement_affine":
            point = [float(x) for x in _need(cfg, "point")]
            return ComplementOfAffine(tuple(point), _directions(cfg, len(point)))
        if kind == "intersection":
            members = [domain_from_mapping(m, base_dir) for m in _need(cfg, "members")]
            return FiniteIntersection(tuple(members))
        if kind == "product":
            return Product(domain_from_mapping(_need(cfg, "base"), base_dir))
        if kind == "grid":
            path = Path(_need(cfg, "file"))
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return GridDomain.from_raw(path, _need(cfg, "shape"), _need(cfg, "lo"), _need(cfg, "spacing"))
    except DomainConfigError:
        raise
    except (TypeError, ValueError, OSError) as exc:
        raise DomainConfigError(f"invalid {kind} domain: {exc}") from exc
    raise DomainConfigError(f"unknown domain type {kind!r}")


def load_domain(path) -> Domain:
    path = Path(path)
    return domain_from_mapping(load_mapping(path), base_dir=path.parent)


def write_grid(path, mask: np.ndarray, lo, spacing: float) -> dict:
    """Write a raw byte grid plus a JSON header next to it; returns the header."""
    path = Path(path)
    raw = path.with_suffix(".raw")
    np.asarray(mask, dtype=np.uint8).tofile(raw)
    hdr = {"type": "grid", "file": raw.name, "shape": list(np.shape(mask)),
           "lo": [float(v) for v in lo], "spacing": float(spacing)}
    path.with_suffix(".json").write_text(json.dumps(hdr, indent=2))
    return hdr
