"""Command-line front end.

    pconvex classify --op "x1^2+x2^2"
    pconvex sigma --op laplace3-sub --V e3
    pconvex minprinciple --domain punctured-plane --W e1
    pconvex verdict --op heat2 --domain punctured-plane --out report.json --formats json,svg
    pconvex augmented --op heat2 --domain unit-disk
    pconvex presets
    pconvex --replay out/cert_R3_....json

Exit codes: 0 completed (any verdict), 1 certificate replay failed,
2 configuration error, 3 Unknown caused by a numeric tolerance band.
"""

from __future__ import annotations

import argparse
import sys
import time
from importlib import resources
from pathlib import Path

from . import __version__
from . import report as rpt
from .geometry import (
    DomainConfigError,
    FailsCertificate,
    domain_from_mapping,
    load_domain,
    min_principle_family,
    replay_certificate,
)
from .geometry.config import load_mapping
from .poly import PolynomialSyntaxError, Subspace, parse_subspace
from .poly.presets import CONVENTIONS, PRESET_HELP, resolve_operator
from .sigma import SigmaParams, sigma0_estimate, sigma_estimate, sigma_zero_subspace_exact
from .verdict import UNKNOWN, GeomParams, augmented_verdict, classify_operator, convexity_verdict

EXIT_OK, EXIT_REPLAY, EXIT_CONFIG, EXIT_REFUSAL = 0, 1, 2, 3
COMMANDS = ("classify", "sigma", "minprinciple", "verdict", "augmented", "presets")
FORMATS = {"json", "csv", "svg"}


class ConfigError(Exception):
    pass


def bundled_domains() -> list[str]:
    d = resources.files("pconvex").joinpath("data/domains")
    return sorted(p.name[:-5] for p in d.iterdir() if p.name.endswith(".toml"))


def resolve_domain(spec):
    """A path to a TOML/JSON file, a bundled domain name, or an inline mapping."""
    if isinstance(spec, dict):
        return domain_from_mapping(spec)
    p = Path(spec)
    if p.is_file():
        return load_domain(p)
    name = p.name[:-5] if p.name.endswith(".toml") else p.name
    res = resources.files("pconvex").joinpath(f"data/domains/{name}.toml")
    if res.is_file():
        with resources.as_file(res) as fp:
            return load_domain(fp)
    raise ConfigError(f"domain file {spec!r} not found (bundled: {', '.join(bundled_domains())})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pconvex", description="P-convexity and surjectivity checks for "
                                 "constant-coefficient operators.")
    ap.add_argument("--version", action="version", version=f"pconvex {__version__}")
    ap.add_argument("--replay", metavar="CERT", help="replay an exported certificate JSON at half spacing")
    sub = ap.add_subparsers(dest="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON run configuration")
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--export-dir", help="directory for certificate exports (default: next to --out)")
    common.add_argument("--formats", help="comma list from json,csv,svg (default json)")
    common.add_argument("--seed", type=int)
    common.add_argument("--canonical", action="store_true", help="omit timings so reruns are byte-identical")

    op = argparse.ArgumentParser(add_help=False)
    op.add_argument("--op", help="preset name or polynomial text in x1..xn")
    op.add_argument("--nvars", type=int, help="ambient dimension for polynomial text")

    geo = argparse.ArgumentParser(add_help=False)
    geo.add_argument("--domain", help="domain config path or bundled name")
    geo.add_argument("--h", type=float, help="grid spacing")
    geo.add_argument("--extent", type=float, help="slice half-width")
    geo.add_argument("--offsets", help="explicit slice origins, ';'-separated vectors like '0,0.5;0,1'")

    sub.add_parser("classify", parents=[common, op], help="operator classification")
    sp = sub.add_parser("sigma", parents=[common, op], help="estimate sigma_P(V) or sigma0_P(V)")
    sp.add_argument("--V", help="subspace spec, e.g. 'e3' or '1,1,0'")
    sp.add_argument("--sigma0", action="store_true", help="use the all-xi variant")
    mp = sub.add_parser("minprinciple", parents=[common, geo], help="minimum principle on slices x + W")
    mp.add_argument("--W", help="subspace spec, e.g. 'e1,e2'")
    sub.add_parser("verdict", parents=[common, op, geo], help="P-convexity and surjectivity")
    sub.add_parser("augmented", parents=[common, op, geo], help="verdict for the operator with one extra variable")
    sub.add_parser("presets", parents=[common], help="list operator presets and bundled domains")
    return ap


def _merge(args, cfg: dict) -> dict:
    """Command-line flags override the config file."""
    out = dict(cfg)
    geom = dict(cfg.get("geom", {}))
    output = dict(cfg.get("output", {}))
    for key in ("op", "nvars", "domain", "V", "W", "sigma0"):
        val = getattr(args, key, None)
        if val not in (None, False):
            out[key] = val
    for key in ("h", "extent", "offsets"):
        val = getattr(args, key, None)
        if val is not None:
            geom[key] = val
    if args.seed is not None:
        out["seed"] = args.seed
    if args.out:
        output["out"] = args.out
    if args.export_dir:
        output["export_dir"] = args.export_dir
    if args.formats:
        output["formats"] = args.formats
    out["geom"], out["output"] = geom, output
    return out


def _formats(val) -> list[str]:
    if val is None:
        return ["json"]
    items = val.split(",") if isinstance(val, str) else list(val)
    items = [s.strip().lower() for s in items if s.strip()]
    bad = set(items) - FORMATS
    if bad:
        raise ConfigError(f"unknown export format(s) {sorted(bad)}; choose from json,csv,svg")
    return sorted(set(items), key=["json", "csv", "svg"].index)


def _offsets(val, n):
    if val is None:
        return None
    rows = val.split(";") if isinstance(val, str) else val
    out = []
    for r in rows:
        vec = [float(x) for x in (r.split(",") if isinstance(r, str) else r)]
        if len(vec) != n:
            raise ConfigError(f"offset {vec} has {len(vec)} entries, domain lives in R^{n}")
        out.append(tuple(vec))
    return tuple(out)


def _geom(run: dict, n: int) -> GeomParams:
    g = run["geom"]
    kw = {}
    if "h" in g:
        kw["h"] = float(g["h"])
    if "extent" in g:
        kw["extent"] = float(g["extent"])
    if "steps" in g:
        kw["steps"] = tuple(float(s) for s in g["steps"])
    if g.get("offsets") is not None:
        kw["offsets"] = _offsets(g["offsets"], n)
    seed = g.get("seed", run.get("seed"))
    if seed is not None:
        kw["seed"] = int(seed)
    try:
        return GeomParams(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _operator(run: dict):
    if not run.get("op"):
        raise ConfigError("an operator is required (--op or 'op' in the config)")
    return resolve_operator(str(run["op"]), run.get("nvars"))


def _subspace(spec, n: int, what: str) -> Subspace:
    if spec is None:
        raise ConfigError(f"--{what} is required")
    if isinstance(spec, (list, tuple)):
        return Subspace.span([[float(x) for x in v] for v in spec], n)
    return parse_subspace(str(spec), n)


def _export_dir(output: dict) -> Path:
    if output.get("export_dir"):
        return Path(output["export_dir"])
    if output.get("out"):
        return Path(output["out"]).resolve().parent
    return Path.cwd()


def _export(certs, X, output, formats, label_key="ref") -> list[str]:
    if not certs or not ({"csv", "svg"} & set(formats) or output.get("out") or output.get("export_dir")):
        return []
    paths = []
    d = _export_dir(output)
    for entry in certs:
        cert = FailsCertificate.from_json(entry["certificate"])
        written = rpt.export_certificate(d, entry[label_key], X, cert, formats)
        entry["exports"] = written
        paths.extend(written)
    return paths


# -- commands -----------------------------------------------------------------

def cmd_presets(run):
    result = {"kind": "presets", "operators": PRESET_HELP, "domains": bundled_domains(),
              "conventions": CONVENTIONS}
    return result, EXIT_OK, [], {}


def cmd_classify(run):
    P = _operator(run)
    oc = classify_operator(P)
    result = {"kind": "classify", **oc.to_json()}
    return result, (EXIT_REFUSAL if oc.refusals else EXIT_OK), [], {"op": run["op"], "polynomial": str(P)}


def cmd_sigma(run):
    P = _operator(run)
    V = _subspace(run.get("V"), P.nvars, "V")
    cfg = dict(run.get("sigma", {}))
    if run.get("seed") is not None:
        cfg.setdefault("seed", run["seed"])
    try:
        params = SigmaParams.from_mapping(cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sigma parameters: {exc}") from exc
    fn = sigma0_estimate if run.get("sigma0") else sigma_estimate
    est = fn(P, V, params)
    exact = None
    if not run.get("sigma0"):
        zs = sigma_zero_subspace_exact(P)
        if zs is not None:
            # the exact rule: sigma vanishes on V iff V lies in the zero subspace
            exact = {"rule": zs.rule, "zero_subspace": zs.subspace.to_json(),
                     "sigma_is_zero": V.is_subspace_of(zs.subspace)}
    result = {"kind": "sigma", "functional": "sigma0" if run.get("sigma0") else "sigma",
              "V": V.to_json(), "estimate": est.to_json(), "params": params.to_json(), "exact": exact}
    inputs = {"op": run["op"], "polynomial": str(P), "V": run.get("V"), "sigma0": bool(run.get("sigma0"))}
    return result, EXIT_OK, [], inputs, params.seed


def cmd_minprinciple(run):
    if not run.get("domain"):
        raise ConfigError("--domain is required")
    X = resolve_domain(run["domain"])
    W = _subspace(run.get("W"), X.ambient, "W")
    geom = _geom(run, X.ambient)
    offs = geom.offsets_for(X, W)
    rep = min_principle_family(X, W, offs, geom.h, geom.extent, geom.seed)
    certs = []
    for c in rep.failures:
        certs.append({"ref": f"W/{c.slice_id}", "certificate": c.to_json(),
                      "replay": replay_certificate(X, c).to_json()})
    result = {"kind": "minprinciple", "status": rep.status, "family": rep.to_json(), "certificates": certs}
    code = EXIT_REFUSAL if rep.status == "inconclusive" else EXIT_OK
    exports = _export(certs, X, run["output"], run["formats"])
    inputs = {"domain": X.to_json(), "W": W.to_json(), "geom": geom.to_json()}
    return result, code, exports, inputs, geom.seed


def _verdict_common(run, fn):
    P = _operator(run)
    if not run.get("domain"):
        raise ConfigError("--domain is required")
    X = resolve_domain(run["domain"])
    if X.ambient != P.nvars:
        raise ConfigError(f"operator has {P.nvars} variables, domain lives in R^{X.ambient}")
    geom = _geom(run, X.ambient)
    v = fn(P, X, geom)
    result = {"kind": "verdict", **v.to_json()}
    exports = _export(result["certificates"], X, run["output"], run["formats"])
    answers = [v.supports, v.sing_supports, v.surjective]
    if fn is augmented_verdict:
        answers.append(v.augmented_surjective)
    numeric_gap = bool(v.refusals) or any(f.status == "inconclusive" for f in v.families.values()) \
        or any("withheld" in q for q in v.qualifiers)
    code = EXIT_REFUSAL if numeric_gap and UNKNOWN in answers else EXIT_OK
    inputs = {"op": run["op"], "polynomial": str(P), "domain": X.to_json(), "geom": geom.to_json()}
    return result, code, exports, inputs, geom.seed


def cmd_verdict(run):
    return _verdict_common(run, convexity_verdict)


def cmd_augmented(run):
    return _verdict_common(run, augmented_verdict)


def cmd_replay(path) -> int:
    data = load_mapping(path)
    cert = FailsCertificate.from_json(data["certificate"])
    X = domain_from_mapping(data["domain"], base_dir=Path(path).parent)
    res = replay_certificate(X, cert)
    out = {"tool": "pconvex", "version": __version__, "certificate": str(path), "replay": res.to_json()}
    sys.stdout.write(rpt.dumps(out))
    return EXIT_OK if res.ok else EXIT_REPLAY


DISPATCH = {"classify": cmd_classify, "sigma": cmd_sigma, "minprinciple": cmd_minprinciple,
            "verdict": cmd_verdict, "augmented": cmd_augmented, "presets": cmd_presets}


def run(command: str, run_cfg: dict, canonical: bool = False) -> tuple[int, dict]:
    """Execute one command; returns (exit code, report) and writes the report if requested."""
    run_cfg = dict(run_cfg)
    run_cfg.setdefault("geom", {})
    run_cfg.setdefault("output", {})
    run_cfg["formats"] = _formats(run_cfg["output"].get("formats"))
    t0 = time.perf_counter()
    out = DISPATCH[command](run_cfg)
    result, code, exports, inputs = out[:4]
    seed = out[4] if len(out) > 4 else run_cfg.get("seed")
    elapsed = time.perf_counter() - t0
    inputs = {**inputs, "formats": run_cfg["formats"]}
    report = rpt.make_report(command, inputs, result, code, seed=seed,
                             timings=None if canonical else {"total_s": round(elapsed, 4)},
                             exports=[str(p) for p in exports], conventions=CONVENTIONS)
    rpt.validate(report)
    text = rpt.dumps(report)
    dest = run_cfg["output"].get("out")
    if dest:
        Path(dest).parent.mkdir(parents=True, exist_ok=True)
        Path(dest).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code, report


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.replay:
            return cmd_replay(args.replay)
        if not args.command:
            ap.print_help(sys.stderr)
            return EXIT_CONFIG
        cfg = load_mapping(args.config) if getattr(args, "config", None) else {}
        if cfg.get("command") not in (None, args.command):
            raise ConfigError(f"config is for command {cfg['command']!r}, not {args.command!r}")
        code, _ = run(args.command, _merge(args, cfg), canonical=args.canonical)
        return code
    except PolynomialSyntaxError as exc:
        print(f"pconvex: polynomial syntax error: {exc}", file=sys.stderr)
    except (ConfigError, DomainConfigError, KeyError, FileNotFoundError) as exc:
        print(f"pconvex: configuration error: {exc}", file=sys.stderr)
    except ValueError as exc:
        print(f"pconvex: invalid input: {exc}", file=sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
