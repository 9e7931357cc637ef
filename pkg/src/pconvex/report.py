"""JSON reports, slice CSV exports and SVG figures."""

from __future__ import annotations

import csv
import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import Domain, FailsCertificate, build_slice
from .poly import Subspace

SCHEMA_VERSION = 1


def load_schema() -> dict:
    return json.loads(resources.files("pconvex").joinpath("schema/report.schema.json").read_text())


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x + 0.0    # drop negative zero
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def validate(report: dict) -> None:
    import jsonschema

    jsonschema.validate(jsonable(report), load_schema())


def make_report(command: str, inputs: dict, result: dict, exit_code: int, seed=None,
                timings: dict | None = None, exports=None, conventions=None) -> dict:
    rep = {
        "tool": "pconvex",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "seed": seed,
        "result": result,
        "exit_code": exit_code,
        "exports": exports or [],
    }
    if conventions is not None:
        rep["conventions"] = conventions
    if timings is not None:
        rep["timings"] = timings
    return rep


# -- slice exports -------------------------------------------------------------

def slice_for_certificate(X: Domain, cert: FailsCertificate):
    basis = np.asarray(cert.basis, dtype=float)
    W = Subspace(X.ambient, basis)
    return build_slice(X, cert.origin, W, cert.h, [tuple(e) for e in cert.extent], slice_id=cert.slice_id)


def _k_mask(sg, cert: FailsCertificate) -> np.ndarray:
    m = np.zeros(sg.shape, bool)
    if cert.K:
        idx = np.asarray(cert.K) - np.array(sg.index_lo)
        m[tuple(idx.T)] = True
    return m


def write_slice_csv(path, sg) -> Path:
    path = Path(path)
    pts = sg.points().reshape(-1, sg.domain.ambient)
    d = sg.d.ravel()
    inx = sg.in_x.ravel()
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(pts.shape[1])] + ["d", "in_x"])
        for p, dv, b in zip(pts, d, inx):
            dv = "inf" if np.isinf(dv) else f"{dv:.12g}"
            w.writerow([f"{v:.12g}" for v in p] + [dv, int(b)])
    return path


def _matplotlib():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "pconvex"
    matplotlib.rcParams["svg.fonttype"] = "none"
    return plt


def write_slice_svg(path, sg, cert: FailsCertificate | None = None, title: str = "") -> Path:
    """Heatmap of d_X on a 2-D slice (or a profile for 1-D) with K outlined."""
    plt = _matplotlib()
    path = Path(path)
    K = _k_mask(sg, cert) if cert is not None else None
    d = np.where(sg.in_x, sg.d, np.nan)
    d = np.where(np.isinf(d), np.nan, d)
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    if sg.k == 1:
        x = sg.axes()[0]
        ax.plot(x, d, lw=1.2, color="k")
        if K is not None:
            ax.fill_between(x, 0, np.nanmax(d) if np.isfinite(np.nanmax(d)) else 1.0,
                            where=K, color="tab:red", alpha=0.15, lw=0, label="K")
            ax.axhline(cert.interior_min, color="tab:blue", ls="--", lw=0.8, label="interior min")
            ax.axhline(cert.boundary_min, color="tab:red", ls=":", lw=0.8, label="rim min")
            ax.legend(frameon=False, fontsize=8)
        ax.set_xlabel("w1")
        ax.set_ylabel("d_X")
    else:
        dd, KK = d, K
        if sg.k == 3:
            # the 2-D section through the interior minimum (or the middle)
            c = sg.cell_of(cert.interior_local)[2] if cert is not None else sg.shape[2] // 2
            dd = d[:, :, c]
            KK = None if K is None else K[:, :, c]
        a0, a1 = sg.axes()[0], sg.axes()[1]
        ext = [a0[0] - sg.h / 2, a0[-1] + sg.h / 2, a1[0] - sg.h / 2, a1[-1] + sg.h / 2]
        im = ax.imshow(dd.T, origin="lower", extent=ext, cmap="viridis", interpolation="nearest")
        fig.colorbar(im, ax=ax, label="d_X")
        if KK is not None and KK.any():
            ax.contour(a0, a1, KK.T.astype(float), levels=[0.5], colors="tab:red", linewidths=1.0)
            ax.plot(*cert.interior_local[:2], marker="x", color="tab:red")
        ax.set_xlabel("w1")
        ax.set_ylabel("w2")
        ax.set_aspect("equal")
    ax.set_title(title or sg.slice_id, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def export_certificate(out_dir, label: str, X: Domain, cert: FailsCertificate, formats) -> list[str]:
    """Write the certificate JSON (always) plus the requested CSV/SVG of its slice."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = "cert_" + "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in label)
    paths = []
    cj = out_dir / f"{stem}.json"
    cj.write_text(dumps({"certificate": cert.to_json(), "domain": X.to_json(), "tool": "pconvex",
                         "version": __version__}))
    paths.append(str(cj))
    if "csv" in formats or "svg" in formats:
        sg = slice_for_certificate(X, cert)
        if "csv" in formats:
            paths.append(str(write_slice_csv(out_dir / f"{stem}.csv", sg)))
        if "svg" in formats:
            paths.append(str(write_slice_svg(out_dir / f"{stem}.svg", sg, cert, title=label)))
    return paths
