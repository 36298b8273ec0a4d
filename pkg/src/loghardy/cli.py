"""Batch front-end: JSON experiment configs in, JSON/CSV results (and
optional SVG plots) out.

Usage::

    loghardy <command> --config path.json [--set key=value ...] [--out dir]

Commands: eigen, robin, admissible, sobolev, weights-scan, asymptotics,
pencil.  Exit status 0 on success, 2 if any solve failed to converge, 3 on a
config error.  All outputs are deterministic given the config: JSON is
written with sorted keys, CSV floats with repr, and sweep entries keep their
input order regardless of scheduling.  The environment variable
LOGHARDY_THREADS caps sweep parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analysis, assembly, eigensolve, geometry
from .geometry import Disk, build_mesh, refine, spec_from_dict
from .weights import GridSpec, WeightParams, admissible_check, scan_sup

SCHEMA_VERSION = 1

COMMANDS = ("eigen", "robin", "admissible", "sobolev", "weights-scan",
            "asymptotics", "pencil")


class ConfigError(Exception):
    """Raised for schema violations; the message names the offending field."""


# ---------------------------------------------------------------------------
# config handling


def _get(cfg: dict, field: str, default=None, required: bool = False):
    cur = cfg
    for part in field.split("."):
        if not isinstance(cur, dict) or part not in cur:
            if required:
                raise ConfigError(f"missing required config field: {field}")
            return default
        cur = cur[part]
    return cur


def _set_path(cfg: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    cur = cfg
    for p in parts[:-1]:
        cur = cur.setdefault(p, {})
        if not isinstance(cur, dict):
            raise ConfigError(f"--set path {dotted} crosses non-object {p}")
    cur[parts[-1]] = value


def load_config(path: str, overrides: list, out_dir: str | None) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be a JSON object")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        _set_path(cfg, key, val)
    if out_dir is not None:
        _set_path(cfg, "outputs.dir", out_dir)
    return cfg


def _weight_params(cfg: dict) -> WeightParams:
    w = _get(cfg, "weights", {})
    if not isinstance(w, dict):
        raise ConfigError("weights: must be an object")
    try:
        return WeightParams(a=float(w.get("a", 2.0)),
                            A=float(w.get("A", 2.0)),
                            B=float(w.get("B", 0.0)),
                            p=float(w.get("p", 2.0)),
                            gamma=float(w.get("gamma", 1.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"weights: {exc}") from exc


def _domain_spec(cfg: dict):
    d = _get(cfg, "domain", {"kind": "disk", "radius": 1.0})
    if not isinstance(d, dict):
        raise ConfigError("domain: must be an object")
    d = dict(d)
    kind = d.pop("kind", None)
    if kind is not None and "variant" not in d:
        aliases = {"disk": "Disk", "sector_annulus": "SectorAnnulus",
                   "l_domain": "LDomain", "half_graph": "HalfGraph"}
        if kind not in aliases:
            raise ConfigError(f"domain.kind: unknown domain kind {kind!r}")
        d["variant"] = aliases[kind]
    try:
        return spec_from_dict(d)
    except (KeyError, TypeError, ValueError,
            geometry.InvalidDomainError) as exc:
        raise ConfigError(f"domain: {exc}") from exc


def _build_mesh(cfg: dict):
    spec = _domain_spec(cfg)
    m = _get(cfg, "mesh", {})
    try:
        mesh = build_mesh(spec,
                          target_h=float(m.get("target_h", 0.1)),
                          grading_q=float(m.get("grading_q", 0.5)),
                          rings=int(m.get("rings", 8)))
        for _ in range(int(m.get("refinements", 0))):
            mesh = refine(mesh)
    except (ValueError, geometry.InvalidDomainError) as exc:
        raise ConfigError(f"mesh: {exc}") from exc
    return mesh


def _solver_opts(cfg: dict) -> dict:
    s = _get(cfg, "solver", {})
    return {"tol": float(s.get("tol", 1e-10)),
            "max_iter": int(s.get("max_iter", 500))}


def _threads() -> int:
    raw = os.environ.get("LOGHARDY_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(4, os.cpu_count() or 1)
    return n


# ---------------------------------------------------------------------------
# deterministic artifact writers


def _atomic_write(path: str, data: str) -> None:
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, payload: dict, cfg: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION, "config": cfg}
    doc.update(payload)
    _atomic_write(path, json.dumps(doc, sort_keys=True, indent=2,
                                   default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_csv(path: str, header: list, rows: list) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _out_dir(cfg: dict) -> str:
    d = _get(cfg, "outputs.dir", ".")
    os.makedirs(d, exist_ok=True)
    return d


def _maybe_svg(cfg: dict, name: str, draw) -> None:
    if not _get(cfg, "outputs.emit_svg", False):
        return
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "loghardy"
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    draw(ax)
    path = os.path.join(_out_dir(cfg), name)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# ---------------------------------------------------------------------------
# subcommands


def _solve_eigen(mesh, a: float, solver: dict):
    K = assembly.stiffness(mesh)
    Mw = assembly.hardy_mass(mesh, a)
    w = assembly.constraint_vector(mesh, a)
    return eigensolve.second_neumann_eigen(K, Mw, w, **solver)


def cmd_eigen(cfg: dict) -> int:
    a_list = _get(cfg, "a_list", [_weight_params(cfg).a])
    if not isinstance(a_list, list) or not a_list:
        raise ConfigError("a_list: must be a non-empty list")
    solver = _solver_opts(cfg)
    spec = _domain_spec(cfg)
    mesh = _build_mesh(cfg)

    def entry(a):
        a = float(a)
        res = _solve_eigen(mesh, a, solver)
        return a, res

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(entry, a_list))

    out = _out_dir(cfg)
    rows = [{"a": a, **res.to_json()} for a, res in results]
    write_json(os.path.join(out, "lambda.json"), {"results": rows}, cfg)
    a0, res0 = results[0]
    eigensolve.eigenvector_to_csv(mesh, res0.coefficients,
                                  os.path.join(out, "eigvec.csv"))

    status = 0 if all(r.converged for _, r in results) else 2
    if isinstance(spec, Disk):
        comp = []
        for a, res in results:
            oracle = min(eigensolve.radial_oracle_eigen(a, m, R=spec.radius)
                         for m in (1, 2, 3))
            comp.append({"a": a, "fem": res.lam, "oracle": oracle,
                         "rel_err": abs(res.lam - oracle) / abs(oracle)})
        write_json(os.path.join(out, "oracle_compare.json"),
                   {"comparison": comp}, cfg)
    _maybe_svg(cfg, "lambda.svg", lambda ax: (
        ax.plot([r["a"] for r in rows], [r["lambda"] for r in rows], "o-"),
        ax.set_xlabel("a"), ax.set_ylabel("lambda_a")))
    return status


def _beta_callable(spec):
    if isinstance(spec, (int, float)):
        return float(spec), f"constant {float(spec)}"
    if not isinstance(spec, dict):
        raise ConfigError("beta: must be a number or an object")
    kind = spec.get("type", "constant")
    if kind == "constant":
        v = float(spec.get("value", 1.0))
        return v, f"constant {v}"
    if kind == "piecewise":
        pieces = spec.get("pieces")
        if not isinstance(pieces, list) or not pieces:
            raise ConfigError("beta.pieces: must be a non-empty list of "
                              "[theta_lo, theta_hi, value]")
        arr = [(float(lo), float(hi), float(v)) for lo, hi, v in pieces]

        def beta(theta):
            th = np.mod(theta, 2.0 * math.pi)
            out = np.zeros_like(th)
            for lo, hi, v in arr:
                out = np.where((th >= lo) & (th < hi), v, out)
            return out

        return beta, f"piecewise ({len(arr)} pieces)"
    raise ConfigError(f"beta.type: unknown kind {kind!r}")


def cmd_robin(cfg: dict) -> int:
    params = _weight_params(cfg)
    a = params.a
    solver = _solver_opts(cfg)
    spec = _domain_spec(cfg)
    mesh = _build_mesh(cfg)
    beta, desc = _beta_callable(_get(cfg, "beta", 1.0))

    K = assembly.weighted_stiffness(mesh, a, 0.0)
    Mw = assembly.hardy_mass(mesh, a)
    Bb = assembly.boundary_mass(mesh, beta)
    res = eigensolve.robin_first_eigen(K, Bb, Mw, **solver)

    ones = np.ones(mesh.num_vertices)
    beta_integral = float(ones @ (Bb.matrix @ ones))
    v = res.coefficients
    scale = float(np.abs(v).max())
    sign_definite = bool(np.all(v >= -1e-8 * scale)
                         or np.all(v <= 1e-8 * scale))
    report = {"beta": desc, "lambda": res.lam,
              "beta_surface_integral": beta_integral,
              "sign_definite_eigenvector": sign_definite,
              "converged": res.converged, "iterations": res.iterations}
    if isinstance(spec, Disk) and isinstance(beta, float):
        R = spec.radius
        report["upper_bound"] = abs(beta) * R * math.log(a / R)
        report["bound_holds"] = res.lam <= report["upper_bound"] + 1e-6
    write_json(os.path.join(_out_dir(cfg), "robin.json"), report, cfg)
    return 0 if res.converged else 2


def cmd_admissible(cfg: dict) -> int:
    a_list = _get(cfg, "a_list", [1.01, 1.05, 1.1, 1.2, 1.5, 2.0])
    L_list = _get(cfg, "L_list", [0.5, 0.6, 0.7, 0.8, 0.9, 0.95])
    rows = []
    for a in a_list:
        for L in L_list:
            try:
                chk = admissible_check(float(a), float(L))
            except ValueError as exc:
                raise ConfigError(f"a_list/L_list: {exc}") from exc
            rows.append((float(a), float(L), chk.integral,
                         int(chk.admissible)))
    out = _out_dir(cfg)
    write_csv(os.path.join(out, "admissible.csv"),
              ["a", "L", "integral", "admissible"], rows)
    n_adm = sum(r[3] for r in rows)
    write_json(os.path.join(out, "admissible.json"),
               {"n_pairs": len(rows), "n_admissible": n_adm,
                "threshold": 8.0 * math.pi}, cfg)
    return 0


def cmd_sobolev(cfg: dict) -> int:
    entries = _get(cfg, "pAB_list")
    if entries is None:
        w = _weight_params(cfg)
        entries = [{"p": w.p, "A": w.A, "B": w.B}]
    if not isinstance(entries, list) or not entries:
        raise ConfigError("pAB_list: must be a non-empty list")
    base = _weight_params(cfg)
    mesh = _build_mesh(cfg)

    def entry(e):
        try:
            par = WeightParams(a=base.a, A=float(e["A"]), B=float(e["B"]),
                               p=float(e["p"]), gamma=base.gamma)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"pAB_list entry: {exc}") from exc
        est = analysis.sobolev_constant_estimate(mesh, par)
        return {"p": par.p, "A": par.A, "B": par.B,
                "c_estimate": est.c_estimate, "converged": est.converged}

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(entry, entries))

    out = _out_dir(cfg)
    write_json(os.path.join(out, "sobolev.json"), {"results": rows}, cfg)

    lam_list = _get(cfg, "lambda_list", [1.0, 0.5, 0.1, 0.02])
    srows = []
    for e in entries:
        par = WeightParams(a=base.a, A=float(e["A"]), B=float(e["B"]),
                           p=float(e["p"]), gamma=base.gamma)
        for lam in lam_list:
            srows.append((par.p, par.A, par.B, float(lam),
                          analysis.scaling_family_quotient(float(lam), par)))
    write_csv(os.path.join(out, "scaling.csv"),
              ["p", "A", "B", "lambda", "quotient"], srows)
    return 0 if all(r["converged"] for r in rows) else 2


def cmd_weights_scan(cfg: dict) -> int:
    params = _weight_params(cfg)
    g = _get(cfg, "grid", {})
    grid = GridSpec(n_centers=int(g.get("n_centers", 20)),
                    n_radii=int(g.get("n_radii", 20)),
                    r_min=float(g.get("r_min", 1e-6)),
                    r_max=float(g.get("r_max", 4.0)),
                    c_min=float(g.get("c_min", 1e-6)),
                    c_max=float(g.get("c_max", 4.0)),
                    n_rays=int(g.get("n_rays", 8)))
    quantities = _get(cfg, "quantities", ["muckenhoupt", "adams"])
    out = _out_dir(cfg)
    summary = {}
    for q in quantities:
        if q not in ("muckenhoupt", "adams"):
            raise ConfigError(f"quantities: unknown scan quantity {q!r}")
        rep = scan_sup(q, params, grid)
        rep.to_csv(os.path.join(out, f"scan_{q}.csv"))
        summary[q] = {"sup_estimate": rep.sup_estimate,
                      "argmax_center": list(rep.argmax[0]),
                      "argmax_radius": rep.argmax[1]}
    write_json(os.path.join(out, "scan.json"), {"scans": summary}, cfg)
    return 0


def cmd_asymptotics(cfg: dict) -> int:
    params = _weight_params(cfg)
    solver = _solver_opts(cfg)
    mesh = _build_mesh(cfg)
    res = _solve_eigen(mesh, params.a, solver)
    fit = analysis.asymptotic_exponent_fit(res, mesh, params.a)
    payload = {"lambda": res.lam, "converged": res.converged}
    payload.update(fit.to_json())
    write_json(os.path.join(_out_dir(cfg), "asymptotics.json"), payload, cfg)

    def draw(ax):
        r, u, _ = analysis._window_samples(mesh, res.coefficients,
                                           fit.r_window)
        mask = np.abs(u) > 0
        ax.plot(np.log(np.log(params.a / r[mask])),
                np.log(np.abs(u[mask])), ".")
        ax.set_xlabel("log log(a/r)")
        ax.set_ylabel("log |u|")

    _maybe_svg(cfg, "asymptotics.svg", draw)
    return 0 if res.converged else 2


def cmd_pencil(cfg: dict) -> int:
    params = _weight_params(cfg)
    a = params.a
    solver = _solver_opts(cfg)
    mesh = _build_mesh(cfg)
    eps_list = _get(cfg, "epsilons", [0.1, 0.5, 1.0])

    K = assembly.stiffness(mesh).matrix
    Mw = assembly.hardy_mass(mesh, a).matrix
    M0 = assembly.plain_mass(mesh).matrix
    B1 = assembly.boundary_mass(mesh, 1.0).matrix

    rows = []
    ok = True
    for eps in eps_list:
        eps = float(eps)
        hardy = eigensolve.pencil_max_eigen(Mw - (4.0 + eps) * K, M0,
                                            **solver)
        trace = eigensolve.pencil_max_eigen(B1 - eps * K, M0, **solver)
        ok = ok and hardy.converged and trace.converged
        rows.append((eps, hardy.lam, trace.lam))
    out = _out_dir(cfg)
    write_csv(os.path.join(out, "pencil.csv"),
              ["epsilon", "c_hardy", "c_trace"], rows)
    write_json(os.path.join(out, "pencil.json"),
               {"table": [{"epsilon": e, "c_hardy": ch, "c_trace": ct}
                          for e, ch, ct in rows]}, cfg)
    _maybe_svg(cfg, "pencil.svg", lambda ax: (
        ax.plot([r[0] for r in rows], [r[1] for r in rows], "o-",
                label="c_hardy"),
        ax.plot([r[0] for r in rows], [r[2] for r in rows], "s-",
                label="c_trace"),
        ax.legend(), ax.set_xlabel("epsilon")))
    return 0 if ok else 2


DISPATCH = {
    "eigen": cmd_eigen,
    "robin": cmd_robin,
    "admissible": cmd_admissible,
    "sobolev": cmd_sobolev,
    "weights-scan": cmd_weights_scan,
    "asymptotics": cmd_asymptotics,
    "pencil": cmd_pencil,
}


def run(command: str, cfg: dict) -> int:
    """Dispatch one experiment; returns the process exit status."""
    if command not in DISPATCH:
        raise ConfigError(f"unknown command {command!r}; "
                          f"expected one of {', '.join(COMMANDS)}")
    cfg_cmd = cfg.get("command")
    if cfg_cmd is not None and cfg_cmd != command:
        raise ConfigError(f"command: config says {cfg_cmd!r} but the "
                          f"command line says {command!r}")
    cfg = dict(cfg)
    cfg["command"] = command
    return DISPATCH[command](cfg)


def main(argv: list | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="loghardy",
        description="Eigenvalue and weighted-inequality experiments for the "
                    "critical Hardy potential.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True,
                        help="JSON experiment config")
    parser.add_argument("--set", dest="overrides", action="append",
                        default=[], metavar="KEY=VALUE",
                        help="override a dotted config path")
    parser.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides, args.out)
        return run(args.command, cfg)
    except ConfigError as exc:
        print(f"loghardy: config error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
