"""Configuration-driven command line for end-to-end pipeline runs.

Usage:  krylovflow <subcommand> --config <file.json> [--out DIR] [--quiet]

Subcommands: lanczos, evolve, bound, oracle, continuum, saturation,
filter, full.  The JSON config holds the model and run parameters; every
artifact is a deterministic CSV (17 significant digits, LF endings) with
a JSON sidecar echoing the config and version.  Exit codes: 0 success,
1 usage error, 2 numerical failure, 3 invariant violation.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .analysis import FilterConfig, filter_series, filtered_to_csv, \
    read_series_csv
from .bilanczos import BiLanczosConfig, bilanczos, check_open_structure, \
    coefficients_to_csv, project_dissipative_structure, read_coefficients
from .bound import bound_summary, bound_to_csv, dispersion_bound_check, \
    renormalized_bound_check, saturation_report
from .continuum import ContinuumSpec, continuum_vs_paper_report, \
    report_to_csv
from .exceptions import InvariantViolation, NumericalFailure
from .krylov_chain import direct_evolution_oracle, evolve_chain, moments
from .lindbladian import build_model_lindbladian, uniform_seed, vectorize
from .spin_algebra import ModelSpec

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_INVARIANT = 3

ORACLE_MAX_N = 4
STRUCTURE_COEFFS = 50   # leading coefficients used for structure verdicts

SUBCOMMANDS = ("lanczos", "evolve", "bound", "oracle", "continuum",
               "saturation", "filter", "full")


class UsageError(Exception):
    pass


def _as_model(node):
    try:
        return ModelSpec(N=int(node["N"]), g=float(node["g"]),
                         h=float(node["h"]),
                         alpha=float(node.get("alpha", 0.0)),
                         gamma=float(node.get("gamma", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad model block: {exc}")


def _as_bilanczos(node):
    node = node or {}
    try:
        return BiLanczosConfig(
            max_iter=node.get("max_iter"),
            breakdown_tol=float(node.get("breakdown_tol", 1e-10)),
            reorth_passes=int(node.get("reorth_passes", 2)))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad bilanczos block: {exc}")


def _as_filter(node):
    node = node or {}
    try:
        return FilterConfig(
            outlier_window=int(node.get("outlier_window", 9)),
            outlier_k=float(node.get("outlier_k", 3.0)),
            smooth_window=int(node.get("smooth_window", 7)))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad filter block: {exc}")


def _as_continuum(node):
    try:
        return ContinuumSpec(case=node["case"], alpha=float(node["alpha"]),
                             beta=float(node["beta"]),
                             c=float(node.get("c", 1.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad continuum block: {exc}")


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed config {path}: {exc}")
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    t_max = float(cfg.get("t_max", 10.0))
    n_samples = int(cfg.get("n_samples", 400))
    if t_max <= 0:
        raise UsageError("t_max must be positive")
    if n_samples < 3:
        raise UsageError("n_samples must be at least 3")
    return cfg


def _seed_vector(cfg, dim_d):
    kind = cfg.get("seed_kind", "uniform")
    if kind == "uniform":
        return uniform_seed(dim_d)
    if isinstance(kind, dict) and kind.get("kind") == "custom":
        path = kind.get("path")
        try:
            M = np.load(path)
        except OSError as exc:
            raise UsageError(f"cannot read seed matrix {path}: {exc}")
        if M.shape != (dim_d, dim_d):
            raise UsageError(
                f"seed matrix shape {M.shape} != ({dim_d}, {dim_d})")
        v = vectorize(M.astype(complex))
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise UsageError("seed matrix is zero")
        return v / nrm
    raise UsageError(f"unknown seed_kind {kind!r}")


class ArtifactWriter:
    """Writes artifacts plus sidecars; can roll back on failure."""

    def __init__(self, out_dir, cfg, command, quiet):
        self.out_dir = out_dir
        self.cfg = cfg
        self.command = command
        self.quiet = quiet
        self.written = []
        try:
            os.makedirs(out_dir, exist_ok=True)
            probe = os.path.join(out_dir, ".write_probe")
            with open(probe, "w") as fh:
                fh.write("")
            os.remove(probe)
        except OSError as exc:
            raise UsageError(f"output dir {out_dir} not writable: {exc}")

    def _sidecar(self, name, extra=None):
        meta = {"artifact": name, "command": self.command,
                "version": __version__, "config": self.cfg}
        if extra:
            meta.update(extra)
        return meta

    def write_text(self, name, text, extra=None):
        path = os.path.join(self.out_dir, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.written.append(path)
        side = path + ".json"
        with open(side, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self._sidecar(name, extra), fh, indent=2,
                      sort_keys=True)
            fh.write("\n")
        self.written.append(side)
        if not self.quiet:
            print(f"wrote {path}")

    def write_json(self, name, obj):
        self.write_text(name, json.dumps(obj, indent=2, sort_keys=True)
                        + "\n")

    def rollback(self):
        for path in self.written:
            try:
                os.remove(path)
            except OSError:
                pass
        self.written = []


def _t_grid(cfg):
    return np.linspace(0.0, float(cfg.get("t_max", 10.0)),
                       int(cfg.get("n_samples", 400)))


def _moments_csv(m):
    lines = ["t,C,P,M2,Ctilde"]
    for i in range(m.t.size):
        lines.append("%.17g,%.17g,%.17g,%.17g,%.17g" % (
            m.t[i], m.C[i], m.P[i], m.M2[i], m.Ctilde[i]))
    return "\n".join(lines) + "\n"


def _oracle_csv(t, mc, mo):
    # Zero-crossings (e.g. C at t = 0) are compared against a floor tied
    # to the series peak rather than the pointwise value.
    floor_C = 1e-12 * max(float(np.abs(mo.C).max()), 1e-300)
    floor_P = 1e-12 * max(float(np.abs(mo.P).max()), 1e-300)
    lines = ["t,C_chain,P_chain,C_direct,P_direct,relC,relP"]
    for i in range(t.size):
        relC = abs(mc.C[i] - mo.C[i]) / max(abs(mo.C[i]), floor_C)
        relP = abs(mc.P[i] - mo.P[i]) / max(abs(mo.P[i]), floor_P)
        lines.append("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g" % (
            t[i], mc.C[i], mc.P[i], mo.C[i], mo.P[i], relC, relP))
    return "\n".join(lines) + "\n"


def _run_lanczos(cfg, writer):
    model = _as_model(cfg.get("model", {}))
    L = build_model_lindbladian(model)
    seed = _seed_vector(cfg, model.dim)
    tri = bilanczos(L, seed, seed, _as_bilanczos(cfg.get("bilanczos")))
    n_struct = min(STRUCTURE_COEFFS, tri.K)
    report = check_open_structure(tri, n_coeffs=n_struct)
    writer.write_text("coefficients.csv", coefficients_to_csv(tri))
    writer.write_json("structure.json", {
        "label": report.label,
        "dissipative": report.dissipative,
        "n_coeffs": n_struct,
        "K": tri.K,
        "termination": tri.termination,
        "max_bc_diff": report.max_bc_diff,
        "max_abs_b": report.max_abs_b,
        "max_re_a": report.max_re_a,
        "max_im_a": report.max_im_a,
        "min_im_a": report.min_im_a,
        "residual_biortho": tri.residual_biortho,
        "residual_tridiag": tri.residual_tridiag,
    })
    return L, seed, tri


def _run_evolve(cfg, writer, tri):
    t = _t_grid(cfg)
    traj = evolve_chain(tri, t)
    m = moments(traj)
    writer.write_text("moments.csv", _moments_csv(m))
    return traj, m


def _run_bound(cfg, writer, tri, m):
    # The bound applies to the dissipative chain.  For open runs the
    # coefficients are projected onto the a = i|a|, b = c = |b| form and
    # re-evolved; closed runs already have psi = phi and are used as is.
    structure = check_open_structure(tri, n_coeffs=min(STRUCTURE_COEFFS,
                                                       tri.K))
    projected = structure.label != "closed structure"
    if projected:
        tri_b = project_dissipative_structure(tri)
        m = moments(evolve_chain(tri_b, _t_grid(cfg)))
    else:
        tri_b = tri
    b1 = tri_b.b[0]
    report = dispersion_bound_check(m, b1)
    renormalized_bound_check(m, b1)  # identity check; raises if broken
    writer.write_text("bound.csv", bound_to_csv(report))
    summary = bound_summary(report)
    summary["projected_structure"] = projected
    writer.write_json("bound_summary.json", summary)
    return report


def _run_oracle(cfg, writer, L, seed, tri, mc):
    model = _as_model(cfg.get("model", {}))
    if model.N > ORACLE_MAX_N:
        raise UsageError(
            f"oracle requires N <= {ORACLE_MAX_N} (got N = {model.N})")
    t = _t_grid(cfg)
    mo = direct_evolution_oracle(L, seed, tri, t)
    writer.write_text("oracle.csv", _oracle_csv(t, mc, mo))


def _run_continuum(cfg, writer):
    node = cfg.get("continuum")
    if node is None:
        raise UsageError("config has no continuum block")
    spec = _as_continuum(node)
    t = np.linspace(0.0, float(cfg.get("t_max", 3.0)),
                    int(cfg.get("n_samples", 400)))
    report = continuum_vs_paper_report(spec, t)
    writer.write_text("continuum.csv", report_to_csv(report))


def _run_saturation(cfg, writer):
    node = cfg.get("saturation") or {}
    report = saturation_report(
        alpha0=float(node.get("alpha0", 1.0)),
        gamma0=float(node.get("gamma0", 1.0)),
        K=int(node.get("K", 400)),
        t_max=float(node.get("t_max", 6.0)),
        n_samples=int(node.get("n_samples", 1201)))
    writer.write_text("saturation.csv", bound_to_csv(report))
    writer.write_json("saturation_summary.json", bound_summary(report))


def _run_filter(cfg, writer, tri=None):
    fcfg = _as_filter(cfg.get("filter"))
    src = cfg.get("coefficients_csv")
    if src is not None:
        try:
            with open(src, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read coefficients CSV {src}: {exc}")
        try:
            tri_in = read_coefficients(src)
        except Exception:
            series = read_series_csv(text)
            cleaned, smoothed, _ = filter_series(series, fcfg)
            writer.write_text("filtered.csv",
                              filtered_to_csv(series, cleaned, smoothed),
                              extra={"filter": fcfg.__dict__})
            return
    elif tri is not None:
        tri_in = tri
    else:
        raise UsageError("filter needs coefficients_csv or a lanczos run")
    for name, series in (("b_abs", np.abs(tri_in.b)),
                         ("a_im", np.asarray(tri_in.a).imag)):
        cleaned, smoothed, _ = filter_series(series, fcfg)
        writer.write_text(f"filtered_{name}.csv",
                          filtered_to_csv(series, cleaned, smoothed),
                          extra={"filter": fcfg.__dict__, "series": name})


def run_pipeline(cfg, command, out_dir, quiet=False):
    """Run one subcommand; returns the exit code."""
    writer = ArtifactWriter(out_dir, cfg, command, quiet)
    try:
        if command == "lanczos":
            _run_lanczos(cfg, writer)
        elif command == "evolve":
            _, _, tri = _run_lanczos(cfg, writer)
            _run_evolve(cfg, writer, tri)
        elif command == "bound":
            _, _, tri = _run_lanczos(cfg, writer)
            _, m = _run_evolve(cfg, writer, tri)
            _run_bound(cfg, writer, tri, m)
        elif command == "oracle":
            model = _as_model(cfg.get("model", {}))
            if model.N > ORACLE_MAX_N:
                raise UsageError(
                    f"oracle requires N <= {ORACLE_MAX_N} "
                    f"(got N = {model.N})")
            L, seed, tri = _run_lanczos(cfg, writer)
            _, mc = _run_evolve(cfg, writer, tri)
            _run_oracle(cfg, writer, L, seed, tri, mc)
        elif command == "continuum":
            _run_continuum(cfg, writer)
        elif command == "saturation":
            _run_saturation(cfg, writer)
        elif command == "filter":
            tri = None
            if cfg.get("coefficients_csv") is None:
                _, _, tri = _run_lanczos(cfg, writer)
            _run_filter(cfg, writer, tri)
        elif command == "full":
            L, seed, tri = _run_lanczos(cfg, writer)
            _, m = _run_evolve(cfg, writer, tri)
            _run_bound(cfg, writer, tri, m)
            model = _as_model(cfg.get("model", {}))
            skipped = []
            if model.N <= ORACLE_MAX_N:
                _run_oracle(cfg, writer, L, seed, tri, m)
            else:
                skipped.append("oracle (N > %d)" % ORACLE_MAX_N)
            if cfg.get("continuum") is not None:
                _run_continuum(cfg, writer)
            else:
                skipped.append("continuum (no continuum block)")
            _run_saturation(cfg, writer)
            _run_filter(cfg, writer, tri)
            writer.write_json("full_summary.json",
                              {"skipped": skipped, "completed": True})
        else:
            raise UsageError(f"unknown subcommand {command!r}")
    except UsageError as exc:
        writer.rollback()
        _emit_error(out_dir, command, "usage", str(exc), quiet)
        return EXIT_USAGE
    except NumericalFailure as exc:
        writer.rollback()
        _emit_error(out_dir, command, "numerical", str(exc), quiet)
        return EXIT_NUMERICAL
    except InvariantViolation as exc:
        writer.rollback()
        _emit_error(out_dir, command, "invariant", str(exc), quiet)
        return EXIT_INVARIANT
    return EXIT_OK


def _emit_error(out_dir, command, kind, message, quiet):
    payload = {"error": kind, "command": command, "message": message,
               "version": __version__}
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text, file=sys.stderr)
    try:
        with open(os.path.join(out_dir, "error.json"), "w",
                  encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    except OSError:
        pass


def build_parser():
    parser = argparse.ArgumentParser(
        prog="krylovflow",
        description="Krylov-complexity pipelines for dissipative spin "
                    "chains")
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True,
                        help="JSON configuration file")
    parser.add_argument("--out", default=None,
                        help="output directory (overrides config)")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress messages")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = load_config(args.config)
        out_dir = args.out or cfg.get("output_dir", ".")
        return run_pipeline(cfg, args.command, out_dir, quiet=args.quiet)
    except UsageError as exc:
        print(json.dumps({"error": "usage", "message": str(exc),
                          "version": __version__}, indent=2,
                         sort_keys=True), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
