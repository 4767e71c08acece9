"""Command line front end: SNR sweeps, figure data and asymptotic reports."""

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import asymptotic, exact, mcsim
from .errors import ConvergenceError, DegenerateEigenvaluesError, PoleError
from .model import CorrelationSpec, DistortionCurve, SystemConfig, db_to_linear, snr_grid_db

log = logging.getLogger("distortion_lab")

EXIT_USAGE = 2
EXIT_NUMERIC = 3
MODES = ("exact", "asymptotic", "montecarlo")
NUMERIC_ERRORS = (ArithmeticError, PoleError, DegenerateEigenvaluesError)
FIGURES = ("fig1", "fig2", "fig3", "fig4a", "fig4b")

DEFAULTS = {
    "ps": 1.0,
    "corr": "none",
    "snr_db": "0:30:2",
    "modes": "exact,asymptotic",
    "mc_n": 10_000,
    "seed": 0,
}


class UsageError(Exception):
    pass


class NumericFailure(Exception):
    def __init__(self, snr_db, mode, cause):
        super().__init__(f"numerical failure at snr_db={snr_db:g}, mode={mode}: {cause}")


def read_config(path):
    """Flat `key = value` file; blank lines and '#' comments are ignored."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _merged(args, keys):
    cfg_file = read_config(args.config) if getattr(args, "config", None) else {}
    unknown = set(cfg_file) - set(keys)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    vals = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is None:
            v = cfg_file.get(k, DEFAULTS.get(k))
        vals[k] = v
    return vals


def _system(vals):
    try:
        if vals["nt"] is None or vals["nr"] is None or vals["eta"] is None:
            raise UsageError("--nt, --nr and --eta are required")
        cfg = SystemConfig(int(vals["nt"]), int(vals["nr"]), float(vals["eta"]), float(vals["ps"]))
        corr = CorrelationSpec.parse(str(vals["corr"]))
        if corr.kind == "eigenvalues":
            corr.sigma(cfg.n_min)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return cfg, corr


def _parse_grid(text):
    try:
        start, stop, step = (float(p) for p in str(text).split(":"))
        return snr_grid_db(start, stop, step)
    except ValueError as exc:
        raise UsageError(f"bad --snr-db {text!r}: expected start:stop:step ({exc})") from None


def _parse_modes(text):
    modes = [m.strip() for m in str(text).split(",") if m.strip()]
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise UsageError(f"--modes must be a comma list drawn from {', '.join(MODES)}")
    return modes


def _asy_value(form, rho):
    # the log2 factor is undefined at or below 0 dB
    if form.log_power and rho <= 1:
        return math.nan
    return asymptotic.ed_asymptotic(form, rho)


def compute_curve(cfg, corr, grid_db, modes, mc_n=10_000, seed=0):
    """Evaluate the requested modes on a dB grid; raises NumericFailure."""
    rhos = db_to_linear(grid_db)
    cols = {}
    if "exact" in modes:
        vals = []
        for db, rho in zip(grid_db, rhos):
            try:
                vals.append(exact.ed_exact(cfg, float(rho), corr))
            except NUMERIC_ERRORS as exc:
                raise NumericFailure(db, "exact", exc) from exc
        for k in range(1, len(vals)):
            if vals[k] > vals[k - 1] * (1 + 1e-9):
                raise NumericFailure(grid_db[k], "exact", "curve increased with SNR")
        cols["ed_exact"] = vals
    if "asymptotic" in modes:
        try:
            form = asymptotic.distortion_factor(cfg, corr)
        except NUMERIC_ERRORS as exc:
            raise NumericFailure(grid_db[0], "asymptotic", exc) from exc
        cols["ed_asymptotic"] = [_asy_value(form, float(r)) for r in rhos]
    if "montecarlo" in modes:
        means, errs = [], []
        for db, rho in zip(grid_db, rhos):
            try:
                est = mcsim.mc_expected_distortion(cfg, corr, float(rho), mc_n, seed)
            except NUMERIC_ERRORS as exc:
                raise NumericFailure(db, "montecarlo", exc) from exc
            means.append(est.mean)
            errs.append(est.std_error)
        cols["ed_mc"] = means
        cols["mc_std_error"] = errs
    return DistortionCurve(snr_db=grid_db, **cols)


def cmd_sweep(args):
    vals = _merged(args, ("nt", "nr", "eta", "ps", "corr", "snr_db", "modes", "mc_n", "seed", "out"))
    cfg, corr = _system(vals)
    grid = _parse_grid(vals["snr_db"])
    modes = _parse_modes(vals["modes"])
    try:
        mc_n, seed = int(vals["mc_n"]), int(vals["seed"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if "montecarlo" in modes and mc_n < 100:
        raise UsageError("--mc-n must be at least 100")
    if not 0 <= seed < 2 ** 64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    curve = compute_curve(cfg, corr, grid, modes, mc_n, seed)
    if vals["out"]:
        curve.write_csv(vals["out"])
        log.info("wrote %s", vals["out"])
    else:
        sys.stdout.write(curve.to_csv())
    return curve


def asymptotic_report(cfg, corr):
    reg = asymptotic.scbr_regime(cfg)
    form = asymptotic.distortion_factor(cfg, corr)
    try:
        dsep = asymptotic.sep_distortion_exponent(cfg)
    except ValueError:
        dsep = None
    return {
        "regime": reg.kind.value,
        "l": reg.partition_l,
        "delta": form.delta,
        "mu": form.mu,
        "log_power": form.log_power,
        "delta_sep": dsep,
    }


def format_report(rep):
    parts = [rep["regime"]]
    if rep["regime"] == "MSCBR":
        parts.append(f"l={rep['l']}")
    parts += [f"Δ*={rep['delta']:.10g}", f"μ*={rep['mu']:.10g}", f"ε={rep['log_power']}"]
    if rep["delta_sep"] is not None:
        parts.append(f"Δ*_sep={rep['delta_sep']:.10g}")
    line = ", ".join(parts)
    if rep["log_power"]:
        line += "  [log2(rho) factor present: ED_asy = μ* log2(ρ) ρ^-Δ*]"
    return line


def cmd_asymptotic(args):
    vals = _merged(args, ("nt", "nr", "eta", "ps", "corr"))
    cfg, corr = _system(vals)
    try:
        rep = asymptotic_report(cfg, corr)
    except NUMERIC_ERRORS as exc:
        raise NumericFailure(math.inf, "asymptotic", exc) from exc
    print(format_report(rep))
    print(json.dumps(rep, sort_keys=True))
    return rep


# ---- figures -------------------------------------------------------------

def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "distortion-lab"
    plt.rcParams["svg.fonttype"] = "none"
    return plt


def _save_svg(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})


def _write_rows(path, header, rows):
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else "%.17g" % v for v in row) + "\n")


def figure_fig1(out, mc_n, seed):
    eta, db = 4.0, 30.0
    rho = float(db_to_linear(db))
    header = ["fixed_side", "n_varying", "n_t", "n_r", "delta", "mu", "ed_exact", "ed_asymptotic"]
    if mc_n:
        header += ["ed_mc", "mc_std_error"]
    rows = []
    for side in ("nt", "nr"):
        for n in range(1, 9):
            nt, nr = (5, n) if side == "nt" else (n, 5)
            cfg = SystemConfig(nt, nr, eta)
            try:
                form = asymptotic.distortion_factor_uncorrelated(cfg)
                row = [side + "=5", n, nt, nr, form.delta, form.mu,
                       exact.ed_exact_uncorrelated(cfg, rho), asymptotic.ed_asymptotic(form, rho)]
                if mc_n:
                    est = mcsim.mc_expected_distortion(cfg, None, rho, mc_n, seed)
                    row += [est.mean, est.std_error]
            except NUMERIC_ERRORS as exc:
                raise NumericFailure(db, f"fig1 {nt}x{nr}", exc) from exc
            rows.append(row)
    _write_rows(out / "fig1.csv", header, rows)

    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for side, style in (("nt=5", "o-"), ("nr=5", "s--")):
        sel = [r for r in rows if r[0] == side]
        ns = [r[1] for r in sel]
        ax1.plot(ns, [r[4] for r in sel], style, label=side.replace("n", "N_"))
        ax2.semilogy(ns, [r[6] for r in sel], style, label=f"exact, {side}")
        ax2.semilogy(ns, [r[7] for r in sel], ":", label=f"asymptotic, {side}")
        if mc_n:
            ax2.semilogy(ns, [r[8] for r in sel], "x", label=f"MC, {side}")
    ax1.set_xlabel("antennas on the varying side")
    ax1.set_ylabel("distortion exponent")
    ax2.set_xlabel("antennas on the varying side")
    ax2.set_ylabel("expected distortion at 30 dB")
    ax1.legend()
    ax2.legend(fontsize="small")
    fig.tight_layout()
    _save_svg(fig, out / "fig1.svg")
    plt.close(fig)


def figure_fig2(out, mc_n, seed):
    grid = snr_grid_db(0, 40, 1)
    rows = []
    for db in grid:
        rho = float(db_to_linear(db))
        alm, sm = mcsim.ed_alm(rho), mcsim.ed_sm(rho)
        rows.append([db, alm, sm, alm - sm, alm / sm, (2.0 / 3.0) * rho ** -2, 8.0 * rho ** -3])
    header = ["snr_db", "ed_alm", "ed_sm", "difference", "ratio", "ed_alm_asymptotic", "ed_sm_asymptotic"]
    _write_rows(out / "fig2.csv", header, rows)

    plt = _pyplot()
    a = np.array(rows)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.semilogy(a[:, 0], a[:, 1], "-", label="ALM")
    ax1.semilogy(a[:, 0], a[:, 2], "--", label="SM")
    ax1.semilogy(a[:, 0], a[:, 5], ":", label="ALM asymptote")
    ax1.semilogy(a[:, 0], a[:, 6], "-.", label="SM asymptote")
    ax1.set_xlabel("SNR (dB)")
    ax1.set_ylabel("expected distortion")
    ax1.legend()
    rho = db_to_linear(a[:, 0])
    ax2.loglog(rho, a[:, 4], "-")
    ax2.set_xlabel("SNR (linear)")
    ax2.set_ylabel("ED_ALM / ED_SM")
    fig.tight_layout()
    _save_svg(fig, out / "fig2.svg")
    plt.close(fig)


def _plot_curves(path, curves, title):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, c in curves:
        line, = ax.semilogy(c.snr_db, c.ed_exact, "-", label=f"exact {label}".strip())
        if c.ed_asymptotic is not None:
            ax.semilogy(c.snr_db, c.ed_asymptotic, "--", color=line.get_color())
        if c.ed_mc is not None:
            ax.semilogy(c.snr_db, c.ed_mc, "o", mfc="none", color=line.get_color())
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("expected distortion")
    ax.set_title(title)
    ax.legend(fontsize="small")
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)


def figure_fig3(out, mc_n, seed):
    cfg = SystemConfig(1, 2, 0.99)
    modes = ["exact", "asymptotic"] + (["montecarlo"] if mc_n else [])
    curve = compute_curve(cfg, CorrelationSpec.uncorrelated(), snr_grid_db(0, 30, 2), modes, mc_n, seed)
    curve.write_csv(out / "fig3.csv")
    _plot_curves(out / "fig3.svg", [("", curve)], "N_t=1, N_r=2, eta=0.99")


def _figure_fig4(name, cfg, out, mc_n, seed):
    grid = snr_grid_db(0, 40, 2)
    modes = ["exact", "asymptotic"] + (["montecarlo"] if mc_n else [])
    curves = []
    for r in (0.0, 0.3, 0.5, 0.9, 0.99):
        corr = CorrelationSpec.exponential(r) if r > 0 else CorrelationSpec.uncorrelated()
        curves.append((r, compute_curve(cfg, corr, grid, modes, mc_n, seed)))
    header = ["r"] + curves[0][1].columns
    rows = []
    for r, c in curves:
        for k in range(len(grid)):
            rows.append(["%g" % r] + [getattr(c, col)[k] for col in c.columns])
    _write_rows(out / f"{name}.csv", header, rows)
    _plot_curves(out / f"{name}.svg", [(f"r={r:g}", c) for r, c in curves],
                 f"N_t={cfg.n_t}, N_r={cfg.n_r}, eta={cfg.eta:g}")


def figure_fig4a(out, mc_n, seed):
    _figure_fig4("fig4a", SystemConfig(4, 2, 10.0), out, mc_n, seed)


def figure_fig4b(out, mc_n, seed):
    _figure_fig4("fig4b", SystemConfig(2, 2, 0.6657), out, mc_n, seed)


def cmd_figure(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mc_n = 0 if args.no_mc else args.mc_n
    if mc_n and mc_n < 100:
        raise UsageError("--mc-n must be at least 100")
    globals()[f"figure_{args.name}"](out, mc_n, args.seed)
    log.info("wrote %s/%s.csv and .svg", out, args.name)


# ---- entry point ----------------------------------------------------------

def _add_system_flags(p):
    p.add_argument("--config", help="flat key = value file; flags override its values")
    p.add_argument("--nt", type=int)
    p.add_argument("--nr", type=int)
    p.add_argument("--eta", type=float, help="source-to-channel bandwidth ratio")
    p.add_argument("--ps", type=float, help="source power (default 1)")
    p.add_argument("--corr", help="none | exp:<r> | eig:<v1,v2,...>")


def build_parser():
    parser = argparse.ArgumentParser(prog="distortion-lab",
                                     description="Optimum expected distortion of outage-free MIMO links.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="evaluate distortion over an SNR grid and write CSV")
    _add_system_flags(sw)
    sw.add_argument("--snr-db", dest="snr_db", help="start:stop:step in dB (default 0:30:2)")
    sw.add_argument("--modes", help="comma list of exact, asymptotic, montecarlo")
    sw.add_argument("--mc-n", dest="mc_n", type=int, help="Monte Carlo realizations per point")
    sw.add_argument("--seed", type=int)
    sw.add_argument("--out", help="CSV path (stdout if omitted)")
    sw.set_defaults(func=cmd_sweep)

    fg = sub.add_parser("figure", help="regenerate the data and plot for one figure")
    fg.add_argument("name", choices=FIGURES)
    fg.add_argument("--out", dest="out_dir", default=".", help="output directory")
    fg.add_argument("--mc-n", dest="mc_n", type=int, default=10_000)
    fg.add_argument("--no-mc", action="store_true", help="skip Monte Carlo columns")
    fg.add_argument("--seed", type=int, default=0)
    fg.set_defaults(func=cmd_figure)

    asy = sub.add_parser("asymptotic", help="print regime, exponent and factor")
    _add_system_flags(asy)
    asy.set_defaults(func=cmd_asymptotic)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"distortion-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        print(f"distortion-lab: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConvergenceError as exc:
        print(f"distortion-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
