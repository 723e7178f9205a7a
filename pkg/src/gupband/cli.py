"""Command-line front end: each subcommand writes CSV tables for one scenario.

Settings come from built-in defaults, then an optional key=value config
file, then command-line flags. Unknown keys are rejected. Every CSV starts
with `#` lines echoing the resolved configuration, and output is fully
deterministic. Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from . import boxspectrum as bx
from . import csvio
from .deformation import BUILTIN_NAMES, ModelParams, builtin, is_admissible
from .numerics import DomainError, NumericalError
from .potentials import (delta_reconstructed_closed_form, delta_samples, simple_step_samples,
                         step_reconstruction_analytic, step_samples)
from .sampling import BandlimitedFunction, Grid, SampledFunction
from .wavepacket import (Moments, WavepacketSpec, default_x_grid, diagnostics, evolve,
                         fit_velocity, gaussian_approx_density)


def _opt_float(text: str) -> Optional[float]:
    return None if text.lower() in ("", "none", "auto") else float(text)


def _float_list(text: str) -> List[float]:
    return [float(t) for t in text.split(",") if t.strip()]


@dataclass(frozen=True)
class Option:
    parse: Callable
    default: object
    help: str


COMMON = {
    "deformation": Option(str, "kmm", f"deformation family ({', '.join(BUILTIN_NAMES)})"),
    "alpha": Option(float, 0.02, "deformation scale alpha"),
    "hbar": Option(float, 1.0, "reduced Planck constant"),
    "mass": Option(float, 1.0, "particle mass"),
    "K": Option(_opt_float, None, "band edge (required for identity, else derived)"),
    "out": Option(str, ".", "output directory"),
}

SCENARIO: Dict[str, Dict[str, Option]] = {
    "delta": {
        "V0": Option(float, 1.0, "strength of V0 a delta(x)"),
        "window": Option(int, 50, "sample window half-width in grid points"),
        "points": Option(int, 401, "reconstruction points on [-5a, 5a]"),
    },
    "step": {
        "V0": Option(float, 1.0, "height of V0 Theta(-x)"),
        "window": Option(int, 500, "sample window half-width in grid points"),
        "points": Option(int, 401, "reconstruction points on [-5a, 5a]"),
    },
    "wavepacket": {
        "k_bar": Option(float, 0.3, "mean wavevector as a fraction of K"),
        "sigma_p": Option(float, 0.02, "momentum width as a fraction of hbar K"),
        "t_max": Option(float, 2.0, "final time in units of tau0"),
        "n_times": Option(int, 9, "number of equally spaced times"),
        "points": Option(int, 801, "density points per snapshot"),
    },
    "box": {
        "V0": Option(float, math.inf, "well depth (inf for the infinite well)"),
        "L": Option(float, 1.0, "well width"),
        "KL": Option(_opt_float, 1e4, "band edge times width; sets K (and alpha)"),
        "levels": Option(int, 4, "number of levels"),
    },
    "oracle": {
        "kappa_L": Option(_float_list, [100.0, 300.0, 1000.0], "comma-separated sqrt(2 m V0) L/hbar values"),
        "L": Option(float, 1.0, "well width"),
        "KL": Option(_opt_float, None, "band edge times width (default: largest the basis cap allows)"),
        "levels": Option(int, 1, "number of levels compared"),
        "basis_size": Option(int, bx.ORACLE_MAX_BASIS, "cap on the number of plane waves"),
        "domain_factor": Option(float, bx.ORACLE_DOMAIN_FACTOR, "periodic domain length over L"),
        "rel_tol": Option(float, 1e-6, "domain-doubling convergence threshold"),
    },
    "deformations": {},
}


class ConfigError(DomainError):
    pass


def read_config_file(path: str) -> Dict[str, str]:
    """key = value lines; blank lines and `#` comments are skipped."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            out[key.strip()] = val.strip()
    return out


def resolve_config(command: str, file_values: Dict[str, str], flag_values: Dict[str, str]) -> Dict[str, object]:
    schema = {**COMMON, **SCENARIO[command]}
    unknown = sorted(set(file_values) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    cfg = {k: opt.default for k, opt in schema.items()}
    for source in (file_values, flag_values):
        for key, text in source.items():
            try:
                cfg[key] = schema[key].parse(text)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None
    if cfg["deformation"] not in BUILTIN_NAMES:
        raise ConfigError(f"unknown deformation {cfg['deformation']!r}")
    return cfg


def _params(cfg, K=None) -> ModelParams:
    d = builtin(cfg["deformation"])
    K = cfg["K"] if K is None else K
    if K is not None and not d.needs_explicit_K and cfg["K"] is None:
        return ModelParams.from_K(d, K, cfg["hbar"], cfg["mass"])
    return ModelParams.for_deformation(d, cfg["alpha"], cfg["hbar"], cfg["mass"], K)


def _meta(command, cfg, p: Optional[ModelParams] = None):
    meta = {"command": command}
    meta.update({k: (",".join(csvio.fmt(x) for x in v) if isinstance(v, list) else v)
                 for k, v in cfg.items() if v is not None})
    if p is not None:
        meta.update({"alpha_resolved": p.alpha, "K_resolved": p.K, "a": p.a})
    return meta


def _path(cfg, name):
    return os.path.join(cfg["out"], name)


def cmd_delta(cfg) -> List[str]:
    p = _params(cfg)
    a, V0 = p.a, cfg["V0"]
    g = Grid.centered(a, cfg["window"])
    src = SampledFunction(g, delta_samples(V0, g))
    meta = _meta("delta", cfg, p)
    files = [_path(cfg, "delta_samples.csv"), _path(cfg, "delta_reconstruction.csv"),
             _path(cfg, "delta_summary.csv")]
    src.to_csv(files[0], meta)
    x = np.linspace(-5 * a, 5 * a, cfg["points"])
    num = np.asarray(BandlimitedFunction(src)(x))
    closed = np.asarray(delta_reconstructed_closed_form(V0, a, x))
    csvio.write_table(files[1], ["x", "x_over_a", "numeric", "closed_form", "difference"],
                      zip(x, x / a, num, closed, num - closed), meta)
    spots = [("max_abs_difference", float(np.max(np.abs(num - closed))))]
    for label, xs in (("0", 0.0), ("a/2", a / 2)):
        spots.append((f"numeric({label})", float(BandlimitedFunction(src)(xs))))
        spots.append((f"closed_form({label})", float(delta_reconstructed_closed_form(V0, a, xs))))
    csvio.write_table(files[2], ["quantity", "value"], spots, meta)
    print(f"delta: max |numeric - closed form| = {spots[0][1]:.3e}")
    return files


def cmd_step(cfg) -> List[str]:
    p = _params(cfg)
    a, V0, K = p.a, cfg["V0"], p.K
    g = Grid.centered(a, cfg["window"])
    vbar = step_samples(V0, g)
    idx = g.indices
    mirror = vbar[::-1]
    meta = _meta("step", cfg, p)
    files = [_path(cfg, "step_samples.csv"), _path(cfg, "step_reconstruction.csv"),
             _path(cfg, "step_summary.csv")]
    csvio.write_table(files[0], ["n", "x_n", "Vbar", "symmetry"],
                      zip(idx, g.points, vbar, vbar + mirror - V0), meta)
    x = np.linspace(-5 * a, 5 * a, cfg["points"])
    simple = np.asarray(BandlimitedFunction(simple_step_samples(V0, g))(x))
    maxloc = np.asarray(BandlimitedFunction(SampledFunction(g, vbar))(x))
    si = np.asarray(step_reconstruction_analytic(V0, K, x))
    csvio.write_table(files[1], ["x", "x_over_a", "simple_reconstruction", "si_curve", "difference",
                                 "maxloc_reconstruction"],
                      zip(x, x / a, simple, si, simple - si, maxloc), meta)
    v0 = float(vbar[idx == 0][0]) if np.any(idx == 0) else math.nan
    summary = [
        ("Vbar_0_over_V0", v0 / V0 if V0 else math.nan),
        ("strictly_monotone", bool(np.all(np.sign(V0) * np.diff(vbar) < 0))),
        ("max_symmetry_residual", float(np.max(np.abs(vbar + mirror - V0)))),
        ("max_abs_simple_minus_si", float(np.max(np.abs(simple - si)))),
    ]
    csvio.write_table(files[2], ["quantity", "value"], summary, meta)
    print(f"step: Vbar_0/V0 = {summary[0][1]!r}, max |simple - Si| = {summary[3][1]:.3e}")
    return files


def cmd_wavepacket(cfg) -> List[str]:
    d = builtin(cfg["deformation"])
    p = _params(cfg)
    w = WavepacketSpec(cfg["k_bar"] * p.K, cfg["sigma_p"] * p.hbar * p.K)
    w.validate(p)
    diag = diagnostics(w, d, p)
    times = np.linspace(0.0, cfg["t_max"] * diag.tau0, cfg["n_times"])
    meta = _meta("wavepacket", cfg, p)
    files = [_path(cfg, "wavepacket_moments.csv"), _path(cfg, "wavepacket_density.csv"),
             _path(cfg, "wavepacket_summary.csv")]
    ms, dens = [], []
    for t in times:
        x = default_x_grid(diag, t, cfg["points"])
        rho = np.abs(evolve(w, d, p, x, t)) ** 2
        nrm = float(np.trapezoid(rho, x))
        c = float(np.trapezoid(x * rho, x)) / nrm
        var = float(np.trapezoid((x - c) ** 2 * rho, x)) / nrm
        ms.append(Moments(t, nrm, c, var))
        gauss = gaussian_approx_density(w, d, p, x, t)
        dens.extend(zip(np.full(x.size, t), x, rho, gauss))
    csvio.write_table(files[0], ["t", "t_over_tau0", "norm", "center", "analytic_center",
                                 "variance", "analytic_variance"],
                      [(m.t, m.t / diag.tau0, m.norm, m.center, diag.v_bar * m.t, m.variance,
                        diag.sigma_x2(m.t)) for m in ms], meta)
    csvio.write_table(files[1], ["t", "x", "density", "gaussian_approx"], dens, meta)
    v_fit = fit_velocity(ms)
    summary = [
        ("p_bar", diag.p_bar), ("f_bar", diag.f_bar),
        ("v_bar_over_v_classical", diag.f_bar), ("tau_over_tau0", diag.tau / diag.tau0),
        ("fitted_velocity", v_fit), ("v_bar", diag.v_bar),
        ("max_norm_drift", max(abs(m.norm - ms[0].norm) for m in ms)),
    ]
    csvio.write_table(files[2], ["quantity", "value"], summary, meta)
    print(f"wavepacket: v/v_classical = {diag.f_bar:.6g}, tau/tau0 = {diag.tau / diag.tau0:.6g}")
    return files


def cmd_box(cfg) -> List[str]:
    d = builtin(cfg["deformation"])
    L = cfg["L"]
    p = _params(cfg, None if cfg["KL"] is None else cfg["KL"] / L)
    w = bx.WellSpec(cfg["V0"], L, cfg["levels"])
    rep = bx.shift_report(w, d, p)
    meta = _meta("box", cfg, p)
    meta.update({k: v for k, v in rep.params.items() if k not in meta})
    files = [_path(cfg, "box_shifts.csv"), _path(cfg, "box_orders.csv")]
    cols = ["n", "branch", "k", "eps", "R_h", "h_nn", "v_nn", "R_v", "t_nn", "R_t",
            "t_nn_approx", "R_t_cosine", "I_c_plus", "I_c_plus_expansion"]
    rows = [[getattr(r, c) for c in cols] for r in rep.levels]
    footer = [("R_v_avg", rep.R_v_avg), ("R_t_avg", rep.R_t_avg),
              ("four_over_KL_pi", rep.average_target)]
    csvio.write_table(files[0], cols, rows, meta, footer)
    table = bx.order_of_magnitude_table()
    csvio.write_table(files[1], ["L_m", "lP_over_L_squared", "inverse_KL", "lP_over_L"],
                      [(r.L, r.lP_over_L_sq, r.inv_KL, r.lP_over_L) for r in table],
                      {"command": "box", "planck_length_m": bx.PLANCK_LENGTH})
    print(f"box: R_v_avg = {rep.R_v_avg:.6e}, R_t_avg = {rep.R_t_avg:.6e}, "
          f"4/(KL pi) = {rep.average_target:.6e}")
    return files


def cmd_oracle(cfg) -> List[str]:
    d = builtin(cfg["deformation"])
    L = cfg["L"]
    KL = cfg["KL"]
    if KL is None:
        K = bx.max_oracle_K(L, cfg["domain_factor"], cfg["basis_size"])
    else:
        K = KL / L
    p = _params(cfg, K)
    rows = []
    for kl in cfg["kappa_L"]:
        w = bx.WellSpec.from_kappa_L(kl, L, p, cfg["levels"])
        res = bx.brute_force_oracle(w, d, p, cfg["basis_size"], cfg["domain_factor"] * L,
                                    strict=False, rel_tol=cfg["rel_tol"])
        for c in bx.compare_with_first_order(w, d, p, res):
            rows.append((kl, c.n, c.eps, c.oracle_energy, c.oracle_shift, c.first_order,
                         c.rel_diff, res.basis_size, res.domain_length, res.params.K * L,
                         res.max_rel_change, res.converged))
    meta = _meta("oracle", cfg, p)
    files = [_path(cfg, "oracle_comparison.csv")]
    csvio.write_table(files[0], ["kappa_L", "n", "eps", "oracle_energy", "oracle_shift",
                                 "first_order", "rel_diff", "basis_size", "domain_length", "KL",
                                 "max_rel_change", "converged"], rows, meta)
    for r in rows:
        flag = "" if r[-1] else "  (NOT CONVERGED)"
        print(f"oracle: kappa_L = {r[0]:g}, n = {r[1]}: rel diff = {r[6]:.3e}{flag}")
    return files


def cmd_deformations(cfg) -> List[str]:
    rows = []
    for name in BUILTIN_NAMES:
        d = builtin(name)
        rep = is_admissible(d)
        rows.append((name, d.f1, d.f2, d.F_infinity, rep.box_admissible,
                     rep.maxloc_energy_finite, rep.faster_than_quadratic, bool(rep)))
    path = _path(cfg, "deformations.csv")
    cols = ["name", "f1", "f2", "F_infinity", "box_admissible", "maxloc_energy_finite",
            "faster_than_quadratic", "admissible"]
    csvio.write_table(path, cols, rows, {"command": "deformations"})
    for r in rows:
        print(",".join(csvio.fmt(v) for v in r))
    return [path]


COMMANDS = {"delta": cmd_delta, "step": cmd_step, "wavepacket": cmd_wavepacket,
            "box": cmd_box, "oracle": cmd_oracle, "deformations": cmd_deformations}


HELP = {
    "delta": "smeared delta: samples and reconstruction vs closed form",
    "step": "step potential: maxloc samples, simple reconstruction, Si curve",
    "wavepacket": "free Gaussian packet: moments vs analytic drift and spread",
    "box": "square-well shifts and the order-of-magnitude table",
    "oracle": "plane-wave diagonalization vs first-order shifts",
    "deformations": "built-in families and their admissibility",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gupband", description="Bandlimited quantum mechanics with a GUP cutoff.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", help="key = value file; flags override it")
        for key, opt in {**COMMON, **SCENARIO[name]}.items():
            sp.add_argument(f"--{key}", dest=f"opt_{key}", metavar=key.upper(),
                            help=f"{opt.help} (default {opt.default!r})")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        flags = {k[4:]: v for k, v in vars(args).items() if k.startswith("opt_") and v is not None}
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve_config(args.command, file_values, flags)
        os.makedirs(cfg["out"], exist_ok=True)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            COMMANDS[args.command](cfg)
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
