"""Command line front end.

Subcommands:
  simulate   write per-trajectory CSVs (t, S, Y)
  msd        ensemble, time-averaged, or analytic MSD curves, optional fit
  kernel     tabulate the memory kernel and Laplace-exponent diagnostics
  figures    emit the plot-data bundles for the four standard figures

Every run writes a manifest.json recording the package version, the full
configuration (minus output directory and worker count, which do not affect
content), the seed derivation scheme, and the list of files produced.
Outputs are byte-reproducible for a fixed seed regardless of worker count.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import json
import logging
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analytics import (fit_power_law, match_gamma_to_tempered_stable,
                        memory_kernel, msd_analytic, msd_ensemble,
                        msd_time_avg)
from .distributions import (GammaSpec, StableSpec, TemperedStableSpec,
                            levy_exponent, make_spec, pdf_gamma, pdf_stable,
                            pdf_tempered_stable)
from .errors import ConfigError, SubdiffError
from .subordination import simulate_ensemble

log = logging.getLogger("subdiff")

OUT_ENV_VAR = "SUBDIFF_OUT"
_COMMANDS = ("simulate", "msd", "kernel", "figures")
_MODES = ("ensemble", "timeavg", "analytic")
_FAMILIES = ("stable", "tempered_stable", "gamma")

SEED_SCHEME = ("streams are PCG64(SeedSequence(master_seed, spawn_key=(k,)));"
               " trajectory i of a run with stream offset o uses k = o + 2i"
               " for the subordinator and k = o + 2i + 1 for the Brownian part")


@dataclass
class RunConfig:
    """Flat configuration shared by all subcommands."""

    command: str
    family: str = "stable"
    alpha: float = 0.6
    lam: float = 1.0
    c: float = 1.0
    a: float = 1.0
    tmax: float = 10.0
    ngrid: int = 101
    dtau: float = 1e-3
    n: int = 100
    seed: int = 12345
    workers: int = 1
    out: str | None = None
    fit_window: tuple[float, float] | None = None
    mode: str = "ensemble"
    figure: int | None = None

    def validate(self) -> "RunConfig":
        if self.command not in _COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.family not in _FAMILIES:
            raise ConfigError(f"field 'family': unknown family {self.family!r}")
        for name in ("alpha", "lam", "c", "a", "tmax", "dtau"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0.0):
                raise ConfigError(f"field {name!r}: must be a positive real, got {v!r}")
        if not (isinstance(self.ngrid, int) and self.ngrid >= 2):
            raise ConfigError(f"field 'ngrid': must be an integer >= 2, got {self.ngrid!r}")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ConfigError(f"field 'n': must be an integer >= 1, got {self.n!r}")
        if not (isinstance(self.workers, int) and self.workers >= 1):
            raise ConfigError(f"field 'workers': must be an integer >= 1, got {self.workers!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            raise ConfigError(f"field 'seed': must be an integer in [0, 2^64), got {self.seed!r}")
        if self.mode not in _MODES:
            raise ConfigError(f"field 'mode': must be one of {_MODES}, got {self.mode!r}")
        if self.fit_window is not None:
            lo, hi = self.fit_window
            if not (math.isfinite(lo) and math.isfinite(hi) and 0.0 < lo < hi):
                raise ConfigError(f"field 'fit_window': need 0 < lo < hi, got {self.fit_window!r}")
        if self.command == "figures":
            if self.figure not in (1, 2, 3, 4):
                raise ConfigError(f"field 'figure': must be 1, 2, 3 or 4, got {self.figure!r}")
        return self

    def spec(self):
        return make_spec(self.family, alpha=self.alpha, lam=self.lam,
                         c=self.c, a=self.a)


_FIELD_TYPES = {
    "family": str, "alpha": float, "lam": float, "c": float, "a": float,
    "tmax": float, "ngrid": int, "dtau": float, "n": int, "seed": int,
    "workers": int, "out": str, "fit_window": "window", "mode": str,
    "figure": int,
}


def _format_field(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return f"{value[0]!r}:{value[1]!r}"
    return str(value)


def _parse_window(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"fit window must look like 'lo:hi', got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"fit window must be numeric, got {text!r}") from exc
    return (lo, hi)


def _parse_field(name: str, text: str):
    kind = _FIELD_TYPES[name]
    try:
        if kind == "window":
            return _parse_window(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"field {name!r}: cannot parse {text!r}") from exc


def config_to_ini(cfg: RunConfig) -> str:
    """Serialize to an INI document with a [common] section plus one section
    for the subcommand; floats use repr so parsing is lossless."""
    parser = configparser.ConfigParser()
    parser["common"] = {}
    parser[cfg.command] = {}
    for name in _FIELD_TYPES:
        value = getattr(cfg, name)
        if value is None:
            continue
        section = cfg.command if name in ("mode", "figure", "fit_window") else "common"
        parser[section][name] = _format_field(value)
    import io
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def config_from_ini(text: str, command: str) -> dict:
    """Collect field overrides from an INI document: [common] first, then
    the command's own section."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config file: {exc}") from exc
    overrides = {}
    for section in ("common", command):
        if not parser.has_section(section):
            continue
        for name, raw in parser.items(section):
            if name not in _FIELD_TYPES:
                raise ConfigError(f"unknown config field {name!r} in section [{section}]")
            overrides[name] = _parse_field(name, raw)
    return overrides


def load_config(command: str, file_path: str | None = None,
                cli_overrides: dict | None = None) -> RunConfig:
    """Build a validated RunConfig from defaults, optional file, then flags."""
    values: dict = {}
    if file_path is not None:
        try:
            with open(file_path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {file_path}: {exc}") from exc
        values.update(config_from_ini(text, command))
    if cli_overrides:
        values.update({k: v for k, v in cli_overrides.items() if v is not None})
    return RunConfig(command=command, **values).validate()


def _resolve_out(cfg: RunConfig) -> str:
    out = cfg.out or os.environ.get(OUT_ENV_VAR) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format(float(v), ".17g") for v in row])


def _write_json(path: str, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_echo(cfg: RunConfig) -> dict:
    """Config as stored in manifests; out and workers are excluded because
    they do not influence file contents."""
    echo = dataclasses.asdict(cfg)
    echo.pop("out")
    echo.pop("workers")
    if echo["fit_window"] is not None:
        echo["fit_window"] = list(echo["fit_window"])
    return echo


def _write_manifest(out: str, cfg: RunConfig, outputs, extra: dict | None = None) -> str:
    payload = {
        "command": cfg.command,
        "version": __version__,
        "config": _config_echo(cfg),
        "seed_scheme": SEED_SCHEME,
        "outputs": sorted(outputs),
    }
    if extra:
        payload.update(extra)
    path = os.path.join(out, "manifest.json")
    _write_json(path, payload)
    return path


def _linear_grid(tmax: float, ngrid: int) -> np.ndarray:
    return np.linspace(0.0, tmax, ngrid)


def _msd_grid(tmax: float, ngrid: int, dtau: float) -> np.ndarray:
    """Logarithmic grid with an explicit origin; the first positive time is
    kept above 10 subordinator steps so grid resolution does not bias the
    smallest points."""
    t_lo = max(10.0 * dtau, 1e-3 * tmax)
    return np.concatenate(([0.0], np.geomspace(t_lo, tmax, ngrid - 1)))


def _fit_payload(curve, window) -> dict:
    fit = fit_power_law(curve, window[0], window[1])
    return {
        "exponent": fit.exponent,
        "log_prefactor": fit.log_prefactor,
        "window": [fit.fit_range[0], fit.fit_range[1]],
        "rms_residual": fit.rms_residual,
    }


def cmd_simulate(cfg: RunConfig) -> list[str]:
    out = _resolve_out(cfg)
    spec = cfg.spec()
    grid = _linear_grid(cfg.tmax, cfg.ngrid)
    trajs = simulate_ensemble(spec, grid, cfg.dtau, cfg.n, cfg.seed,
                              workers=cfg.workers)
    outputs = []
    seeds = []
    for i, tr in enumerate(trajs):
        name = f"traj_{i:04d}.csv"
        _write_csv(os.path.join(out, name), ["t", "S", "Y"],
                   zip(tr.t_grid, tr.s_values, tr.y_values))
        outputs.append(name)
        seeds.append({"trajectory": i, "master_seed": cfg.seed,
                      "streams": [2 * i, 2 * i + 1]})
    _write_manifest(out, cfg, outputs, {"trajectory_seeds": seeds})
    log.info("simulate: wrote %d trajectories to %s", cfg.n, out)
    return outputs


def cmd_msd(cfg: RunConfig) -> list[str]:
    out = _resolve_out(cfg)
    spec = cfg.spec()
    outputs = []
    extra: dict = {}
    if cfg.mode == "ensemble":
        grid = _msd_grid(cfg.tmax, cfg.ngrid, cfg.dtau)
        trajs = simulate_ensemble(spec, grid, cfg.dtau, cfg.n, cfg.seed,
                                  workers=cfg.workers)
        curve = msd_ensemble(trajs)
        name = "msd_ensemble.csv"
        _write_csv(os.path.join(out, name), ["t", "msd", "stderr"],
                   zip(curve.t_grid, curve.values, curve.stderr))
        outputs.append(name)
    elif cfg.mode == "timeavg":
        grid = _linear_grid(cfg.tmax, cfg.ngrid)
        traj = simulate_ensemble(spec, grid, cfg.dtau, 1, cfg.seed,
                                 workers=1)[0]
        dt = grid[1] - grid[0]
        lags = sorted({int(round(lag / dt))
                       for lag in np.geomspace(5.0 * dt, cfg.tmax / 10.0, 25)})
        lags = [m * dt for m in lags if 1 <= m <= cfg.ngrid - 2]
        curve = msd_time_avg(traj, lags)
        name = "msd_timeavg.csv"
        _write_csv(os.path.join(out, name), ["lag", "msd"],
                   zip(curve.t_grid, curve.values))
        outputs.append(name)
    else:
        grid = _msd_grid(cfg.tmax, cfg.ngrid, cfg.dtau)
        values = [msd_analytic(spec, t) for t in grid]
        from .analytics import MsdCurve, MsdKind
        curve = MsdCurve(t_grid=grid, values=np.asarray(values),
                         kind=MsdKind.ANALYTIC, meta=0.0)
        name = "msd_analytic.csv"
        _write_csv(os.path.join(out, name), ["t", "msd"],
                   zip(curve.t_grid, curve.values))
        outputs.append(name)
    if cfg.fit_window is not None:
        payload = _fit_payload(curve, cfg.fit_window)
        _write_json(os.path.join(out, "msd_fit.json"), payload)
        outputs.append("msd_fit.json")
    _write_manifest(out, cfg, outputs, extra)
    log.info("msd: wrote %s to %s", ", ".join(outputs), out)
    return outputs


def _kernel_limit(spec) -> float:
    """Long-time level of the memory kernel: the tempered stable family
    saturates, gamma tends to the inverse mean rate, stable decays to 0."""
    if isinstance(spec, TemperedStableSpec):
        return spec.lam ** (1.0 - spec.alpha) / (spec.alpha * spec.c)
    if isinstance(spec, GammaSpec):
        return 1.0 / (spec.a * spec.c)
    return 0.0


def cmd_kernel(cfg: RunConfig) -> list[str]:
    out = _resolve_out(cfg)
    spec = cfg.spec()
    grid = np.geomspace(1e-3 * cfg.tmax, cfg.tmax, cfg.ngrid)
    limit = _kernel_limit(spec)
    rows = []
    for t in grid:
        m = memory_kernel(spec, float(t))
        z = 1.0 / t
        psi = float(levy_exponent(spec, z))
        near = 1.0 if (limit > 0.0 and abs(m - limit) <= 0.01 * limit) else 0.0
        rows.append((t, m, z, psi, limit, near))
    name = "kernel.csv"
    _write_csv(os.path.join(out, name),
               ["t", "kernel", "z", "psi", "limit", "near_limit"], rows)
    _write_manifest(out, cfg, [name])
    log.info("kernel: wrote %s to %s", name, out)
    return [name]


def _figure_specs(cfg: RunConfig):
    """The three families compared in the figures: stable and tempered
    stable share alpha, the gamma family is matched to the tempered stable
    unit-time mean at the configured scale a."""
    stable = StableSpec(alpha=cfg.alpha)
    ts = TemperedStableSpec(alpha=cfg.alpha, lam=cfg.lam, c=cfg.c)
    gam = match_gamma_to_tempered_stable(cfg.alpha, cfg.lam, cfg.c, cfg.a)
    return [("stable", stable), ("tempered_stable", ts), ("gamma", gam)]


def _pdf_values(spec, x: np.ndarray) -> np.ndarray:
    if isinstance(spec, StableSpec):
        return np.array([pdf_stable(spec.alpha, 1.0, float(v)) for v in x])
    if isinstance(spec, TemperedStableSpec):
        return np.array([pdf_tempered_stable(spec.alpha, spec.lam, spec.c, float(v))
                         for v in x])
    return np.array([pdf_gamma(spec.a, spec.c, float(v)) for v in x])


def _figure_1(cfg: RunConfig, out: str) -> list[str]:
    outputs = []
    x_main = np.geomspace(1e-2, 10.0, 200)
    for name, spec in _figure_specs(cfg):
        fname = f"fig1_pdf_{name}.csv"
        _write_csv(os.path.join(out, fname), ["x", "pdf"],
                   zip(x_main, _pdf_values(spec, x_main)))
        outputs.append(fname)
        if name == "stable":
            x_tail = np.geomspace(1e2, 1e4, 25)
        else:
            x_tail = np.geomspace(1.0, 100.0, 25)
        fname = f"fig1_tail_{name}.csv"
        _write_csv(os.path.join(out, fname), ["x", "pdf"],
                   zip(x_tail, _pdf_values(spec, x_tail)))
        outputs.append(fname)
    return outputs


def _figure_2(cfg: RunConfig, out: str) -> list[str]:
    outputs = []
    grid = _linear_grid(cfg.tmax, cfg.ngrid)
    n_show = 3
    for fam_idx, (name, spec) in enumerate(_figure_specs(cfg)):
        trajs = simulate_ensemble(spec, grid, cfg.dtau, n_show, cfg.seed,
                                  workers=cfg.workers,
                                  stream_offset=2 * n_show * fam_idx)
        for k, tr in enumerate(trajs):
            fname = f"fig2_{name}_traj_{k}.csv"
            _write_csv(os.path.join(out, fname), ["t", "S", "Y"],
                       zip(tr.t_grid, tr.s_values, tr.y_values))
            outputs.append(fname)
    return outputs


# Ensemble-MSD campaign behind figure 3. The tempered stable family needs
# two runs because no single step size resolves both its stable-like
# small-time window and its linear large-time window in reasonable runtime.
_FIG3_RUNS = (
    ("stable", "stable", dict(dtau=1e-2, t_lo=0.1, tmax=10.0, ngrid=40,
                              window=(0.1, 10.0))),
    ("ts_small", "tempered_stable", dict(dtau=1e-4, t_lo=1e-3, tmax=0.1,
                                         ngrid=30, window=(1e-3, 0.1))),
    ("ts_large", "tempered_stable", dict(dtau=5e-2, t_lo=0.5, tmax=100.0,
                                         ngrid=40, window=(5.0, 100.0))),
    ("gamma", "gamma", dict(dtau=1e-2, t_lo=0.1, tmax=100.0, ngrid=40,
                            window=(10.0, 100.0))),
)


def _figure_3(cfg: RunConfig, out: str) -> tuple[list[str], dict]:
    by_name = dict(_figure_specs(cfg))
    outputs = []
    fits = {}
    for run_idx, (run_name, fam, recipe) in enumerate(_FIG3_RUNS):
        spec = by_name[fam]
        grid = np.concatenate(([0.0], np.geomspace(recipe["t_lo"],
                                                   recipe["tmax"],
                                                   recipe["ngrid"])))
        trajs = simulate_ensemble(spec, grid, recipe["dtau"], cfg.n, cfg.seed,
                                  workers=cfg.workers,
                                  stream_offset=2 * cfg.n * run_idx)
        curve = msd_ensemble(trajs)
        fname = f"fig3_msd_{run_name}.csv"
        _write_csv(os.path.join(out, fname), ["t", "msd", "stderr"],
                   zip(curve.t_grid, curve.values, curve.stderr))
        outputs.append(fname)
        fits[run_name] = _fit_payload(curve, recipe["window"])
        fits[run_name]["n_trajectories"] = cfg.n
    _write_json(os.path.join(out, "fig3_fits.json"), fits)
    outputs.append("fig3_fits.json")
    return outputs, {"runs": [r[0] for r in _FIG3_RUNS]}


def _figure_4(cfg: RunConfig, out: str) -> list[str]:
    outputs = []
    grid = _linear_grid(cfg.tmax, cfg.ngrid)
    dt = grid[1] - grid[0]
    fits = {}
    for fam_idx, (name, spec) in enumerate(_figure_specs(cfg)):
        traj = simulate_ensemble(spec, grid, cfg.dtau, 1, cfg.seed,
                                 workers=1, stream_offset=2 * fam_idx)[0]
        lag_idx = sorted({int(round(lag / dt))
                          for lag in np.geomspace(5.0 * dt, cfg.tmax / 10.0, 25)})
        lags = [m * dt for m in lag_idx if 1 <= m <= cfg.ngrid - 2]
        curve = msd_time_avg(traj, lags)
        fname = f"fig4_tamsd_{name}.csv"
        _write_csv(os.path.join(out, fname), ["lag", "msd"],
                   zip(curve.t_grid, curve.values))
        outputs.append(fname)
        if curve.t_grid.size >= 5 and np.all(curve.values > 0.0):
            fits[name] = _fit_payload(curve, (0.5 * curve.t_grid[0],
                                              2.0 * curve.t_grid[-1]))
    _write_json(os.path.join(out, "fig4_fits.json"), fits)
    outputs.append("fig4_fits.json")
    return outputs


def cmd_figures(cfg: RunConfig) -> list[str]:
    out = _resolve_out(cfg)
    extra: dict = {}
    if cfg.figure == 1:
        outputs = _figure_1(cfg, out)
    elif cfg.figure == 2:
        outputs = _figure_2(cfg, out)
    elif cfg.figure == 3:
        outputs, extra = _figure_3(cfg, out)
    else:
        outputs = _figure_4(cfg, out)
    _write_manifest(out, cfg, outputs, extra)
    log.info("figures %d: wrote %d files to %s", cfg.figure, len(outputs), out)
    return outputs


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", default=None, help="INI config file")
    sub.add_argument("--family", choices=_FAMILIES, default=None)
    sub.add_argument("--alpha", type=float, default=None)
    sub.add_argument("--lambda", dest="lam", type=float, default=None)
    sub.add_argument("--c", type=float, default=None)
    sub.add_argument("--a", type=float, default=None)
    sub.add_argument("--tmax", type=float, default=None)
    sub.add_argument("--ngrid", type=int, default=None)
    sub.add_argument("--dtau", type=float, default=None)
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--workers", type=int, default=None)
    sub.add_argument("--out", default=None)
    sub.add_argument("--fit-window", dest="fit_window", type=_parse_window,
                     default=None, metavar="LO:HI")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subdiff",
        description="Simulation and analysis of Brownian motion time-changed "
                    "by inverse subordinators")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)
    p_sim = subs.add_parser("simulate", help="write trajectory CSVs")
    _add_common_flags(p_sim)
    p_msd = subs.add_parser("msd", help="write an MSD curve CSV")
    _add_common_flags(p_msd)
    p_msd.add_argument("--mode", choices=_MODES, default=None)
    p_ker = subs.add_parser("kernel", help="tabulate the memory kernel")
    _add_common_flags(p_ker)
    p_fig = subs.add_parser("figures", help="emit figure data bundles")
    p_fig.add_argument("figure", type=int, choices=(1, 2, 3, 4))
    _add_common_flags(p_fig)
    return parser


_DISPATCH = {
    "simulate": cmd_simulate,
    "msd": cmd_msd,
    "kernel": cmd_kernel,
    "figures": cmd_figures,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items()
                 if k in _FIELD_TYPES and v is not None}
    try:
        cfg = load_config(args.command, file_path=args.config,
                          cli_overrides=overrides)
        _DISPATCH[args.command](cfg)
    except SubdiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
