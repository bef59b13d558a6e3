"""Batch command-line surface.

Four subcommands, all emitting machine-readable output with a ``#``
header block (full config echo, version, seed) sufficient to re-run a
result bit-exactly:

  oracle-validate  exact-pipeline sweep against the closed forms (CSV)
  fig3             click / no-click phase scan over the campaign points,
                   with the per-photon-phase fit from the no-click column
  fig4             differential phase versus post-selection overlap, with
                   the one-parameter amplified-split fit (CSV + fit JSON)
  snr              amplified versus direct scheme signal-to-noise (JSON)

Exit codes: 0 success, 1 config/usage error, 2 tolerance or estimation
failure.  Config files are single JSON documents; command-line flags
override file fields.  Phases in configs and outputs are microradians
unless a field says otherwise; internals run in radians.  Monte Carlo
commands require an explicit --seed (no silent entropy).  Worker count is
an execution detail: it never appears in output and never changes it.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, presets
from .errors import DegenerateFitError, InsufficientDataError, InvalidRegimeError
from .model import InterferometerParams
from .montecarlo import (
    NoiseModel,
    SchemeConfig,
    estimate_phases,
    fit_differential,
    fit_per_photon_phase,
    simulate_trials,
    snr_compare,
)
from .protocol import sweep_validity

URAD = presets.URAD

ORACLE_DEFAULTS: dict = {
    "alpha": [0.2, 0.5, 1.0],
    "delta": [0.1, 0.2, 0.5],
    "beta": [0.5, 1.0],
    "eta": [0.5, 1.0],
    "phi_bar_urad": [100.0, 1000.0],
    "span_over_phi_bar": 2.0,
    "tolerance": 0.05,
}

_CAMPAIGN_POINTS = [
    {
        "n_bar": p.n_bar,
        "delta": p.delta,
        "eta": p.eta,
        "n_total": p.n_total,
        "background": p.background,
        "p_signal": p.p_signal,
    }
    for p in presets.CAMPAIGN
]

FIG3_DEFAULTS: dict = {
    "phi_bar_urad": presets.PER_PHOTON_PHASE_URAD,
    "span_urad": presets.PHASE_SPLIT_URAD,
    "beta": presets.PROBE_AMPLITUDE,
    "phase_sigma": presets.DEFAULT_PHASE_SIGMA,
    "trials_scale": 0.01,
    "points": _CAMPAIGN_POINTS,
}

FIG4_DEFAULTS: dict = dict(
    FIG3_DEFAULTS,
    phi_bar_fixed_urad=presets.PER_PHOTON_PHASE_URAD,
    include_delta_one=False,
)

SNR_DEFAULTS: dict = {
    # sigma / sqrt(N) sets the resolution; the small default sigma stands in
    # for the campaign's ~1e9-trial budgets at a desk-scale trial count
    "n_trials": 2_000_000,
    "phase_sigma": 0.001,
    "beta": presets.PROBE_AMPLITUDE,
    "wva": {
        "n_bar": 95.0,
        "delta": 0.10,
        "eta": 0.2,
        "background": 0.06,
        "p_signal": None,
        "phi_bar_urad": presets.PER_PHOTON_PHASE_URAD,
        "span_urad": presets.PHASE_SPLIT_URAD,
    },
    "direct": {
        "n_bar": 1.0,
        "delta": 1.0,
        "eta": 0.3,
        "background": 0.0,
        "p_signal": None,
        "phi_bar_urad": presets.PER_PHOTON_PHASE_URAD + 0.5 * presets.PHASE_SPLIT_URAD,
        "span_urad": 0.0,
    },
}


class ConfigError(Exception):
    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"field '{field}': {message}")
        self.field = field


def _merged_config(defaults: dict, path: str | None, overrides: dict) -> dict:
    config = json.loads(json.dumps(defaults))  # deep copy
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError("<config>", f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("<config>", f"{path} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("<config>", "top level must be a JSON object")
        for key, value in loaded.items():
            if key not in defaults:
                raise ConfigError(key, "unknown config field")
            config[key] = value
    for key, value in overrides.items():
        if value is not None:
            config[key] = value
    return config


def _as_number(config: dict, field: str, lo: float | None = None, hi: float | None = None) -> float:
    value = config[field]
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ConfigError(field, f"expected a finite number, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(field, f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(field, f"must be <= {hi}, got {value}")
    return float(value)


def _as_number_list(config: dict, field: str) -> list[float]:
    value = config[field]
    if not isinstance(value, list) or not value:
        raise ConfigError(field, "expected a non-empty list of numbers")
    out = []
    for i, item in enumerate(value):
        if not isinstance(item, (int, float)) or isinstance(item, bool) or not math.isfinite(item):
            raise ConfigError(f"{field}[{i}]", f"expected a finite number, got {item!r}")
        out.append(float(item))
    return out


def _point_fields(raw: dict, field: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(field, "expected an object")
    known = {"n_bar", "delta", "eta", "n_total", "background", "p_signal"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"{field}.{key}", "unknown point field")
    for key in ("n_bar", "delta", "eta", "n_total", "background"):
        if key not in raw:
            raise ConfigError(f"{field}.{key}", "missing required point field")
    point = {
        "n_bar": _as_number(raw, "n_bar", lo=0.0),
        "delta": _as_number(raw, "delta"),
        "eta": _as_number(raw, "eta", lo=0.0, hi=1.0),
        "n_total": int(_as_number(raw, "n_total", lo=1)),
        "background": _as_number(raw, "background", lo=0.0),
    }
    if not 0.0 < point["delta"] <= 1.0:
        raise ConfigError(f"{field}.delta", "must lie in (0, 1]")
    if raw.get("p_signal") is None:
        point["p_signal"] = None
    else:
        point["p_signal"] = _as_number(raw, "p_signal", lo=0.0, hi=1.0)
    return point


def _fail_config(exc: ConfigError) -> None:
    click.echo(f"config error: {exc}", err=True)
    sys.exit(1)


def _header_lines(command: str, config: dict, seed: int | None) -> list[str]:
    lines = [
        f"# generator: wva-sim {__version__}",
        f"# command: {command}",
        f"# config: {json.dumps(config, sort_keys=True)}",
    ]
    if seed is not None:
        lines.append(f"# seed: {seed}")
    return lines


def _write_text(out: str | None, text: str) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _g(value: float) -> str:
    """Full-precision machine formatting."""
    return format(value, ".17g")


def _check_seed(seed: int) -> int:
    if not 0 <= seed < 2**64:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    return seed


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence((seed, index)).generate_state(1, np.uint64)[0])


def _campaign_rows(config: dict, seed: int, trials_scale: float, workers: int):
    """Simulate every configured campaign point; shared by fig3 and fig4."""
    phi_bar_urad = _as_number(config, "phi_bar_urad")
    span_urad = _as_number(config, "span_urad")
    beta = _as_number(config, "beta", lo=0.0)
    phase_sigma = _as_number(config, "phase_sigma", lo=0.0)
    if not isinstance(config["points"], list) or not config["points"]:
        raise ConfigError("points", "expected a non-empty list")
    phi_plus, phi_minus = presets.phi_pair_from_urad(phi_bar_urad, span_urad)
    rows = []
    for i, raw in enumerate(config["points"]):
        point = _point_fields(raw, f"points[{i}]")
        params = InterferometerParams(
            alpha=math.sqrt(point["n_bar"]),
            beta=beta,
            delta=point["delta"],
            eta=point["eta"],
            phi_plus=phi_plus,
            phi_minus=phi_minus,
        )
        noise = NoiseModel(phase_sigma=phase_sigma, background_click_rate=point["background"])
        trials = max(2, round(point["n_total"] * trials_scale))
        batch = simulate_trials(
            params,
            noise,
            trials,
            _point_seed(seed, i),
            p_signal=point["p_signal"],
            workers=workers,
        )
        rows.append((point, trials, estimate_phases(batch)))
    return rows, phase_sigma


@click.group()
@click.version_option(version=__version__, prog_name="wva-sim")
def main() -> None:
    """Simulation harness for post-selected cross-phase interferometry."""


@main.command("oracle-validate")
@click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="CSV output path (default stdout).")
@click.option("--seed", type=int, default=None, help="Echoed for provenance; this command is deterministic.")
@click.option("--tolerance", type=float, default=None, help="Override the relative-error gate.")
def oracle_validate(config_path, out_path, seed, tolerance) -> None:
    """Sweep the exact pipeline against the closed forms; gate valid rows."""
    try:
        config = _merged_config(ORACLE_DEFAULTS, config_path, {"tolerance": tolerance})
        alphas = _as_number_list(config, "alpha")
        deltas = _as_number_list(config, "delta")
        betas = _as_number_list(config, "beta")
        etas = _as_number_list(config, "eta")
        phi_bars = _as_number_list(config, "phi_bar_urad")
        span_ratio = _as_number(config, "span_over_phi_bar", lo=0.0)
        gate = _as_number(config, "tolerance", lo=0.0)
    except ConfigError as exc:
        _fail_config(exc)

    grid = []
    for alpha in alphas:
        for delta in deltas:
            for beta in betas:
                for phi_bar_urad in phi_bars:
                    for eta in etas:
                        phi_bar = phi_bar_urad * URAD
                        half_span = 0.5 * span_ratio * phi_bar
                        try:
                            grid.append(
                                InterferometerParams(
                                    alpha=alpha,
                                    beta=beta,
                                    delta=delta,
                                    eta=eta,
                                    phi_plus=phi_bar + half_span,
                                    phi_minus=phi_bar - half_span,
                                )
                            )
                        except ValueError as exc:
                            _fail_config(ConfigError("grid", str(exc)))

    rows = sweep_validity(grid)
    lines = _header_lines("oracle-validate", config, seed)
    lines.append("# phases in microradians, full double precision")
    lines.append(
        "alpha,beta,delta,eta,phi_plus,phi_minus,p_click_exact,p_click_analytic,"
        "diff_exact,diff_analytic,rel_error,verdict"
    )
    failures = 0
    for row in rows:
        p = row.params
        if row.result is None:
            exact_p, exact_d = math.nan, math.nan
        else:
            exact_p = row.result.p_click
            exact_d = row.result.differential_exact
        gated = row.verdict == "valid" and not row.note
        if gated and not (row.rel_error < gate):
            failures += 1
        lines.append(
            ",".join(
                [
                    _g(p.alpha),
                    _g(p.beta),
                    _g(p.delta),
                    _g(p.eta),
                    _g(p.phi_plus / URAD),
                    _g(p.phi_minus / URAD),
                    _g(exact_p),
                    _g(row.prediction.p_click),
                    _g(exact_d / URAD),
                    _g(row.prediction.differential / URAD),
                    _g(row.rel_error),
                    row.verdict if not row.note else f"{row.verdict} ({row.note})",
                ]
            )
        )
    _write_text(out_path, "\n".join(lines) + "\n")
    valid_rows = sum(1 for r in rows if r.verdict == "valid" and not r.note)
    click.echo(
        f"oracle-validate: {len(rows)} points, {valid_rows} valid, "
        f"{failures} above tolerance {gate:.4g}",
        err=True,
    )
    if failures:
        sys.exit(2)


@main.command("fig3")
@click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="CSV output path (default stdout).")
@click.option("--seed", type=int, required=True, help="Master seed (required; no silent entropy).")
@click.option("--trials-scale", type=float, default=None, help="Fraction of each point's trial count.")
@click.option("--workers", type=int, default=1, help="Worker threads; never changes the output.")
def fig3(config_path, out_path, seed, trials_scale, workers) -> None:
    """Click / no-click phase scan with the per-photon-phase fit."""
    try:
        _check_seed(seed)
        config = _merged_config(FIG3_DEFAULTS, config_path, {"trials_scale": trials_scale})
        scale = _as_number(config, "trials_scale", lo=0.0)
        rows, phase_sigma = _campaign_rows(config, seed, scale, workers)
    except ConfigError as exc:
        _fail_config(exc)
    except InsufficientDataError as exc:
        click.echo(f"estimation failure: {exc}", err=True)
        sys.exit(2)
    except (InvalidRegimeError, ValueError) as exc:
        _fail_config(ConfigError("points", str(exc)))

    fit_note = "skipped (zero-noise run has no stderr)"
    fit_json = None
    if phase_sigma > 0.0:
        fit_points = [
            (point["n_bar"], est.phi_noclick[0], est.phi_noclick[1])
            for point, _, est in rows
        ]
        try:
            fit = fit_per_photon_phase(fit_points)
            fit_json = {
                "phi0_urad": fit.parameter / URAD,
                "stderr_urad": fit.stderr / URAD,
                "chi_squared": fit.chi_squared,
                "dof": fit.dof,
            }
            fit_note = json.dumps(fit_json, sort_keys=True)
        except DegenerateFitError as exc:
            click.echo(f"fit failure: {exc}", err=True)
            sys.exit(2)

    lines = _header_lines("fig3", config, seed)
    lines.append("# phases in microradians, full double precision")
    lines.append(f"# fit_phi0: {fit_note}")
    lines.append(
        "delta,n_bar,eta,trials,click_fraction,"
        "phi_click,phi_click_stderr,phi_noclick,phi_noclick_stderr,diff,diff_stderr"
    )
    for point, trials, est in rows:
        lines.append(
            ",".join(
                [
                    _g(point["delta"]),
                    _g(point["n_bar"]),
                    _g(point["eta"]),
                    str(trials),
                    _g(est.click_fraction),
                    _g(est.phi_click[0] / URAD),
                    _g(est.phi_click[1] / URAD),
                    _g(est.phi_noclick[0] / URAD),
                    _g(est.phi_noclick[1] / URAD),
                    _g(est.differential[0] / URAD),
                    _g(est.differential[1] / URAD),
                ]
            )
        )
    _write_text(out_path, "\n".join(lines) + "\n")
    if fit_json is not None:
        if out_path is not None:
            Path(out_path).with_suffix(".fit.json").write_text(
                json.dumps(fit_json, sort_keys=True, indent=2) + "\n", encoding="utf-8"
            )
        click.echo(
            "fig3: phi0 = {:.4g} +/- {:.4g} urad".format(
                fit_json["phi0_urad"], fit_json["stderr_urad"]
            ),
            err=True,
        )


@main.command("fig4")
@click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="CSV output path (default stdout).")
@click.option("--seed", type=int, required=True, help="Master seed (required; no silent entropy).")
@click.option("--trials-scale", type=float, default=None, help="Fraction of each point's trial count.")
@click.option("--workers", type=int, default=1, help="Worker threads; never changes the output.")
def fig4(config_path, out_path, seed, trials_scale, workers) -> None:
    """Differential phase versus overlap, with the amplified-split fit."""
    try:
        _check_seed(seed)
        config = _merged_config(FIG4_DEFAULTS, config_path, {"trials_scale": trials_scale})
        scale = _as_number(config, "trials_scale", lo=0.0)
        phi_bar_fixed = _as_number(config, "phi_bar_fixed_urad") * URAD
        include_d1 = config["include_delta_one"]
        if not isinstance(include_d1, bool):
            raise ConfigError("include_delta_one", "expected true/false")
        rows, phase_sigma = _campaign_rows(config, seed, scale, workers)
    except ConfigError as exc:
        _fail_config(exc)
    except InsufficientDataError as exc:
        click.echo(f"estimation failure: {exc}", err=True)
        sys.exit(2)
    except (InvalidRegimeError, ValueError) as exc:
        _fail_config(ConfigError("points", str(exc)))

    fit_json = None
    fit_note = "skipped (zero-noise run has no stderr)"
    if phase_sigma > 0.0:
        fit_points = [
            (point["delta"], est.differential[0], est.differential[1])
            for point, _, est in rows
        ]
        try:
            fit = fit_differential(fit_points, phi_bar_fixed, include_delta_one=include_d1)
        except DegenerateFitError as exc:
            click.echo(f"fit failure: {exc}", err=True)
            sys.exit(2)
        fit_json = {
            "span_urad": fit.parameter / URAD,
            "stderr_urad": fit.stderr / URAD,
            "chi_squared": fit.chi_squared,
            "dof": fit.dof,
            "phi_bar_fixed_urad": phi_bar_fixed / URAD,
            "include_delta_one": include_d1,
        }
        fit_note = json.dumps(fit_json, sort_keys=True)

    lines = _header_lines("fig4", config, seed)
    lines.append("# phases in microradians, full double precision")
    lines.append(f"# fit_span: {fit_note}")
    lines.append("delta,n_bar,eta,trials,click_fraction,diff,diff_stderr,amplification,in_fit")
    for point, trials, est in rows:
        in_fit = phase_sigma > 0.0 and (include_d1 or point["delta"] < 1.0)
        lines.append(
            ",".join(
                [
                    _g(point["delta"]),
                    _g(point["n_bar"]),
                    _g(point["eta"]),
                    str(trials),
                    _g(est.click_fraction),
                    _g(est.differential[0] / URAD),
                    _g(est.differential[1] / URAD),
                    _g(est.differential[0] / phi_bar_fixed),
                    "1" if in_fit else "0",
                ]
            )
        )
    _write_text(out_path, "\n".join(lines) + "\n")
    if fit_json is not None:
        if out_path is not None:
            Path(out_path).with_suffix(".fit.json").write_text(
                json.dumps(fit_json, sort_keys=True, indent=2) + "\n", encoding="utf-8"
            )
        click.echo(
            "fig4: span = {:.4g} +/- {:.4g} urad".format(
                fit_json["span_urad"], fit_json["stderr_urad"]
            ),
            err=True,
        )


def _scheme_from_config(raw: dict, field: str, beta: float, phase_sigma: float) -> SchemeConfig:
    if not isinstance(raw, dict):
        raise ConfigError(field, "expected an object")
    known = {"n_bar", "delta", "eta", "background", "p_signal", "phi_bar_urad", "span_urad"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"{field}.{key}", "unknown scheme field")
    for key in known - {"p_signal"}:
        if key not in raw:
            raise ConfigError(f"{field}.{key}", "missing required scheme field")
    phi_plus, phi_minus = presets.phi_pair_from_urad(
        _as_number(raw, "phi_bar_urad"), _as_number(raw, "span_urad")
    )
    params = InterferometerParams(
        alpha=math.sqrt(_as_number(raw, "n_bar", lo=0.0)),
        beta=beta,
        delta=_as_number(raw, "delta"),
        eta=_as_number(raw, "eta", lo=0.0, hi=1.0),
        phi_plus=phi_plus,
        phi_minus=phi_minus,
    )
    noise = NoiseModel(
        phase_sigma=phase_sigma,
        background_click_rate=_as_number(raw, "background", lo=0.0),
    )
    p_signal = None if raw.get("p_signal") is None else _as_number(raw, "p_signal", lo=0.0, hi=1.0)
    return SchemeConfig(params=params, noise=noise, p_signal=p_signal)


@main.command("snr")
@click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="JSON output path (default stdout).")
@click.option("--seed", type=int, required=True, help="Master seed (required; no silent entropy).")
@click.option("--trials-scale", type=float, default=None, help="Multiplier on the configured trial count.")
@click.option("--workers", type=int, default=1, help="Worker threads; never changes the output.")
def snr(config_path, out_path, seed, trials_scale, workers) -> None:
    """Compare the amplified and direct schemes at equal trial budgets."""
    try:
        _check_seed(seed)
        config = _merged_config(SNR_DEFAULTS, config_path, {})
        beta = _as_number(config, "beta", lo=0.0)
        phase_sigma = _as_number(config, "phase_sigma", lo=0.0)
        n_trials = int(_as_number(config, "n_trials", lo=2))
        if trials_scale is not None:
            if not (trials_scale > 0.0 and math.isfinite(trials_scale)):
                raise ConfigError("trials_scale", "must be a positive number")
            n_trials = max(2, round(n_trials * trials_scale))
        wva_scheme = _scheme_from_config(config["wva"], "wva", beta, phase_sigma)
        direct_scheme = _scheme_from_config(config["direct"], "direct", beta, phase_sigma)
    except ConfigError as exc:
        _fail_config(exc)
    except ValueError as exc:
        _fail_config(ConfigError("<config>", str(exc)))

    try:
        comparison = snr_compare(wva_scheme, direct_scheme, n_trials, seed, workers=workers)
    except (InvalidRegimeError, InsufficientDataError) as exc:
        click.echo(f"estimation failure: {exc}", err=True)
        sys.exit(2)

    report = {
        "generator": f"wva-sim {__version__}",
        "command": "snr",
        "config": config,
        "seed": seed,
        "n_trials": n_trials,
        "snr_wva": comparison.snr_wva,
        "snr_direct": comparison.snr_direct,
        "ratio": comparison.ratio,
    }
    _write_text(out_path, json.dumps(report, sort_keys=True, indent=2) + "\n")
    click.echo(
        f"snr: wva {comparison.snr_wva:.4g}, direct {comparison.snr_direct:.4g}, "
        f"ratio {comparison.ratio:.4g}",
        err=True,
    )


if __name__ == "__main__":
    main()
