"""Exact end-to-end oracle for the post-selected interferometer.

Runs the full pipeline in truncated Fock space with no approximations:

    prepare |alpha/sqrt(2)>_1 |alpha/sqrt(2)>_2 |beta>_pr
    -> cross-Kerr phi_plus on (arm 1, probe)
    -> cross-Kerr phi_minus on (arm 2, probe)
    -> recombining beam splitter at theta(delta)   [arms -> bright, dark]
    -> detector beam splitter at asin(sqrt(eta))   [dark -> undetected, detected]
    -> condition on the detected mode holding |1> (click) or |0> (no click)

The undetected mode is never factored out: probabilities come from branch
norms, and the probe phase is the argument of the conditional mean field
computed on the joint subnormalized branch state, referenced against an
alpha = 0 run of the same preparation (which leaves the probe untouched,
so the reference equals the truncated probe state itself).  Components
with two or more detected photons are tallied into ``p_multi`` and kept
out of the phase statistics.

Everything here is deterministic; sweeps are embarrassingly parallel.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import fock
from .model import InterferometerParams, PhasePrediction, check_validity, predict_phases

# Branches below this squared norm are reported as degenerate (phase nan).
DEGENERATE_NORM2 = 1e-30

# Differential agreement sentinel: analytic = exact = 0 is reported as
# relative error 0; analytic = 0 with nonzero exact as inf.
_ZERO_PHASE_ATOL = 1e-12


@dataclass(frozen=True)
class ProtocolResult:
    """Exact branch probabilities and conditioned probe phases (radians)."""

    p_click: float
    p_noclick: float
    p_multi: float
    phase_click_exact: float
    phase_noclick_exact: float
    probe_amplitude_click: complex
    truncation_deficit: float
    click_degenerate: bool
    noclick_degenerate: bool

    @property
    def differential_exact(self) -> float:
        return self.phase_click_exact - self.phase_noclick_exact


@dataclass(frozen=True)
class SweepRow:
    """One oracle-versus-analytic comparison point."""

    params: InterferometerParams
    prediction: PhasePrediction
    result: ProtocolResult | None
    rel_error: float
    verdict: str
    note: str = ""


def default_cutoffs(params: InterferometerParams) -> tuple[int, int, int]:
    """Per-mode cutoffs (arm 1, arm 2, probe) for the exact pipeline.

    Arms are sized for the full signal amplitude, not alpha/sqrt(2): the
    recombiner can pile every signal photon into one output, and equal arm
    cutoffs keep all occupied photon-number multiplets representable.
    """
    arm = fock.suggested_cutoff(params.alpha)
    probe = fock.suggested_cutoff(params.beta)
    return arm, arm, probe


def _reference_phase(params: InterferometerParams, probe_cutoff: int, probe_phase: float) -> float:
    # The alpha = 0 run leaves the probe exactly in its prepared coherent
    # state (vacuum arms make both Kerr gates and the recombiner identity),
    # so the reference reduces to the truncated probe itself.
    probe = fock.make_coherent(params.beta * cmath.exp(1j * probe_phase), probe_cutoff)
    return cmath.phase(fock.mean_field(probe, 0))


def run_protocol(
    params: InterferometerParams,
    cutoffs: Sequence[int] | None = None,
    *,
    probe_phase: float = 0.0,
) -> ProtocolResult:
    """Execute the exact pipeline and condition on the detected mode.

    ``cutoffs`` optionally overrides (arm1, arm2, probe); the detector
    ancilla always matches the dark-port cutoff so the detector splitter
    cannot leak.  ``probe_phase`` rotates the prepared probe amplitude; the
    reported phases are invariant under it (they are referenced).
    """
    if cutoffs is None:
        cutoffs = default_cutoffs(params)
    arm1_cut, arm2_cut, probe_cut = (int(c) for c in cutoffs)

    root2 = math.sqrt(2.0)
    reg = fock.tensor(
        fock.tensor(
            fock.make_coherent(params.alpha / root2, arm1_cut),
            fock.make_coherent(params.alpha / root2, arm2_cut),
        ),
        fock.make_coherent(params.beta * cmath.exp(1j * probe_phase), probe_cut),
    )
    # modes: 0 arm1, 1 arm2, 2 probe
    reg = fock.apply_cross_kerr(reg, 0, 2, params.phi_plus)
    reg = fock.apply_cross_kerr(reg, 1, 2, params.phi_minus)
    reg = fock.apply_beam_splitter(reg, 0, 1, params.theta)
    # modes: 0 bright port, 1 dark port, 2 probe
    dark_cut = reg.modes[1].cutoff
    reg = fock.tensor(reg, fock.make_fock(0, dark_cut))
    reg = fock.apply_beam_splitter(reg, 1, 3, math.asin(math.sqrt(params.eta)))
    # modes: 0 bright port, 1 undetected, 2 probe, 3 detected

    deficit = fock.truncation_deficit(reg)
    detected = fock.fock_distribution(reg, 3)
    p_noclick = float(detected[0])
    p_click = float(detected[1]) if detected.size > 1 else 0.0
    p_multi = float(detected[2:].sum()) if detected.size > 2 else 0.0

    ref = _reference_phase(params, probe_cut, probe_phase)

    # branch registers keep modes (bright, undetected, probe); probe is axis 2
    click_branch = fock.project_fock(reg, 3, 1).state
    noclick_branch = fock.project_fock(reg, 3, 0).state

    click_degenerate = p_click < DEGENERATE_NORM2
    noclick_degenerate = p_noclick < DEGENERATE_NORM2

    if click_degenerate:
        phase_click = math.nan
        amp_click = complex(math.nan, math.nan)
    else:
        amp_click = fock.mean_field(click_branch, 2)
        phase_click = cmath.phase(amp_click * cmath.exp(-1j * ref))
    if noclick_degenerate:
        phase_noclick = math.nan
    else:
        phase_noclick = cmath.phase(fock.mean_field(noclick_branch, 2) * cmath.exp(-1j * ref))

    return ProtocolResult(
        p_click=p_click,
        p_noclick=p_noclick,
        p_multi=p_multi,
        phase_click_exact=phase_click,
        phase_noclick_exact=phase_noclick,
        probe_amplitude_click=amp_click,
        truncation_deficit=deficit,
        click_degenerate=click_degenerate,
        noclick_degenerate=noclick_degenerate,
    )


def differential_rel_error(result: ProtocolResult, prediction: PhasePrediction) -> float:
    """Relative disagreement of the exact differential against the closed form."""
    exact = result.differential_exact
    analytic = prediction.differential
    if analytic == 0.0:
        return 0.0 if abs(exact) < _ZERO_PHASE_ATOL else math.inf
    return abs(exact - analytic) / abs(analytic)


def sweep_validity(
    params_grid: Iterable[InterferometerParams],
    cutoffs: Sequence[int] | None = None,
) -> list[SweepRow]:
    """Oracle-versus-analytic comparison over a parameter grid.

    One row per point; per-point failures (truncation, degenerate branches)
    are recorded in the row note and never abort the sweep.
    """
    grid = list(params_grid)
    if not grid:
        raise ValueError("parameter grid is empty")
    rows: list[SweepRow] = []
    for params in grid:
        prediction = predict_phases(params)
        verdict = check_validity(params).verdict
        try:
            result = run_protocol(params, cutoffs)
        except Exception as exc:  # recorded in-row by contract
            rows.append(
                SweepRow(params, prediction, None, math.nan, verdict, note=f"error: {exc}")
            )
            continue
        note = ""
        if result.click_degenerate or result.noclick_degenerate:
            note = "degenerate branch"
            rel = math.nan
        else:
            rel = differential_rel_error(result, prediction)
        rows.append(SweepRow(params, prediction, result, rel, verdict, note=note))
    return rows
