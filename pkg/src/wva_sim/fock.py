"""State-vector engine for a register of truncated bosonic modes.

A register holds a dense complex amplitude tensor over a product of
single-mode Fock spaces, each truncated to ``cutoff`` levels.  The three
primitives a post-selected interferometer needs are provided exactly:
coherent-state preparation, a two-mode beam-splitter rotation (built
blockwise per total photon number, so photon number is conserved by
construction), and a cross-Kerr phase (diagonal, hence exactly unitary).
Projection onto a Fock level and the usual expectation values round out
the surface.

All operations are pure: they take a register and return a new one.
Amplitude arrays are frozen after construction, so registers are safe to
share between threads or processes.  States may be subnormalized (norm
below one) after projection; renormalization is always an explicit
caller action because post-selection probabilities are data.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DegenerateStateError,
    RegisterBudgetError,
    TruncationError,
    TruncationWarning,
)

# Amplitude-count ceiling for tensor products (~1 GiB of complex128).
DEFAULT_AMPLITUDE_BUDGET = 64_000_000

# Beam-splitter leakage handling: warn when the last retained level of an
# affected mode carries more weight than WARN_TOL, fail when the realized
# leaked norm^2 exceeds FAIL_TOL.
LEAK_WARN_TOL = 1e-9
LEAK_FAIL_TOL = 1e-6

_NORM_SLACK = 1e-12


@dataclass(frozen=True)
class ModeSpec:
    """A single truncated mode; the Fock basis is {|0>, ..., |cutoff-1>}."""

    cutoff: int

    def __post_init__(self) -> None:
        if not isinstance(self.cutoff, (int, np.integer)) or self.cutoff < 1:
            raise ValueError(f"cutoff must be an integer >= 1, got {self.cutoff!r}")


@dataclass(frozen=True)
class FockRegister:
    """Immutable register: ordered modes plus a dense amplitude tensor.

    The amplitude array is frozen in place at construction (no copy), so
    pass ownership rather than a buffer you intend to keep writing.
    """

    modes: tuple[ModeSpec, ...]
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        shape = tuple(m.cutoff for m in self.modes)
        if self.amplitudes.shape != shape:
            raise ValueError(
                f"amplitude tensor shape {self.amplitudes.shape} does not match "
                f"mode cutoffs {shape}"
            )
        if self.amplitudes.dtype != np.complex128:
            object.__setattr__(self, "amplitudes", self.amplitudes.astype(np.complex128))
        n2 = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if not (0.0 <= n2 <= 1.0 + _NORM_SLACK):
            raise ValueError(f"squared norm {n2} outside [0, 1]")
        self.amplitudes.setflags(write=False)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def cutoffs(self) -> tuple[int, ...]:
        return tuple(m.cutoff for m in self.modes)


@dataclass(frozen=True)
class ProjectionOutcome:
    """Reduced register (projected mode removed) and the outcome probability."""

    state: FockRegister
    probability: float


def norm_squared(state: FockRegister) -> float:
    return float(np.vdot(state.amplitudes, state.amplitudes).real)


def truncation_deficit(state: FockRegister) -> float:
    """Norm^2 missing relative to a unit-norm preparation (clipped at 0)."""
    return max(0.0, 1.0 - norm_squared(state))


def normalized(state: FockRegister) -> FockRegister:
    n2 = norm_squared(state)
    if n2 <= 0.0:
        raise DegenerateStateError("cannot normalize a zero-norm state")
    return FockRegister(state.modes, state.amplitudes / math.sqrt(n2))


def suggested_cutoff(amplitude: complex) -> int:
    """Cutoff keeping the Poisson tail of a coherent state below ~1e-9."""
    a = abs(amplitude)
    return math.ceil(a * a + 6.0 * a + 10.0)


def make_coherent(amplitude: complex, cutoff: int) -> FockRegister:
    """Truncated coherent state c_n = exp(-|a|^2/2) a^n / sqrt(n!).

    The truncation deficit 1 - sum |c_n|^2 is recoverable from the returned
    register via :func:`truncation_deficit`.
    """
    if not (np.isfinite(np.real(amplitude)) and np.isfinite(np.imag(amplitude))):
        raise ValueError(f"coherent amplitude must be finite, got {amplitude!r}")
    spec = ModeSpec(int(cutoff))
    amps = np.zeros(spec.cutoff, dtype=np.complex128)
    amps[0] = math.exp(-0.5 * abs(amplitude) ** 2)
    for n in range(1, spec.cutoff):
        amps[n] = amps[n - 1] * amplitude / math.sqrt(n)
    return FockRegister((spec,), amps)


def make_fock(n: int, cutoff: int) -> FockRegister:
    """Single-mode number state |n>."""
    spec = ModeSpec(int(cutoff))
    if not 0 <= n < spec.cutoff:
        raise ValueError(f"Fock level {n} outside [0, {spec.cutoff - 1}]")
    amps = np.zeros(spec.cutoff, dtype=np.complex128)
    amps[n] = 1.0
    return FockRegister((spec,), amps)


def tensor(
    a: FockRegister, b: FockRegister, budget: int = DEFAULT_AMPLITUDE_BUDGET
) -> FockRegister:
    """Tensor product; mode lists concatenate and norms multiply."""
    size = a.amplitudes.size * b.amplitudes.size
    if size > budget:
        raise RegisterBudgetError(
            f"tensor product needs {size} amplitudes, budget is {budget}"
        )
    amps = np.multiply.outer(a.amplitudes, b.amplitudes)
    return FockRegister(a.modes + b.modes, amps)


def _check_mode(state: FockRegister, mode: int) -> int:
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode index {mode} outside register of {state.n_modes} modes")
    return mode


@lru_cache(maxsize=4096)
def _bs_block(total: int, theta: float) -> np.ndarray:
    """Unitary on the total-photon-N multiplet of a two-mode beam splitter.

    Basis index m = photons in the first mode, the second holds N - m.
    Creation operators map as a1+ -> c a1+ + s a2+ and a2+ -> -s a1+ + c a2+
    (c = cos(theta), s = sin(theta)), i.e. coherent amplitudes transform with
    the matrix [[c, -s], [s, c]].  Built from the binomial expansion of
    (c a1+ + s a2+)^n1 (-s a1+ + c a2+)^n2 acting on vacuum, which fixes the
    otherwise arbitrary global phase per multiplet.

    The alternating sums cancel, so they are evaluated in extended precision;
    the returned float64 block is unitary to ~1e-12 through N of about 60,
    which comfortably covers registers within the amplitude budget.
    """
    c = np.longdouble(math.cos(theta))
    s = np.longdouble(math.sin(theta))
    d = total + 1
    k = np.arange(d)
    comb = np.zeros((d, d), dtype=np.longdouble)
    for n in range(d):
        comb[n, : n + 1] = [math.comb(n, j) for j in range(n + 1)]
    lf = np.array([math.lgamma(n + 1) for n in range(d)], dtype=np.longdouble)

    block = np.zeros((d, d), dtype=np.longdouble)
    for n in range(d):  # input: |n, total-n>
        # term_k = C(n,k) C(total-n, m-k) (-1)^(m-k) c^(total-n-m+2k) s^(n+m-2k)
        for m in range(d):
            kk = k[max(0, m - (total - n)) : min(n, m) + 1]
            if kk.size == 0:
                continue
            cexp = total - n - m + 2 * kk
            sexp = n + m - 2 * kk
            signs = np.where((m - kk) % 2 == 0, 1.0, -1.0).astype(np.longdouble)
            terms = signs * comb[n, kk] * comb[total - n, m - kk]
            block[m, n] = np.sum(terms * np.power(c, cexp) * np.power(s, sexp))
        scale = np.exp(0.5 * (lf + lf[::-1] - lf[n] - lf[total - n]))
        block[:, n] *= scale
    return block.astype(np.float64)


def apply_beam_splitter(
    state: FockRegister,
    mode_a: int,
    mode_b: int,
    theta: float,
    *,
    warn_tol: float = LEAK_WARN_TOL,
    fail_tol: float = LEAK_FAIL_TOL,
) -> FockRegister:
    """Two-mode rotation: coherent amplitudes map to
    (cos(theta) a - sin(theta) b, sin(theta) a + cos(theta) b).

    Exactly number-conserving: every total-photon multiplet is rotated by a
    unitary block.  Multiplets that do not fit inside the cutoffs lose their
    clipped part; the lost norm^2 is raised as a truncation error past
    ``fail_tol``.  Occupation on the last retained level of either mode
    triggers a truncation warning above ``warn_tol``.
    """
    mode_a = _check_mode(state, mode_a)
    mode_b = _check_mode(state, mode_b)
    if mode_a == mode_b:
        raise ValueError("beam splitter needs two distinct modes")
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")

    da = state.modes[mode_a].cutoff
    db = state.modes[mode_b].cutoff
    work = np.moveaxis(state.amplitudes, (mode_a, mode_b), (0, 1))
    tail_shape = work.shape[2:]
    work = work.reshape(da, db, -1)

    edge = float(np.sum(np.abs(work[da - 1, :, :]) ** 2)) + float(
        np.sum(np.abs(work[:, db - 1, :]) ** 2)
    )
    if edge > warn_tol:
        warnings.warn(
            f"beam splitter input has weight {edge:.3e} on the last Fock level",
            TruncationWarning,
            stacklevel=2,
        )

    out = np.zeros_like(work)
    leaked = 0.0
    for total in range(da + db - 1):
        lo = max(0, total - db + 1)
        hi = min(total, da - 1)
        ms = np.arange(lo, hi + 1)
        block = _bs_block(total, float(theta))
        if lo == 0 and hi == total:
            out[ms, total - ms, :] = block @ work[ms, total - ms, :]
        else:
            full = np.zeros((total + 1, work.shape[2]), dtype=np.complex128)
            full[ms] = work[ms, total - ms, :]
            rotated = block @ full
            out[ms, total - ms, :] = rotated[ms]
            kept = float(np.sum(np.abs(rotated[ms]) ** 2))
            leaked += float(np.sum(np.abs(rotated) ** 2)) - kept
    if leaked > fail_tol:
        raise TruncationError(
            f"beam splitter leaked norm^2 {leaked:.3e} past the cutoffs "
            f"(tolerance {fail_tol:.1e})"
        )

    out = out.reshape((da, db) + tail_shape)
    out = np.moveaxis(out, (0, 1), (mode_a, mode_b))
    return FockRegister(state.modes, np.ascontiguousarray(out))


def apply_cross_kerr(
    state: FockRegister, mode_s: int, mode_pr: int, phi: float
) -> FockRegister:
    """Diagonal phase exp(i phi n_s n_pr); magnitudes are untouched."""
    mode_s = _check_mode(state, mode_s)
    mode_pr = _check_mode(state, mode_pr)
    if mode_s == mode_pr:
        raise ValueError("cross-Kerr coupling needs two distinct modes")
    if not math.isfinite(phi):
        raise ValueError("phi must be finite")
    ns = np.arange(state.modes[mode_s].cutoff, dtype=np.float64)
    npr = np.arange(state.modes[mode_pr].cutoff, dtype=np.float64)
    # phase table broadcast over the untouched axes
    shape_s = [1] * state.n_modes
    shape_s[mode_s] = ns.size
    shape_pr = [1] * state.n_modes
    shape_pr[mode_pr] = npr.size
    exponent = ns.reshape(shape_s) * npr.reshape(shape_pr)
    return FockRegister(state.modes, state.amplitudes * np.exp(1j * phi * exponent))


def project_fock(state: FockRegister, mode: int, n: int) -> ProjectionOutcome:
    """Project one mode onto |n>, returning the reduced register unrenormalized."""
    mode = _check_mode(state, mode)
    if not 0 <= n < state.modes[mode].cutoff:
        raise ValueError(
            f"Fock level {n} outside mode cutoff {state.modes[mode].cutoff}"
        )
    reduced = np.take(state.amplitudes, n, axis=mode)
    rest = state.modes[:mode] + state.modes[mode + 1 :]
    shape = tuple(m.cutoff for m in rest)
    out = FockRegister(rest, np.array(reduced, dtype=np.complex128).reshape(shape))
    return ProjectionOutcome(state=out, probability=norm_squared(out))


def fock_distribution(state: FockRegister, mode: int) -> np.ndarray:
    """Unnormalized occupation probabilities P(n) for one mode."""
    mode = _check_mode(state, mode)
    moved = np.moveaxis(state.amplitudes, mode, 0)
    flat = moved.reshape(moved.shape[0], -1)
    return np.sum(np.abs(flat) ** 2, axis=1)


def mean_field(state: FockRegister, mode: int) -> complex:
    """Conditional mean field <a> = <psi|a|psi> / <psi|psi> for one mode."""
    mode = _check_mode(state, mode)
    n2 = norm_squared(state)
    if n2 <= 0.0:
        raise DegenerateStateError("mean field of a zero-norm state is undefined")
    moved = np.moveaxis(state.amplitudes, mode, 0)
    flat = moved.reshape(moved.shape[0], -1)
    acc = 0.0 + 0.0j
    for n in range(flat.shape[0] - 1):
        acc += math.sqrt(n + 1) * np.vdot(flat[n], flat[n + 1])
    return complex(acc / n2)


def number_expectation(state: FockRegister, mode: int) -> float:
    """<n> for one mode, normalized by the state's squared norm."""
    n2 = norm_squared(state)
    if n2 <= 0.0:
        raise DegenerateStateError("<n> of a zero-norm state is undefined")
    dist = fock_distribution(state, mode)
    return float(np.dot(np.arange(dist.size), dist) / n2)
