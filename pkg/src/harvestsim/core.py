"""Second-order detector-pair state: the four scalar integrals, the 4x4
density matrix, negativity, Bell fractions, and positioning-uncertainty
smearing of the correlation term.

Basis order throughout is {|gg>, |ge>, |eg>, |ee>}.  The reduced state is
fixed by the two local excitation terms (real, separation-independent),
one exchange term, and one |gg><ee| correlation term; entanglement at
this order is the competition between the correlation term and the local
noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .detectors import (
    CausalClass,
    DetectorParams,
    Disjoint,
    Overlapping,
    Scenario,
    SwitchingWindow,
    TimingRegime,
    classify_causal,
    classify_timing,
)
from .quadrature import (
    DEFAULT_SETTINGS,
    IntegrandSpec,
    QuadratureSettings,
    QuadResult,
    integrate_radial,
)
from .specfun import damped_im_erfi, ediff, sinc

__all__ = [
    "SecondOrderIntegrals",
    "TwoQubitState",
    "HarvestReport",
    "window_factor_plus",
    "compute_I_nn",
    "compute_I_AB",
    "jtilde_disjoint",
    "jtilde_overlap",
    "compute_J",
    "compute_J_smeared",
    "compute_J_time_smeared",
    "smear_J_gauss_hermite",
    "assemble_rho",
    "partial_transpose",
    "negativity_closed",
    "negativity_numeric",
    "negativity_sectors",
    "bell_fractions",
    "ratio_R",
    "evaluate_scenario",
]

BELL_PHI_PLUS = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0)
BELL_PHI_MINUS = np.array([1.0, 0.0, 0.0, -1.0]) / math.sqrt(2.0)
BELL_PSI_PLUS = np.array([0.0, 1.0, 1.0, 0.0]) / math.sqrt(2.0)
BELL_PSI_MINUS = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0)


@dataclass(frozen=True)
class SecondOrderIntegrals:
    """The four scalars that fully determine the reduced two-detector state."""

    i_aa: float
    i_bb: float
    i_ab: complex
    j: complex

    @property
    def i_plus(self) -> float:
        return self.i_aa + self.i_bb

    @property
    def i_minus(self) -> float:
        return self.i_aa - self.i_bb

    def validate(self) -> None:
        if not (self.i_aa >= 0.0 and self.i_bb >= 0.0):
            raise ValueError("SecondOrderIntegrals: diagonal terms must be >= 0")
        if abs(self.i_ab) ** 2 > self.i_aa * self.i_bb + 1e-10:
            raise ValueError(
                "SecondOrderIntegrals: |i_ab|^2 exceeds i_aa*i_bb (Cauchy-Schwarz)"
            )


@dataclass(frozen=True)
class TwoQubitState:
    """4x4 density matrix with the second-order sparsity pattern enforced."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError("TwoQubitState: matrix must be 4x4")
        if np.max(np.abs(m - m.conj().T)) > 1e-14:
            raise ValueError("TwoQubitState: matrix not Hermitian to 1e-14")
        if abs(np.trace(m).real - 1.0) > 1e-14 or abs(np.trace(m).imag) > 1e-14:
            raise ValueError("TwoQubitState: trace differs from 1 by more than 1e-14")
        allowed = np.zeros((4, 4), dtype=bool)
        for i, k in [(0, 0), (1, 1), (2, 2), (1, 2), (2, 1), (0, 3), (3, 0)]:
            allowed[i, k] = True
        if np.any(np.abs(m[~allowed]) > 0.0):
            raise ValueError("TwoQubitState: entries outside the second-order pattern")
        object.__setattr__(self, "matrix", m)


def window_factor_plus(det: DetectorParams, omega):
    """Rectangular-window Fourier factor at the up-shifted frequency omega + gap.

    Returns ediff(t_on, t_off, omega + gap); magnitude equals
    2*T_minus*|sinc((omega+gap)*T_minus)| and all products of two such
    factors are convention-independent.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0.0):
        raise ValueError("window_factor_plus: omega must be >= 0")
    w = det.window
    return ediff(w.t_on, w.t_off, omega + det.gap)


def _endpoint_scale(w: SwitchingWindow) -> float:
    return max(abs(w.t_on), abs(w.t_off))


def _jtilde_general(absorber: DetectorParams, emitter: DetectorParams, omega):
    """Nested two-time integral over absorber time t and emitter time t' <= t.

    Closed form assembled from entire ``ediff`` blocks; the only division
    is by omega + emitter.gap > 0, so the expression is regular for all
    omega >= 0 (in particular at omega = absorber.gap).  Vectorized in omega.
    """
    omega = np.asarray(omega, dtype=float)
    wn, wm = absorber.window, emitter.window
    a_minus = omega - absorber.gap
    a_plus = omega + emitter.gap
    gap_sum = absorber.gap + emitter.gap
    out = np.zeros(omega.shape, dtype=complex)

    u0, u1 = max(wn.t_on, wm.t_on), min(wn.t_off, wm.t_off)
    if u1 > u0:
        const = ediff(u0, u1, gap_sum)  # frequency-independent block
        out -= (const - np.exp(1j * a_plus * wm.t_on) * ediff(u0, u1, -a_minus)) / a_plus
    v0, v1 = max(wn.t_on, wm.t_off), wn.t_off
    if v1 > v0:
        out -= ediff(v0, v1, -a_minus) * ediff(wm.t_on, wm.t_off, a_plus)
    return complex(out) if out.ndim == 0 else out


def jtilde_disjoint(emitter: DetectorParams, absorber: DetectorParams, omega):
    """Correlation kernel for an emitter window entirely before the absorber's.

    Equals the product of the two one-window time integrals; regular at
    omega = absorber.gap by construction.
    """
    if emitter.window.t_off > absorber.window.t_on:
        raise ValueError("jtilde_disjoint: emitter window must end before absorber starts")
    return _jtilde_general(absorber, emitter, omega)


def jtilde_overlap(emitter: DetectorParams, absorber: DetectorParams, omega):
    """Correlation kernel for overlapping windows (split into the no-overlap
    and overlap time domains, recombined before any division).
    """
    timing = classify_timing(emitter.window, absorber.window)
    if not isinstance(timing, Overlapping):
        raise ValueError("jtilde_overlap: windows must overlap")
    return _jtilde_general(absorber, emitter, omega)


def _jhat(s: Scenario, omega):
    """Sum of both emitter/absorber orderings of the correlation kernel."""
    total = np.zeros(np.shape(omega), dtype=complex)
    for absorber, emitter in ((s.det_b, s.det_a), (s.det_a, s.det_b)):
        if absorber.window.t_off <= emitter.window.t_on:
            continue  # absorber off before emitter starts: kernel vanishes
        total = total + _jtilde_general(absorber, emitter, omega)
    return total


def _require_equal_smearing(s: Scenario, op: str) -> float:
    if s.det_a.smearing != s.det_b.smearing:
        raise ValueError(f"{op}: requires equal smearing widths for both detectors")
    return s.det_a.smearing


def _i_nn_result(det: DetectorParams, settings: QuadratureSettings) -> QuadResult:
    lam, sig = det.coupling, det.smearing

    def integrand(w):
        wf = window_factor_plus(det, w)
        return w * np.exp(-0.5 * (w * sig) ** 2) * (wf.real**2 + wf.imag**2) + 0j

    spec = IntegrandSpec(
        evaluate=integrand,
        damping_scale=sig,
        max_phase_rate=det.window.duration,
    )
    res = integrate_radial(spec, settings)
    pref = lam * lam / (4.0 * math.pi**2)
    return QuadResult(pref * res.value, pref * res.abs_error, res.evaluations)


def compute_I_nn(det: DetectorParams, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Local excitation term of one detector (separation-independent, >= 0)."""
    return _i_nn_result(det, settings).value.real


def _i_ab_result(s: Scenario, settings: QuadratureSettings) -> QuadResult:
    sig = _require_equal_smearing(s, "compute_I_AB")
    r0 = s.separation
    da, db = s.det_a, s.det_b

    def integrand(w):
        return (w * sinc(w * r0) * np.exp(-0.5 * (w * sig) ** 2)
                * np.conj(window_factor_plus(da, w)) * window_factor_plus(db, w))

    spec = IntegrandSpec(
        evaluate=integrand,
        damping_scale=sig,
        max_phase_rate=r0 + _endpoint_scale(da.window) + _endpoint_scale(db.window),
    )
    res = integrate_radial(spec, settings)
    pref = da.coupling * db.coupling / (4.0 * math.pi**2)
    return QuadResult(pref * res.value, pref * res.abs_error, res.evaluations)


def compute_I_AB(s: Scenario, settings: QuadratureSettings = DEFAULT_SETTINGS) -> complex:
    """Exchange term between the detectors (enters the |ge><eg| coherence)."""
    return _i_ab_result(s, settings).value


def _j_result_at_separation(s: Scenario, r: float, settings: QuadratureSettings) -> QuadResult:
    """Correlation term at separation r (r may be any real; even in r)."""
    sig = _require_equal_smearing(s, "compute_J")
    da, db = s.det_a, s.det_b

    def integrand(w):
        return w * sinc(w * r) * np.exp(-0.5 * (w * sig) ** 2) * _jhat(s, w)

    rate = abs(r) + 2.0 * max(_endpoint_scale(da.window), _endpoint_scale(db.window))
    spec = IntegrandSpec(
        evaluate=integrand,
        damping_scale=sig,
        max_phase_rate=rate,
        singular_points=tuple(sorted({da.gap, db.gap})),
    )
    res = integrate_radial(spec, settings)
    pref = da.coupling * db.coupling / (4.0 * math.pi**2)
    return QuadResult(pref * res.value, pref * res.abs_error, res.evaluations)


def compute_J(s: Scenario, settings: QuadratureSettings = DEFAULT_SETTINGS) -> complex:
    """Correlation term connecting |gg> and |ee> at the mean separation."""
    return _j_result_at_separation(s, s.separation, settings).value


def _j_smeared_result(s: Scenario, settings: QuadratureSettings) -> QuadResult:
    """Complex correlation term averaged over a Gaussian separation spread."""
    sig = _require_equal_smearing(s, "compute_J_smeared")
    delta = s.position_uncertainty
    if not delta > 0.0:
        raise ValueError("compute_J_smeared: requires position_uncertainty > 0")
    if isinstance(classify_timing(s.det_a.window, s.det_b.window), Overlapping):
        raise ValueError(
            "compute_J_smeared: closed form only valid for non-overlapping windows; "
            "use smear_J_gauss_hermite instead"
        )
    da, db = s.det_a, s.det_b
    x = s.separation / delta

    def integrand(w):
        return (damped_im_erfi(x, 0.5 * delta * w)
                * np.exp(-0.5 * (w * sig) ** 2) * _jhat(s, w))

    rate = s.separation + 2.0 * max(_endpoint_scale(da.window), _endpoint_scale(db.window))
    spec = IntegrandSpec(
        evaluate=integrand,
        damping_scale=sig,
        max_phase_rate=rate,
        singular_points=tuple(sorted({da.gap, db.gap})),
    )
    res = integrate_radial(spec, settings)
    pref = da.coupling * db.coupling / (4.0 * delta * math.pi**1.5)
    return QuadResult(pref * res.value, pref * res.abs_error, res.evaluations)


def compute_J_smeared(s: Scenario, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """|correlation term| under Gaussian separation uncertainty (closed form)."""
    return abs(_j_smeared_result(s, settings).value)


def smear_J_gauss_hermite(
    s: Scenario,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
    nodes: int = 41,
) -> tuple[complex, float]:
    """Average the correlation term over separations r ~ Pr(r) by Gauss-Hermite.

    Pr(r) = exp(-(r-r0)^2/delta^2)/(delta*sqrt(pi)), including the formal
    negative-r tail.  Returns (mean of J, mean of |J|); the second is a
    diagnostic distinguishing |<J>| from <|J|>.
    """
    delta = s.position_uncertainty
    if not delta > 0.0:
        raise ValueError("smear_J_gauss_hermite: requires position_uncertainty > 0")
    u, w = hermgauss(nodes)
    w = w / math.sqrt(math.pi)
    js = np.array(
        [_j_result_at_separation(s, s.separation + delta * ui, settings).value for ui in u]
    )
    return complex(np.sum(w * js)), float(np.sum(w * np.abs(js)))


def _time_smeared_j_complex(
    s: Scenario, delta_t: float, settings: QuadratureSettings, nodes: int
) -> complex:
    u, w = hermgauss(nodes)
    w = w / math.sqrt(math.pi)
    total = 0.0 + 0.0j
    for ui, wi in zip(u, w):
        shifted = Scenario(
            det_a=s.det_a,
            det_b=DetectorParams(
                coupling=s.det_b.coupling,
                gap=s.det_b.gap,
                smearing=s.det_b.smearing,
                window=s.det_b.window.shifted(delta_t * ui),
            ),
            separation=s.separation,
            position_uncertainty=0.0,
        )
        total += wi * _j_result_at_separation(shifted, s.separation, settings).value
    return total


def compute_J_time_smeared(
    s: Scenario,
    delta_t: float,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
    nodes: int = 41,
) -> float:
    """|correlation term| under a Gaussian clock-offset spread of scale delta_t.

    The offset distribution mirrors the spatial convention
    (variance delta_t^2/2); the second window is shifted per node.
    """
    if not delta_t > 0.0:
        raise ValueError("compute_J_time_smeared: requires delta_t > 0")
    if isinstance(classify_timing(s.det_a.window, s.det_b.window), Overlapping):
        raise ValueError("compute_J_time_smeared: requires non-overlapping windows")
    return abs(_time_smeared_j_complex(s, delta_t, settings, nodes))


def assemble_rho(ints: SecondOrderIntegrals) -> TwoQubitState:
    """Second-order reduced state; trace 1 and Hermitian by construction."""
    ints.validate()
    if ints.i_plus >= 1.0:
        raise ValueError(
            f"assemble_rho: i_aa + i_bb = {ints.i_plus:.3g} >= 1 leaves no ground-state "
            "population; outside the perturbative regime"
        )
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1.0 - ints.i_plus
    m[1, 1] = ints.i_bb
    m[2, 2] = ints.i_aa
    m[1, 2] = ints.i_ab
    m[2, 1] = np.conj(ints.i_ab)
    m[0, 3] = -np.conj(ints.j)
    m[3, 0] = -ints.j
    return TwoQubitState(m)


def partial_transpose(rho) -> np.ndarray:
    """Transpose the second-qubit index of a two-qubit matrix."""
    m = rho.matrix if isinstance(rho, TwoQubitState) else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError("partial_transpose: matrix must be 4x4")
    return m.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def negativity_closed(ints: SecondOrderIntegrals) -> tuple[float, float]:
    """(raw, clamped) negativity from the closed form of the single negative
    eigenvalue of the partially transposed second-order state."""
    raw = -0.5 * (ints.i_plus - math.sqrt(ints.i_minus**2 + 4.0 * abs(ints.j) ** 2))
    return raw, max(0.0, raw)


def _require_hermitian(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.conj().T)) > 1e-12 * scale:
        raise ValueError("expected a Hermitian matrix")
    return m


def negativity_numeric(rho_pt) -> float:
    """Minus the sum of negative eigenvalues of a Hermitian matrix."""
    m = _require_hermitian(rho_pt)
    eig = np.linalg.eigvalsh(m)
    return float(-np.sum(eig[eig < 0.0]))


def negativity_sectors(rho_pt) -> tuple[float, float]:
    """Split the partial-transpose spectrum into the two decoupled sectors.

    Returns (inner, outer): ``inner`` is minus the negative-eigenvalue sum
    of the {|ge>,|eg>} block (the second-order negativity); ``outer`` is
    the negative eigenvalue of the {|gg>,|ee>} block, a fourth-order
    diagnostic that is excluded from the reported negativity.
    """
    m = _require_hermitian(rho_pt)
    inner = m[1:3, 1:3]
    outer = m[np.ix_([0, 3], [0, 3])]
    eig_in = np.linalg.eigvalsh(inner)
    eig_out = np.linalg.eigvalsh(outer)
    return (
        float(-np.sum(eig_in[eig_in < 0.0])),
        float(min(0.0, eig_out.min())),
    )


def bell_fractions(rho: TwoQubitState) -> tuple[float, float, float, float]:
    """(phi+, phi-, psi+, psi-) overlaps computed directly from the matrix."""
    m = rho.matrix

    def frac(v):
        return float(np.real(v.conj() @ m @ v))

    return (
        frac(BELL_PHI_PLUS),
        frac(BELL_PHI_MINUS),
        frac(BELL_PSI_PLUS),
        frac(BELL_PSI_MINUS),
    )


def ratio_R(s: Scenario, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Smeared-to-unsmeared magnitude ratio of the correlation term."""
    j0 = abs(compute_J(s, settings))
    if j0 == 0.0:
        raise ZeroDivisionError("ratio_R: unsmeared correlation term vanishes")
    return compute_J_smeared(s, settings) / j0


@dataclass(frozen=True)
class HarvestReport:
    """Full second-order characterization of one scenario."""

    integrals: SecondOrderIntegrals      # j holds the smeared value when smearing applies
    j_unsmeared: complex
    j_smeared_abs: float | None
    smearing_method: str | None          # None, "erfi-closed-form", or "gauss-hermite"
    negativity_raw: float
    negativity: float
    o4_corner_eigenvalue: float          # diagnostic; excluded from negativity
    bell_phi_plus: float
    bell_phi_minus: float
    bell_psi_plus: float
    bell_psi_minus: float
    causal_class: CausalClass
    timing: TimingRegime
    quad_errors: dict = field(default_factory=dict)


def evaluate_scenario(
    s: Scenario,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
    time_smear: float | None = None,
) -> HarvestReport:
    """Compute every report quantity for one scenario.

    With nonzero position uncertainty the correlation term is smeared
    (closed form for disjoint windows, Gauss-Hermite averaging otherwise);
    ``time_smear`` applies the clock-offset smear instead.  The local
    terms are separation-independent and never smeared.
    """
    if time_smear is not None and s.position_uncertainty > 0.0:
        raise ValueError("evaluate_scenario: spatial and temporal smearing are exclusive")
    res_aa = _i_nn_result(s.det_a, settings)
    res_bb = _i_nn_result(s.det_b, settings)
    res_ab = _i_ab_result(s, settings)
    res_j = _j_result_at_separation(s, s.separation, settings)
    errors = {
        "i_aa": res_aa.abs_error,
        "i_bb": res_bb.abs_error,
        "i_ab": res_ab.abs_error,
        "j": res_j.abs_error,
    }

    j_unsmeared = res_j.value
    method = None
    j_eff = j_unsmeared
    j_smeared_abs = None
    if s.position_uncertainty > 0.0:
        timing = classify_timing(s.det_a.window, s.det_b.window)
        if isinstance(timing, Disjoint):
            res_sm = _j_smeared_result(s, settings)
            j_eff = res_sm.value
            errors["j_smeared"] = res_sm.abs_error
            method = "erfi-closed-form"
        else:
            j_eff, _ = smear_J_gauss_hermite(s, settings)
            method = "gauss-hermite"
        j_smeared_abs = abs(j_eff)
    elif time_smear is not None:
        if not time_smear > 0.0:
            raise ValueError("evaluate_scenario: time_smear must be > 0")
        j_eff = _time_smeared_j_complex(s, time_smear, settings, nodes=41)
        method = "gauss-hermite-time"
        j_smeared_abs = abs(j_eff)

    ints = SecondOrderIntegrals(
        i_aa=res_aa.value.real,
        i_bb=res_bb.value.real,
        i_ab=res_ab.value,
        j=j_eff,
    )
    rho = assemble_rho(ints)
    raw, clamped = negativity_closed(ints)
    _, outer = negativity_sectors(partial_transpose(rho))
    phi_p, phi_m, psi_p, psi_m = bell_fractions(rho)
    return HarvestReport(
        integrals=ints,
        j_unsmeared=j_unsmeared,
        j_smeared_abs=j_smeared_abs,
        smearing_method=method,
        negativity_raw=raw,
        negativity=clamped,
        o4_corner_eigenvalue=outer,
        bell_phi_plus=phi_p,
        bell_phi_minus=phi_m,
        bell_psi_plus=psi_p,
        bell_psi_minus=psi_m,
        causal_class=classify_causal(s),
        timing=classify_timing(s.det_a.window, s.det_b.window),
        quad_errors=errors,
    )
