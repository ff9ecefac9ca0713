"""Time-domain oracle: mean-field density matrix coupled to the cavity field.

State layout is a single collective 3x3 density matrix (levels |1>, |2>, |3>
at indices 0, 1, 2) plus the field amplitude alpha. The field obeys

    d alpha/dt = [i(delta_p - delta_ac) - kappa] alpha + i g N rho_31 + S

with rho_31 = <3|rho|1>. Dissipation: |3> decays to |1> and |2> at gamma31
and gamma32, ground-state dephasing damps the |1>-|2> coherence at gamma12,
and the incoherent pump moves population |1> -> |3> at rate r.

Two pump models are available. ``"rate"`` (the default) is a pure population
transfer with no coherence damping; it reproduces the closed-form
three-level steady state exactly for r > 0. The pumped two-level closed form
is the omega1 -> 0+ limit of the three-level model with gamma32 = 0, where a
weak coupling still cycles population out of |2>. A run at omega1 = 0 exactly
leaves |2> decoupled and departs from that form once r > 0.
``"lindblad"`` adds the r/2 damping of every
coherence involving |1> that a jump operator sqrt(r)|3><1| would imply.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .model import SteadyStateSet, solve_steady_states, with_stability
from .params import ProbeDrive, SystemParams

PUMP_MODELS = ("rate", "lindblad")


@dataclass(frozen=True)
class AtomCavityState:
    rho: np.ndarray
    alpha: complex

    @classmethod
    def ground(cls, alpha: complex = 0j) -> "AtomCavityState":
        rho = np.zeros((3, 3), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho, complex(alpha))

    @classmethod
    def from_vector(cls, y) -> "AtomCavityState":
        y = np.asarray(y, dtype=complex)
        return cls(y[:9].reshape(3, 3).copy(), complex(y[9]))

    def to_vector(self) -> np.ndarray:
        return np.append(np.asarray(self.rho, dtype=complex).ravel(), self.alpha)

    @property
    def intensity(self) -> float:
        return abs(self.alpha) ** 2

    def check(self, herm_tol=1e-12, trace_tol=1e-10, eig_tol=1e-9) -> None:
        """Raise ValueError unless rho is a valid density matrix."""
        rho = np.asarray(self.rho)
        if rho.shape != (3, 3):
            raise ValueError(f"rho must be 3x3, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
            raise ValueError("rho is not Hermitian")
        if abs(np.trace(rho) - 1) > trace_tol:
            raise ValueError(f"trace(rho) = {np.trace(rho)}")
        if np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) < -eig_tol:
            raise ValueError("rho has a negative eigenvalue")


@dataclass(frozen=True)
class LiouvillianSpec:
    params: SystemParams
    pump_model: str = "rate"

    def __post_init__(self):
        if self.pump_model not in PUMP_MODELS:
            raise ValueError(f"pump_model must be one of {PUMP_MODELS}, got {self.pump_model!r}")
        self.params.require_symmetric()

    def vector(self, drive: ProbeDrive) -> np.ndarray:
        p = self.params
        v = np.zeros(kernels.N_PARAMS)
        v[kernels.P_DELTA_P] = drive.delta_p
        v[kernels.P_DELTA_AC] = p.delta_ac
        v[kernels.P_DELTA1] = p.delta1
        v[kernels.P_G] = p.g
        v[kernels.P_GN] = p.g * p.n_atoms
        v[kernels.P_OMEGA1] = p.omega1
        v[kernels.P_GAMMA31] = p.gamma31
        v[kernels.P_GAMMA32] = p.gamma32
        v[kernels.P_GAMMA12] = p.gamma12
        v[kernels.P_R] = p.r_pump
        v[kernels.P_KAPPA] = p.kappa
        v[kernels.P_LINDBLAD_PUMP] = 1.0 if self.pump_model == "lindblad" else 0.0
        src = drive.source(p)
        v[kernels.P_SRC_RE] = src.real
        v[kernels.P_SRC_IM] = src.imag
        return v


def rhs(spec: LiouvillianSpec, drive: ProbeDrive, state: AtomCavityState) -> AtomCavityState:
    """Time derivative of (rho, alpha)."""
    return AtomCavityState.from_vector(kernels.rhs(state.to_vector(), spec.vector(drive)))


@dataclass(frozen=True)
class Relaxation:
    state: AtomCavityState
    converged: bool
    t: float
    n_steps: int
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    trajectory: np.ndarray = field(default_factory=lambda: np.empty((0, kernels.STATE_SIZE), complex))


def integrate_to_steady_state(spec: LiouvillianSpec, drive: ProbeDrive, initial: Optional[AtomCavityState] = None,
                              t_max: float = 2000.0, tol: float = 1e-9, tol_step: float = 1e-10,
                              record_dt: float = 0.0, max_records: int = 100_000) -> Relaxation:
    """Adaptive RK4 until the derivative falls below ``tol`` or ``t_max`` is reached.

    Non-convergence is reported through the flag, not raised.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    initial = initial if initial is not None else AtomCavityState.ground()
    y, t, converged, n, rec_t, rec_y = kernels.integrate(
        initial.to_vector(), spec.vector(drive), t_max, 1e-2, tol_step, tol,
        record_dt, max_records if record_dt > 0 else 0)
    return Relaxation(AtomCavityState.from_vector(y), bool(converged), float(t), int(n),
                      np.asarray(rec_t), np.asarray(rec_y))


# ----------------------------------------------------- fixed-field atomics

def _atomic_matrix(spec: LiouvillianSpec, delta_p: float, alpha: complex) -> np.ndarray:
    """Superoperator (9x9, row-major vec) of the atomic equations at frozen alpha."""
    v = spec.vector(ProbeDrive(delta_p))
    m = np.empty((9, 9), dtype=complex)
    for k in range(9):
        y = np.zeros(kernels.STATE_SIZE, dtype=complex)
        y[k] = 1.0
        y[9] = alpha
        m[:, k] = kernels.rhs(y, v)[:9]
    return m


def atomic_steady_state(spec: LiouvillianSpec, delta_p: float, alpha: complex) -> np.ndarray:
    """Stationary rho for a fixed cavity field.

    When the stationary space is degenerate (e.g. a decoupled |2> with
    omega1 = gamma32 = 0) the state with empty |2> is returned, i.e. the one
    reached from the ground state |1>.
    """
    m = _atomic_matrix(spec, delta_p, alpha)
    _, s, vh = np.linalg.svd(m)
    tol = 1e-10 * max(1.0, s[0])
    null = vh[s <= tol].conj().T if np.any(s <= tol) else vh[-1:].conj().T
    trace_row = np.array([1, 0, 0, 0, 1, 0, 0, 0, 1], dtype=complex)
    if null.shape[1] == 1:
        vec = null[:, 0] / (trace_row @ null[:, 0])
    else:
        pop2 = np.zeros(9, dtype=complex)
        pop2[4] = 1.0
        a = np.vstack([trace_row @ null, pop2 @ null])
        coef = np.linalg.lstsq(a, np.array([1.0, 0.0], dtype=complex), rcond=None)[0]
        vec = null @ coef
    rho = vec.reshape(3, 3)
    return 0.5 * (rho + rho.conj().T)


def chi_from_master_equation(spec: LiouvillianSpec, delta_p: float, intensity: float) -> complex:
    """Susceptibility i g N rho_31 / alpha from the fixed-field stationary state."""
    if intensity < 0:
        raise ValueError("intensity must be >= 0")
    # a tiny probe field keeps rho_31 well above the SVD noise floor
    alpha = np.sqrt(intensity) if intensity > 0 else 1e-4
    rho = atomic_steady_state(spec, delta_p, alpha)
    p = spec.params
    return complex(1j * p.g * p.n_atoms * rho[2, 0] / alpha)


# -------------------------------------------------------------- oracle

@dataclass(frozen=True)
class OracleEntry:
    intensity: float
    stable: Optional[bool]
    final_intensities: tuple
    converged: bool
    confirmed: bool

    @property
    def outcome(self) -> str:
        if self.stable is None:
            return "undetermined"
        return "attracted" if self.stable else "repelled"


@dataclass(frozen=True)
class OracleReport:
    entries: tuple = ()

    @property
    def confirmed(self) -> int:
        return sum(e.confirmed for e in self.entries)

    @property
    def mismatches(self) -> list:
        return [e for e in self.entries if not e.confirmed]

    @property
    def all_confirmed(self) -> bool:
        return not self.mismatches

    def summary(self) -> str:
        n_att = sum(1 for e in self.entries if e.stable and e.confirmed)
        n_rep = sum(1 for e in self.entries if e.stable is False and e.confirmed)
        return f"{self.confirmed}/{len(self.entries)} confirmed ({n_att} attractors, {n_rep} repellers)"


def seeded_state(spec: LiouvillianSpec, drive: ProbeDrive, alpha: complex) -> AtomCavityState:
    return AtomCavityState(atomic_steady_state(spec, drive.delta_p, alpha), complex(alpha))


def oracle_compare(spec: LiouvillianSpec, drive: ProbeDrive, steady: Optional[SteadyStateSet] = None,
                   variant=None, rtol: float = 1e-4, stable_kick: float = 1e-3,
                   unstable_kick: float = 1e-6, t_max: float = 5000.0) -> OracleReport:
    """Check each root's slope-criterion label against time-domain basins.

    Stable roots are seeded with the field scaled by 1 +- ``stable_kick`` and
    must relax back to within ``rtol`` (relative in I). Unstable roots are
    seeded with 1 +- ``unstable_kick`` and both runs must leave by more than
    ``rtol``.
    """
    if steady is None:
        steady = solve_steady_states(spec.params, drive, variant)
    steady = with_stability(spec.params, steady)
    entries = []
    for root in steady:
        kick = unstable_kick if root.stable is False else stable_kick
        finals, conv = [], True
        for sign in (+1.0, -1.0):
            alpha = root.alpha * (1 + sign * kick) if root.intensity > 0 else sign * kick
            run = integrate_to_steady_state(spec, drive, seeded_state(spec, drive, alpha), t_max=t_max)
            finals.append(run.state.intensity)
            conv = conv and run.converged
        scale = max(root.intensity, 1e-12)
        near = [abs(f - root.intensity) <= rtol * scale for f in finals]
        if root.stable is None:
            confirmed = False
        elif root.stable:
            confirmed = conv and all(near)
        else:
            confirmed = conv and not any(near)
        entries.append(OracleEntry(root.intensity, root.stable, tuple(finals), conv, confirmed))
    return OracleReport(tuple(entries))
