"""Time-domain simulation: hysteresis sweeps, ring-up transients, impulses.

The mechanical timescale (1/omega_z ~ 3 us) is far slower than the cavity
field (1/2kappa ~ 120 ns), so by default the intracavity photon number
adiabatically tracks the instantaneous collective shift; a first-order
filter relaxing at 2*kappa is available to check that approximation.

Integration is fixed-step velocity Verlet on the per-site collective
coordinates (symplectic, so the energy bookkeeping test is meaningful),
with the optional viscous damping applied as exact exponential half-step
decays and the cavity filter sub-stepped by exact exponential relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .lattice import LatticeEnsemble, collective_shift_from_displacements
from .params import CONSTANTS, CavityParams, DriveParams, PhysicalConstants, TrapParams
from .steady_state import ResponseProfile, lineshape_scan, profile_value

TWO_PI = 2.0 * np.pi

# Trap-frequency rms spread reproducing the observed 1.0 ms collective
# coherence time (Gaussian dephasing gives t_1e = sqrt(2)/spread); a
# matching calibration, not a prediction.  The full-backaction model
# mode-locks at high drive, so the 1.0 ms value applies to the one-way
# (backaction=False) detection response.
CALIBRATED_OMEGA_Z_SPREAD = float(np.sqrt(2.0) / 1.0e-3)


class CavityFieldMode(Enum):
    ADIABATIC = "adiabatic"
    FIRST_ORDER_FILTER = "filter"


@dataclass(frozen=True)
class CavityFieldModel:
    """Cavity photon-number model; the filter relaxes at 2*kappa."""

    mode: CavityFieldMode = CavityFieldMode.ADIABATIC


@dataclass(frozen=True)
class SweepConfig:
    """Linear probe-frequency sweep at constant input power."""

    chirp_rate: float          # probe frequency chirp, Hz/s, signed
    delta_pc_start: float      # rad/s
    delta_pc_end: float        # rad/s
    n_max: float

    def __post_init__(self):
        if self.chirp_rate == 0:
            raise ValueError("chirp_rate must be nonzero")
        if (self.delta_pc_end - self.delta_pc_start) * self.chirp_rate < 0:
            raise ValueError("sweep range must run in the chirp direction")

    @property
    def direction(self) -> str:
        return "up" if self.chirp_rate > 0 else "down"

    def duration(self) -> float:
        return abs(self.delta_pc_end - self.delta_pc_start) / (
            TWO_PI * abs(self.chirp_rate))


@dataclass
class TransientTrace:
    """Sampled ring-up record.

    ``displacements`` is (n_samples, n_sites) or None when not stored;
    ``delta_n`` is consistent with the displacements through the collective
    shift at every stored sample.
    """

    time: np.ndarray
    delta_n: np.ndarray
    nbar: np.ndarray
    probe_on: np.ndarray
    displacements: np.ndarray | None = None
    velocities: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.time)
        if not (len(self.delta_n) == len(self.nbar) == len(self.probe_on) == n):
            raise ValueError("trace series must have equal length")
        if np.any(self.nbar < 0):
            raise ValueError("nbar must be nonnegative")

    def to_csv(self, path, site_columns=None) -> None:
        cols = [self.time, self.delta_n, self.nbar]
        names = ["time_s", "deltaN_rad_s", "nbar"]
        if site_columns is not None and self.displacements is not None:
            for j in site_columns:
                cols.append(self.displacements[:, j])
                names.append(f"disp_site{j}_m")
        data = np.column_stack(cols)
        np.savetxt(path, data, header=",".join(names), delimiter=",",
                   fmt="%.17g", comments="# ")


def quasi_static_sweep(config: SweepConfig, profile: ResponseProfile,
                       beta: float, delta_n: float = 0.0,
                       num_points: int = 1001) -> tuple[np.ndarray, np.ndarray]:
    """Quasi-static swept lineshape nbar(delta_pc) with hysteretic jumps.

    Wraps the branch-following scan in physical units: the reduced detuning
    is (delta_pc - delta_n)/kappa and the sweep direction follows the chirp
    sign.  Returns (delta_pc, nbar) in traversal order.
    """
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    dpc = np.linspace(config.delta_pc_start, config.delta_pc_end, num_points)
    grid = (dpc - delta_n) / profile.kappa
    scan = lineshape_scan(profile, beta, grid, direction=config.direction)
    d0 = np.array([p[0] for p in scan])
    u = np.array([p[1] for p in scan])
    return d0 * profile.kappa + delta_n, u * config.n_max


def n_max_for_switch_on(level: float, profile: ResponseProfile,
                        delta_pc: float, delta_n0: float) -> float:
    """Resonant drive level that gives ``level`` photons right at switch-on."""
    v = profile_value(profile, delta_pc - delta_n0)
    if v <= 0:
        raise ValueError("response vanishes at the switch-on detuning")
    return level / v


def ring_up(ensemble: LatticeEnsemble, cavity: CavityParams, trap: TrapParams,
            drive: DriveParams,
            field_model: CavityFieldModel = CavityFieldModel(),
            damping_rate: float = 0.0, duration: float = 1e-3,
            dt: float | None = None, *, profile: ResponseProfile | None = None,
            linearized_force: bool = False, ramp_time: float = 0.0,
            backaction: bool = True, record_every: int = 1,
            store_displacements: bool = True,
            constants: PhysicalConstants = CONSTANTS) -> TransientTrace:
    """Integrate the probe switch-on transient of the whole ensemble.

    Per site sub-ensemble j:

        m d''_j = -m omega_zj^2 d_j + f(theta_j, d_j, nbar(t)) - m G_v d'_j

    starting from the probe-off equilibrium (d = d' = 0).  nbar(t) follows
    the cavity model: adiabatic tracks n_max*V(delta_pc - Delta_N) exactly,
    the first-order filter relaxes toward it at 2*kappa.  ``ramp_time`` > 0
    ramps the drive linearly instead of an instantaneous switch-on.

    ``backaction=False`` freezes the photon number entering the *force* at
    its switch-on value while the recorded transmission still follows the
    moving resonance -- the one-way (no optical spring) response used for
    expected-signal analysis.  ``linearized_force`` evaluates the force
    gradient at zero displacement.
    """
    if profile is None:
        profile = ResponseProfile.from_cavity(cavity)
    theta = ensemble.theta
    pop = ensemble.population
    w2 = ensemble.omega_z ** 2
    m = constants.m_rb87
    kp = cavity.k_probe
    w_max = float(np.max(ensemble.omega_z))

    if dt is None:
        dt = TWO_PI / (200.0 * w_max)
    if dt > TWO_PI / (50.0 * w_max):
        raise ValueError("dt too large for the fastest site (stability guard)")
    if damping_rate < 0:
        raise ValueError("damping_rate must be nonnegative")

    n_steps = int(round(duration / dt))
    # force = f1 * sin(2(theta + kp d)) * nbar, with f1 per photon
    f1 = -constants.hbar * cavity.g0 ** 2 * kp / cavity.delta_ca
    sin2_0 = np.sin(2.0 * theta)

    def shift(d):
        return collective_shift_from_displacements(ensemble, d, cavity)

    def drive_level(t):
        if ramp_time > 0.0:
            return drive.n_max * min(t / ramp_time, 1.0)
        return drive.n_max

    def target(dn, t):
        return drive_level(t) * float(profile_value(profile, drive.delta_pc - dn))

    def accel(d, nbar_force):
        s = sin2_0 if linearized_force else np.sin(2.0 * (theta + kp * d))
        return -w2 * d + (f1 / m) * s * nbar_force

    d = np.zeros(len(ensemble))
    v = np.zeros(len(ensemble))
    dn = shift(d)
    nbar = target(dn, 0.0)
    nbar_force0 = nbar
    if field_model.mode is CavityFieldMode.FIRST_ORDER_FILTER:
        nbar = 0.0                      # cavity empty at switch-on
        relax = np.exp(-2.0 * cavity.kappa * dt)

    n_rec = n_steps // record_every + 1
    t_rec = np.empty(n_rec)
    dn_rec = np.empty(n_rec)
    nb_rec = np.empty(n_rec)
    on_rec = np.empty(n_rec, dtype=bool)
    disp_rec = np.empty((n_rec, len(ensemble))) if store_displacements else None
    vel_rec = np.empty((n_rec, len(ensemble))) if store_displacements else None

    def record(i_rec, t):
        t_rec[i_rec] = t
        dn_rec[i_rec] = dn
        nb_rec[i_rec] = nbar
        on_rec[i_rec] = drive_level(t) > 0.0
        if store_displacements:
            disp_rec[i_rec] = d
            vel_rec[i_rec] = v

    record(0, 0.0)
    damp = np.exp(-0.5 * damping_rate * dt) if damping_rate > 0 else 1.0
    i_rec = 1
    for i in range(n_steps):
        t_new = (i + 1) * dt
        nbar_force = nbar_force0 if not backaction else nbar
        if damping_rate > 0:
            v = v * damp
        a = accel(d, nbar_force)
        v_half = v + 0.5 * dt * a
        d = d + dt * v_half
        dn = shift(d)
        if field_model.mode is CavityFieldMode.ADIABATIC:
            nbar = target(dn, t_new)
        else:
            nbar = target(dn, t_new) + (nbar - target(dn, t_new)) * relax
        nbar_force = nbar_force0 if not backaction else nbar
        a2 = accel(d, nbar_force)
        v = v_half + 0.5 * dt * a2
        if damping_rate > 0:
            v = v * damp
        if (i + 1) % record_every == 0:
            record(i_rec, t_new)
            i_rec += 1

    return TransientTrace(t_rec[:i_rec], dn_rec[:i_rec], nb_rec[:i_rec],
                          on_rec[:i_rec],
                          disp_rec[:i_rec] if store_displacements else None,
                          vel_rec[:i_rec] if store_displacements else None)


def impulse_modulation_estimate(cavity: CavityParams, trap: TrapParams,
                                n_atoms: float, theta: float = np.pi / 4,
                                constants: PhysicalConstants = CONSTANTS
                                ) -> tuple[float, float]:
    """Velocity kick of one photon and the collective modulation it drives.

    A photon transiting in ~1/2kappa imparts impulse f(theta)/(2 kappa) to
    an atom at probe phase theta, i.e. velocity v = f/(2 kappa m).  All N
    atoms oscillating with displacement amplitude v/omega_z (their local
    kick scaling with the local gradient, averaged over the wells) modulate
    the resonance by N g0^2 k_p/(2|delta_ca|) * v/omega_z.
    """
    if cavity.delta_ca == 0:
        raise ValueError("delta_ca must be nonzero in the dispersive regime")
    f = (-constants.hbar * cavity.g0 ** 2 * cavity.k_probe
         * np.sin(2.0 * theta) / cavity.delta_ca)
    v = f / (2.0 * cavity.kappa * constants.m_rb87)
    modulation = (n_atoms * cavity.g0 ** 2 * cavity.k_probe
                  / (2.0 * abs(cavity.delta_ca)) * abs(v) / trap.omega_z)
    return float(v), float(modulation)


def impulse_boundary_detuning(cavity: CavityParams, trap: TrapParams,
                              n_atoms: float, theta: float = np.pi / 4,
                              constants: PhysicalConstants = CONSTANTS) -> float:
    """|delta_ca| below which the single-photon modulation exceeds kappa."""
    num = (n_atoms * constants.hbar * cavity.g0 ** 4 * cavity.k_probe ** 2
           * abs(np.sin(2.0 * theta)))
    den = 4.0 * cavity.kappa ** 2 * constants.m_rb87 * trap.omega_z
    return float(np.sqrt(num / den))


def atom_loss_drift(n0: float, loss_rate: float, t):
    """Exponential trap-loss drift N(t) = N0 exp(-loss_rate t)."""
    if loss_rate < 0:
        raise ValueError("loss_rate must be nonnegative")
    t = np.asarray(t, dtype=float)
    out = n0 * np.exp(-loss_rate * t)
    return out if out.ndim else float(out)
