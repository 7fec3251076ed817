"""Steady states of the motional-Kerr cavity response.

The self-consistent photon number obeys ``u = V(kappa*(delta0 + beta*u))``
with ``u = nbar/n_max``, the reduced detuning ``delta0 = (delta_pc -
Delta_N)/kappa`` and the response profile V (unit peak).  For a Lorentzian
V this is the cubic

    beta^2 u^3 + 2 delta0 beta u^2 + (1 + delta0^2) u - 1 = 0,

which has one or three real roots in (0, 1]; with three roots the outer two
are stable and the middle one is unstable (slope criterion of the implicit
response, the standard dispersive-bistability result).  Fold points are the
parameter values where two roots merge; above the fold threshold the swept
response is hysteretic.

The technical-jitter-broadened cavity is modeled by a Voigt profile
(Lorentzian of half-width kappa convolved with a Gaussian of rms sigma),
normalized to unit peak so n_max keeps its meaning as the on-resonance
photon number.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import wofz


class ProfileKind(Enum):
    LORENTZIAN = "lorentzian"
    VOIGT = "voigt"


@dataclass(frozen=True)
class ResponseProfile:
    """Normalized (unit-peak) cavity frequency response."""

    kind: ProfileKind
    kappa: float               # Lorentzian half-linewidth, rad/s
    sigma: float = 0.0         # Gaussian rms width, rad/s (Voigt only)

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.kind is ProfileKind.VOIGT and self.sigma <= 0:
            raise ValueError("Voigt profile needs sigma > 0")

    @classmethod
    def lorentzian(cls, kappa: float) -> "ResponseProfile":
        return cls(ProfileKind.LORENTZIAN, kappa)

    @classmethod
    def voigt(cls, kappa: float, sigma: float) -> "ResponseProfile":
        return cls(ProfileKind.VOIGT, kappa, sigma)

    @classmethod
    def from_cavity(cls, cavity) -> "ResponseProfile":
        """Voigt when the cavity records technical jitter, else Lorentzian."""
        if cavity.sigma_jitter > 0:
            return cls.voigt(cavity.kappa, cavity.sigma_jitter)
        return cls.lorentzian(cavity.kappa)


def _voigt_raw(delta, kappa, sigma):
    # Re w((delta + i kappa)/(sigma sqrt 2)) is the Lorentzian-Gaussian
    # convolution up to normalization; accurate to ~1e-13 relative.
    z = (delta + 1j * kappa) / (sigma * np.sqrt(2.0))
    return wofz(z).real


def profile_value(profile: ResponseProfile, delta):
    """Profile value V(delta) in (0, 1], V(0) = 1, even in delta."""
    delta = np.asarray(delta, dtype=float)
    if profile.kind is ProfileKind.LORENTZIAN:
        out = 1.0 / (1.0 + (delta / profile.kappa) ** 2)
    else:
        peak = _voigt_raw(0.0, profile.kappa, profile.sigma)
        out = _voigt_raw(delta, profile.kappa, profile.sigma) / peak
    return out if out.ndim else float(out)


def profile_slope(profile: ResponseProfile, delta):
    """dV/ddelta, analytic for both profile kinds."""
    delta = np.asarray(delta, dtype=float)
    if profile.kind is ProfileKind.LORENTZIAN:
        k2 = profile.kappa ** 2
        out = -2.0 * delta / k2 / (1.0 + delta ** 2 / k2) ** 2
    else:
        s2 = profile.sigma * np.sqrt(2.0)
        z = (delta + 1j * profile.kappa) / s2
        # w'(z) = -2 z w(z) + 2i/sqrt(pi)
        dw = (-2.0 * z * wofz(z) + 2j / np.sqrt(np.pi)) / s2
        out = dw.real / _voigt_raw(0.0, profile.kappa, profile.sigma)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SteadyStateSolution:
    """All real steady-state roots at one reduced detuning.

    ``roots`` is sorted ascending in u; each entry is (u, stable) with
    u = nbar/n_max in (0, 1].
    """

    roots: tuple[tuple[float, bool], ...]
    delta0: float
    beta: float

    @property
    def stable(self) -> tuple[float, ...]:
        return tuple(u for u, s in self.roots if s)

    @property
    def unstable(self) -> tuple[float, ...]:
        return tuple(u for u, s in self.roots if not s)

    def nbar(self, n_max: float) -> tuple[float, ...]:
        return tuple(u * n_max for u, _ in self.roots)


def _response_slope(u, delta0, beta):
    # d/du [u (1 + (delta0 + beta u)^2)]; positive <=> stable branch
    return 1.0 + delta0 ** 2 + 4.0 * beta * delta0 * u + 3.0 * beta ** 2 * u ** 2


_DOUBLE_ROOT_TOL = 3e-7


def steady_state_roots_lorentzian(delta0: float, beta: float) -> SteadyStateSolution:
    """Roots of the Lorentzian response cubic at (delta0, beta).

    Closed-form discriminant classification (trigonometric form for three
    real roots, Cardano otherwise) followed by one Newton polish per root;
    robust at near-fold double roots.
    """
    if not np.isfinite(delta0) or not np.isfinite(beta):
        raise ValueError("delta0 and beta must be finite")
    if beta == 0.0:
        return SteadyStateSolution(((1.0 / (1.0 + delta0 ** 2), True),),
                                   delta0, beta)

    a = beta ** 2
    b = 2.0 * delta0 * beta
    c = 1.0 + delta0 ** 2
    d = -1.0

    # depressed cubic t^3 + P t + Q with u = t - b/(3a)
    p = b / a
    q = c / a
    r = d / a
    shift = p / 3.0
    P = q - p * p / 3.0
    Q = 2.0 * p ** 3 / 27.0 - p * q / 3.0 + r

    disc = -4.0 * P ** 3 - 27.0 * Q ** 2
    if disc > 0.0:
        # three real roots (trig method); P < 0 guaranteed here
        m = 2.0 * np.sqrt(-P / 3.0)
        phi = np.arccos(np.clip(3.0 * Q / (P * m), -1.0, 1.0)) / 3.0
        ts = m * np.cos(phi - np.array([0.0, 1.0, 2.0]) * 2.0 * np.pi / 3.0)
        roots = ts - shift
    else:
        # one real root (plus a conjugate pair, or a double root at disc=0)
        if abs(Q) < 1e-300 and abs(P) < 1e-300:
            roots = np.array([-shift])
        else:
            s = np.sqrt(np.maximum(Q ** 2 / 4.0 + P ** 3 / 27.0, 0.0))
            t1 = np.cbrt(-Q / 2.0 + s) + np.cbrt(-Q / 2.0 - s)
            roots = np.array([t1 - shift])
            if disc == 0.0 and P != 0.0:
                roots = np.append(roots, 3.0 * Q / P - shift)  # double root

    # Newton polish against the original cubic; steps that do not reduce
    # the residual are rejected (keeps double roots where the closed form
    # put them instead of letting f' ~ 0 throw them away)
    def f(u):
        return ((a * u + b) * u + c) * u + d

    def fp(u):
        return (3.0 * a * u + 2.0 * b) * u + c

    polished = []
    for u in np.real(roots):
        for _ in range(3):
            slope = fp(u)
            if slope == 0.0:
                break
            u_new = u - f(u) / slope
            if abs(f(u_new)) >= abs(f(u)):
                break
            u = u_new
        polished.append(float(u))

    out = []
    stab_tol = 1e-6 * (1.0 + delta0 ** 2)
    for u in sorted(polished):
        if not (0.0 < u <= 1.0 + 1e-12):
            continue
        u = min(u, 1.0)
        if out and abs(u - out[-1][0]) < _DOUBLE_ROOT_TOL:
            continue  # double root at a fold: report once
        stable = bool(_response_slope(u, delta0, beta) > stab_tol)
        out.append((u, stable))
    return SteadyStateSolution(tuple(out), delta0, beta)


def steady_state_roots_profile(profile: ResponseProfile, delta0: float,
                               beta: float, n_grid: int = 2001) -> SteadyStateSolution:
    """Roots of u = V(kappa*(delta0 + beta*u)) for a general profile.

    Sign-change scan over a dense u grid followed by bracketed root finding;
    every returned root has |u - V| <= 1e-10.
    """
    kappa = profile.kappa

    def g(u):
        return u - profile_value(profile, kappa * (delta0 + beta * u))

    if beta == 0.0:
        u = float(profile_value(profile, kappa * delta0))
        return SteadyStateSolution(((u, True),), delta0, beta)

    grid = np.linspace(0.0, 1.0, n_grid)
    vals = grid - profile_value(profile, kappa * (delta0 + beta * grid))

    roots = []
    for i in range(n_grid - 1):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            roots.append(grid[i])
        elif v0 * v1 < 0.0:
            roots.append(brentq(g, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15))
    if vals[-1] == 0.0:
        roots.append(grid[-1])

    out = []
    for u in sorted(roots):
        if not (0.0 < u <= 1.0):
            continue
        if out and abs(u - out[-1][0]) < _DOUBLE_ROOT_TOL:
            continue
        slope = 1.0 - kappa * beta * profile_slope(
            profile, kappa * (delta0 + beta * u))
        out.append((float(u), bool(slope > _DOUBLE_ROOT_TOL)))
    return SteadyStateSolution(tuple(out), delta0, beta)


def _slope_peak(profile: ResponseProfile):
    """Location and value of max |dV/ddelta| on delta > 0."""
    if profile.kind is ProfileKind.LORENTZIAN:
        dpk = profile.kappa / np.sqrt(3.0)
        return dpk, abs(profile_slope(profile, dpk))
    hi = 10.0 * (profile.kappa + profile.sigma)
    res = minimize_scalar(lambda d: -abs(profile_slope(profile, d)),
                          bounds=(1e-9 * profile.kappa, hi), method="bounded",
                          options={"xatol": 1e-9 * profile.kappa})
    return float(res.x), float(-res.fun)


def fold_points(profile: ResponseProfile, beta: float) -> list[tuple[float, float]]:
    """Fold (root-merging) points [(delta0, u), ...] for given beta.

    A fold is where the implicit response has d(delta0)/du = 0, i.e. where
    beta * kappa * |V'(delta)| = 1 on the far side of the shifted resonance.
    Solving that condition directly (instead of scanning delta0 for
    root-count changes) resolves folds arbitrarily close to threshold.
    Empty when the response is monostable everywhere.
    """
    if beta <= 0:
        raise ValueError("fold_points requires beta > 0")
    kappa = profile.kappa
    dpk, m = _slope_peak(profile)
    if beta * kappa * m <= 1.0:
        return []

    def h(d):
        return beta * kappa * abs(profile_slope(profile, d)) - 1.0

    lo = 1e-12 * kappa
    hi = dpk
    while h(hi) > 0:          # expand outward until |V'| drops below 1/(beta kappa)
        hi *= 2.0
        if hi > 1e6 * kappa:
            break
    d_inner = brentq(h, lo, dpk, xtol=1e-12 * kappa)
    d_outer = brentq(h, dpk, hi, xtol=1e-12 * kappa)

    folds = []
    for d in (d_inner, d_outer):
        u = float(profile_value(profile, d))
        delta0 = -beta * u - d / kappa
        # physically relevant window for u in (0, 1]
        if abs(delta0) <= beta + 10.0:
            folds.append((float(delta0), u))
    return sorted(folds)


def bistability_threshold(profile: ResponseProfile,
                          tol: float | None = None) -> float:
    """Smallest beta with a nonempty fold set, by bisection on beta.

    Lorentzian profiles converge to 8*sqrt(3)/9; broadening raises the
    threshold (the Voigt profile of the reference cavity gives ~3.7).
    """
    if tol is None:
        tol = 5e-8 if profile.kind is ProfileKind.LORENTZIAN else 1e-4

    def bistable(b):
        return len(fold_points(profile, b)) > 0

    lo, hi = 0.5, 8.0
    while not bistable(hi):
        hi *= 2.0
        if hi > 1e6:
            raise RuntimeError("no bistability found up to beta = 1e6")
    while bistable(lo):
        lo /= 2.0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if bistable(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def lineshape_scan(profile: ResponseProfile, beta: float, delta0_grid,
                   direction: str = "up") -> list[tuple[float, float]]:
    """Quasi-static branch-following scan over a detuning grid.

    At each grid point the stable root nearest the previously selected one
    is kept; when the tracked branch terminates at a fold the selection
    jumps to the remaining stable root, which is the hysteretic jump.  The
    returned list is in traversal order (ascending delta0 for "up",
    descending for "down").
    """
    if direction not in ("up", "down"):
        raise ValueError("direction must be 'up' or 'down'")
    grid = np.sort(np.asarray(delta0_grid, dtype=float))
    if direction == "down":
        grid = grid[::-1]

    out = []
    u_prev = None
    for d0 in grid:
        sol = steady_state_roots_profile(profile, d0, beta)
        stable = sol.stable
        if not stable:           # fold boundary: fall back to any root
            stable = tuple(u for u, _ in sol.roots)
        if u_prev is None:
            # history-free start: branch continuous with the linear response
            u_lin = profile_value(profile, profile.kappa * d0)
            u_sel = min(stable, key=lambda u: abs(u - u_lin))
        else:
            u_sel = min(stable, key=lambda u: abs(u - u_prev))
        out.append((float(d0), float(u_sel)))
        u_prev = u_sel
    return out
