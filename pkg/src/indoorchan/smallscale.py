"""Multipath synthesis: expand one LSP realization into a path set and render
impulse / frequency responses.

The recipe follows common geometric-stochastic practice: exponentially
distributed delays widened by the delay factor, an exponential power-delay
profile with per-path lognormal ripple, a forced direct-path power share from
the K-factor, wrapped-Gaussian angle offsets rescaled to the exact target
spreads, and normally distributed per-path cross-polarization ratios.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from types import SimpleNamespace

import numpy as np

from .analysis import rms_angular_spread, rms_ds
from .fields import LspRealization
from .params import ScenarioTable, eval_std

__all__ = [
    "PathSet",
    "DEFAULT_N_PATHS",
    "POWER_RIPPLE_DB",
    "AZIMUTH_SPREAD_CAP_DEG",
    "ELEVATION_SPREAD_CAP_DEG",
    "draw_delays",
    "draw_powers",
    "match_delay_spread",
    "draw_angles",
    "apply_polarization",
    "geometric_los",
    "synthesize_pathset",
    "CirTaps",
    "to_cir",
    "freq_response",
]

DEFAULT_N_PATHS = 25

# per-path lognormal shadowing on the scattered powers; avoids a
# deterministic power-delay profile
POWER_RIPPLE_DB = 3.0

# largest realizable wrapped spreads (uniform over the wrap range)
AZIMUTH_SPREAD_CAP_DEG = 104.0
ELEVATION_SPREAD_CAP_DEG = 52.0

SPEED_OF_LIGHT = 299_792_458.0


def _wrap_deg(a: np.ndarray) -> np.ndarray:
    w = (np.asarray(a, dtype=float) + 180.0) % 360.0 - 180.0
    return np.where(w == -180.0, 180.0, w)


@dataclass(frozen=True)
class PathSet:
    """One multipath realization.

    delays are excess delays in seconds (sorted, first entry 0), powers are
    linear fractions summing to 1, azimuths lie in (-180, 180], elevations in
    [-90, 90].  phases holds one initial phase per path and polarization
    combination (shape (n, 2, 2), order [rx_pol, tx_pol] with 0 = co-vertical).
    los_flag marks path 0 as a deterministic LOS/specular component.
    """

    delays: np.ndarray
    powers: np.ndarray
    aod: np.ndarray
    aoa: np.ndarray
    eod: np.ndarray
    eoa: np.ndarray
    xpr_db: np.ndarray
    phases: np.ndarray
    los_flag: bool = False

    def __post_init__(self):
        for name in ("delays", "powers", "aod", "aoa", "eod", "eoa", "xpr_db", "phases"):
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=float))
        n = self.delays.size
        if n == 0:
            raise ValueError("path set must contain at least one path")
        for name in ("powers", "aod", "aoa", "eod", "eoa", "xpr_db"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have shape ({n},)")
        if self.phases.shape != (n, 2, 2):
            raise ValueError(f"phases must have shape ({n}, 2, 2)")
        if self.delays[0] != 0.0 or np.any(np.diff(self.delays) < 0):
            raise ValueError("delays must be sorted ascending with delays[0] == 0")
        if np.any(self.powers < 0) or abs(self.powers.sum() - 1.0) > 1e-9:
            raise ValueError("powers must be >= 0 and sum to 1 within 1e-9")
        for name in ("aod", "aoa"):
            a = getattr(self, name)
            if np.any(a <= -180.0) or np.any(a > 180.0):
                raise ValueError(f"{name} must lie in (-180, 180]")
        for name in ("eod", "eoa"):
            a = getattr(self, name)
            if np.any(np.abs(a) > 90.0):
                raise ValueError(f"{name} must lie in [-90, 90]")
        for name in ("delays", "powers", "aod", "aoa", "eod", "eoa", "xpr_db", "phases"):
            getattr(self, name).flags.writeable = False

    @property
    def n_paths(self) -> int:
        return self.delays.size

    def coupling(self) -> np.ndarray:
        """Per-path 2x2 complex polarization coupling (amplitude and phase).

        Co-polar entries have unit amplitude; cross-polar amplitudes follow
        10^(-XPR/20), so an infinite XPR gives a purely co-polar path.
        """
        with np.errstate(over="ignore"):
            cross = np.power(10.0, -np.asarray(self.xpr_db) / 20.0)
        amp = np.empty((self.n_paths, 2, 2))
        amp[:, 0, 0] = amp[:, 1, 1] = 1.0
        amp[:, 0, 1] = amp[:, 1, 0] = cross
        return amp * np.exp(1j * self.phases)


def draw_delays(n_paths: int, ds: float, r_tau: float, rng) -> np.ndarray:
    """Exponential path delays with standard deviation r_tau * ds, sorted and
    shifted so the first entry is 0."""
    if n_paths < 2:
        raise ValueError("need at least 2 paths")
    if not ds > 0:
        raise ValueError("delay spread must be > 0")
    if not r_tau > 1:
        raise ValueError("delay factor must be > 1")
    u = 1.0 - rng.random(n_paths)  # (0, 1]; guards the log
    tau = -r_tau * ds * np.log(u)
    tau.sort()
    return tau - tau[0]


def draw_powers(delays, ds: float, r_tau: float, kf_db: float | None, rng) -> np.ndarray:
    """Exponential power-delay profile with lognormal ripple; when a K-factor
    is given, path 0 is scaled so its power is 10^(kf_db/10) times the summed
    scattered power."""
    tau = np.asarray(delays, dtype=float)
    if not ds > 0:
        raise ValueError("delay spread must be > 0")
    if not r_tau > 1:
        raise ValueError("delay factor must be > 1")
    ripple = rng.normal(0.0, POWER_RIPPLE_DB, tau.size)
    p = np.exp(-tau * (r_tau - 1.0) / (r_tau * ds)) * 10.0 ** (-ripple / 10.0)
    if kf_db is not None:
        if tau.size < 2:
            raise ValueError("a forced direct-path share needs at least 2 paths")
        if math.isinf(kf_db) and kf_db > 0:
            p = np.zeros_like(p)
            p[0] = 1.0
            return p
        p[0] = 10.0 ** (kf_db / 10.0) * p[1:].sum()
    return p / p.sum()


def match_delay_spread(delays, powers, ds_target: float) -> np.ndarray:
    """Affinely rescale delays so the realized RMS delay spread equals the
    target exactly; compensates the direct-path share and the power ripple."""
    current = rms_ds(SimpleNamespace(delays=delays, powers=powers))
    if current <= 0.0:
        return np.asarray(delays, dtype=float)
    return np.asarray(delays, dtype=float) * (ds_target / current)


def geometric_los(tx_position, rx_position, h_tx: float, h_rx: float = 2.0):
    """LOS direction (aod, aoa, eod, eoa) in degrees and the 3D propagation
    delay in seconds for the given end positions and heights."""
    tx = np.asarray(tx_position, dtype=float)
    rx = np.asarray(rx_position, dtype=float)
    dvec = rx - tx
    d_2d = float(np.hypot(*dvec))
    if d_2d <= 0:
        raise ValueError("TX and RX positions coincide")
    aod = math.degrees(math.atan2(dvec[1], dvec[0]))
    aoa = math.degrees(math.atan2(-dvec[1], -dvec[0]))
    eod = math.degrees(math.atan2(h_rx - h_tx, d_2d))
    eoa = math.degrees(math.atan2(h_tx - h_rx, d_2d))
    d_3d = math.hypot(d_2d, h_tx - h_rx)
    return (aod, aoa, eod, eoa), d_3d / SPEED_OF_LIGHT


def _scaled_offsets(offsets, powers, target, kind):
    """Scale raw unit offsets so the estimator returns the target exactly."""
    if target <= 0 or offsets.size < 2:
        return np.zeros_like(offsets)
    spread = rms_angular_spread(offsets, powers, kind)
    if spread <= 0:
        return np.zeros_like(offsets)
    scale = target / spread
    if kind == "elevation":
        return offsets * scale  # plain second moment is exactly linear
    best, best_err, best_spread = None, math.inf, 0.0
    for _ in range(200):
        scaled = offsets * scale
        spread = rms_angular_spread(scaled, powers, "azimuth")
        err = abs(spread - target)
        if err < best_err:
            best, best_err, best_spread = scaled, err, spread
        if err <= 1e-6 * target:
            return scaled
        if spread <= 0:
            break
        scale *= target / spread
    # wrapping saturates below the target (e.g. a dominant path pinned to the
    # LOS direction); keep the closest realizable configuration
    warnings.warn(
        f"azimuth spread target {target:.1f} deg not reachable for this draw; "
        f"realized {best_spread:.1f} deg", RuntimeWarning, stacklevel=3,
    )
    return best


def draw_angles(n_paths: int, powers, targets, los_direction, rng):
    """Per-path angles: wrapped-Gaussian offsets around the LOS direction,
    rescaled so each power-weighted RMS spread matches its target exactly
    (before azimuth wrapping / elevation clipping).

    targets and los_direction are (aod, aoa, eod, eoa); azimuth targets above
    104 deg and elevation targets above 52 deg are clamped with a warning.
    Returns a dict with keys "aod", "aoa", "eod", "eoa".
    """
    powers = np.asarray(powers, dtype=float)
    if powers.size != n_paths:
        raise ValueError("powers length must equal n_paths")
    names = ("aod", "aoa", "eod", "eoa")
    kinds = ("azimuth", "azimuth", "elevation", "elevation")
    caps = (AZIMUTH_SPREAD_CAP_DEG, AZIMUTH_SPREAD_CAP_DEG,
            ELEVATION_SPREAD_CAP_DEG, ELEVATION_SPREAD_CAP_DEG)
    out = {}
    for name, kind, cap, target, los in zip(names, kinds, caps, targets, los_direction):
        if target < 0:
            raise ValueError(f"{name} spread target must be >= 0, got {target}")
        if target > cap:
            warnings.warn(
                f"{name} spread target {target:.1f} deg exceeds the {cap:.0f} deg "
                "wrap limit; clamped", RuntimeWarning, stacklevel=2,
            )
            target = cap
        offsets = rng.normal(0.0, 1.0, n_paths)
        if n_paths >= 2:
            offsets[0] = 0.0  # path 0 stays on the LOS direction
        scaled = _scaled_offsets(offsets, powers, target, kind)
        if kind == "azimuth":
            out[name] = _wrap_deg(los + scaled)
        else:
            out[name] = np.clip(los + scaled, -90.0, 90.0)
    return out


def apply_polarization(pathset: PathSet, xpr_mu_db: float, xpr_sigma_db: float, rng) -> PathSet:
    """Draw per-path XPR values from N(xpr_mu_db, xpr_sigma_db) and fresh
    uniform phases per polarization combination.  A deterministic first path
    keeps an infinite XPR (identity coupling, no depolarization)."""
    if xpr_sigma_db < 0:
        raise ValueError("xpr_sigma_db must be >= 0")
    n = pathset.n_paths
    xpr = (
        np.full(n, xpr_mu_db)
        if math.isinf(xpr_mu_db)
        else rng.normal(xpr_mu_db, xpr_sigma_db, n)
    )
    phases = rng.uniform(0.0, 2.0 * np.pi, (n, 2, 2))
    if pathset.los_flag:
        xpr[0] = float("inf")
    return replace(pathset, xpr_db=xpr, phases=phases)


def synthesize_pathset(
    realization: LspRealization,
    table: ScenarioTable,
    tx_position,
    rng,
    n_paths: int = DEFAULT_N_PATHS,
    rx_height_m: float = 2.0,
):
    """Expand one LSP realization into a PathSet.

    Returns (pathset, los_delay_s); the excess delays are anchored so that
    path 0 sits at the geometric LOS arrival time.  With a K-factor present
    (also for NLOS, which keeps a LOS-like specular path), path 0 carries the
    corresponding share of the total power.
    """
    ds_s = 10.0 ** realization.ds
    delays = draw_delays(n_paths, ds_s, table.r_tau, rng)
    powers = draw_powers(delays, ds_s, table.r_tau, realization.kf, rng)
    delays = match_delay_spread(delays, powers, ds_s)
    los_direction, los_delay = geometric_los(
        tx_position, realization.position, realization.h_tx, rx_height_m
    )
    targets = tuple(
        10.0 ** realization.value(name) for name in ("asd", "asa", "esd", "esa")
    )
    angles = draw_angles(n_paths, powers, targets, los_direction, rng)
    ps = PathSet(
        delays=delays,
        powers=powers,
        aod=angles["aod"],
        aoa=angles["aoa"],
        eod=angles["eod"],
        eoa=angles["eoa"],
        xpr_db=np.full(n_paths, float("inf")),
        phases=np.zeros((n_paths, 2, 2)),
        los_flag=realization.kf is not None,
    )
    xpr_sigma = eval_std(table.lsp["XPR"], realization.f_ghz, realization.d_2d)
    ps = apply_polarization(ps, realization.xpr, xpr_sigma, rng)
    return ps, los_delay


@dataclass(frozen=True)
class CirTaps:
    """Tapped delay line per polarization pair.

    taps has shape (2, 2, n_taps), ordered [rx_pol, tx_pol]; tap k sits at
    time tap_offset_s + k * tap_spacing_s on the excess-delay axis (a negative
    offset keeps the acausal sinc pre-cursors of early paths in the window).
    The energy accounting is per-path: captured_energy[r, t] is the path power
    mapped into the window for that pair, leaked_energy the remainder lost to
    truncation (coherent tap interference between overlapping paths is a
    physical effect and not part of this accounting).
    """

    taps: np.ndarray
    tap_spacing_s: float
    tap_offset_s: float
    captured_energy: np.ndarray
    leaked_energy: np.ndarray


def to_cir(
    pathset: PathSet, bandwidth_hz: float, n_taps: int, tap_offset_s: float = 0.0
) -> CirTaps:
    """Band-limited sinc interpolation of each path onto taps at 1/bandwidth
    spacing."""
    if not bandwidth_hz > 0:
        raise ValueError("bandwidth must be > 0")
    max_tap = (float(pathset.delays.max()) - tap_offset_s) * bandwidth_hz
    if n_taps < int(math.ceil(max_tap)) + 1:
        raise ValueError(
            f"n_taps={n_taps} does not cover the maximum path delay "
            f"({max_tap:.1f} tap spacings); truncation would drop a path"
        )
    coupling = pathset.coupling()
    g = np.sqrt(pathset.powers)[:, None, None] * coupling  # (n, 2, 2)
    k = np.arange(n_taps)
    pos = (pathset.delays - tap_offset_s) * bandwidth_hz
    sinc = np.sinc(k[None, :] - pos[:, None])  # (n, n_taps)
    taps = np.einsum("irt,ik->rtk", g, sinc)
    pair_gain = np.abs(coupling) ** 2
    pair_power = np.einsum("i,irt->rt", pathset.powers, pair_gain)
    captured = np.einsum(
        "i,irt,i->rt", pathset.powers, pair_gain, (sinc**2).sum(axis=1)
    )
    return CirTaps(
        taps=taps,
        tap_spacing_s=1.0 / bandwidth_hz,
        tap_offset_s=tap_offset_s,
        captured_energy=captured,
        leaked_energy=pair_power - captured,
    )


def freq_response(pathset: PathSet, f_center_hz: float, n_bins: int, bandwidth_hz: float) -> np.ndarray:
    """Complex channel gains on n_bins frequencies spanning the bandwidth
    around f_center_hz; shape (2, 2, n_bins)."""
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if not bandwidth_hz > 0:
        raise ValueError("bandwidth must be > 0")
    f = f_center_hz + (np.arange(n_bins) - n_bins // 2) * (bandwidth_hz / n_bins)
    g = np.sqrt(pathset.powers)[:, None, None] * pathset.coupling()
    phase = np.exp(-2j * np.pi * np.outer(pathset.delays, f))  # (n, n_bins)
    return np.einsum("irt,ik->rtk", g, phase)
