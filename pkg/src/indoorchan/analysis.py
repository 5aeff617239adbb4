"""Estimators and fitting: from path sets back to large-scale parameters,
and from sample records back to scaling-law coefficients.

This is the inverse of the generation pipeline: multipath realizations are
reduced to LSP estimates, per-snapshot estimates are averaged over 1 m track
intervals, and ordinary least squares recovers the per-LSP coefficients,
decorrelation distances and cross-correlations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from .params import LspDescriptor, eval_mean
from .tables import VAR_NAMES, XCORR_ORDER

__all__ = [
    "SampleRecord",
    "rms_ds",
    "kf_est",
    "rms_angular_spread",
    "xpr_est",
    "average_intervals",
    "FitResult",
    "fit_lsp_model",
    "DecorrelationEstimate",
    "estimate_decorrelation",
    "estimate_cross_corr",
    "KF_WINDOW_S",
]

# direct-path window: a path arriving within 5 ns of the expected line-of-sight
# arrival counts towards the direct power, independent of bandwidth
KF_WINDOW_S = 5e-9

# mean absolute value of a zero-mean normal is sigma*sqrt(2/pi); this factor
# turns a mean-absolute-residual regression into a standard-deviation estimate
HALF_NORMAL_FACTOR = math.sqrt(math.pi / 2.0)


@dataclass(frozen=True)
class SampleRecord:
    """One averaging-interval observation: position, covariates and the
    estimated LSP values in their native units."""

    position: tuple
    f_ghz: float
    d_2d: float
    h_tx: float
    condition: str
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.d_2d > 0:
            raise ValueError(f"d_2d must be > 0, got {self.d_2d}")


def _normalized_powers(powers) -> np.ndarray:
    p = np.asarray(powers, dtype=float)
    if p.size == 0:
        raise ValueError("empty path set")
    total = p.sum()
    if not total > 0:
        raise ValueError("path powers must have positive total")
    return p / total


def rms_ds(pathset) -> float:
    """RMS delay spread: square root of the second central moment of the
    power-delay profile.  Invariant to delay shifts and power scaling."""
    p = _normalized_powers(pathset.powers)
    tau = np.asarray(pathset.delays, dtype=float)
    m1 = float(p @ tau)
    m2 = float(p @ tau**2)
    return math.sqrt(max(0.0, m2 - m1 * m1))


def kf_est(pathset, los_delay_s: float, delay_offset_s: float = 0.0) -> float:
    """K-factor in dB: power within 5 ns of the expected LOS arrival over the
    power outside it.

    ``delay_offset_s`` restores absolute timing (the path set stores excess
    delays with the first arrival at 0).  Returns -inf when no power falls in
    the window and +inf when all of it does.
    """
    p = _normalized_powers(pathset.powers)
    tau = np.asarray(pathset.delays, dtype=float) + delay_offset_s
    direct = float(p[np.abs(tau - los_delay_s) <= KF_WINDOW_S].sum())
    scattered = 1.0 - direct
    if direct <= 0.0:
        return float("-inf")
    if scattered <= 0.0:
        return float("inf")
    return 10.0 * math.log10(direct / scattered)


def _wrap_deg(a: np.ndarray) -> np.ndarray:
    """Wrap angles to (-180, 180]."""
    w = (np.asarray(a, dtype=float) + 180.0) % 360.0 - 180.0
    return np.where(w == -180.0, 180.0, w)


def rms_angular_spread(angles_deg, powers, kind: str = "azimuth") -> float:
    """Power-weighted RMS angular spread in degrees.

    Azimuth spreads rotate to the power-weighted mean direction before the
    second moment, so the result is invariant to global rotation and handles
    the +/-180 wrap correctly.  Elevation spreads use the plain weighted
    second moment about the weighted mean.
    """
    if kind not in ("azimuth", "elevation"):
        raise ValueError(f"kind must be 'azimuth' or 'elevation', got {kind!r}")
    a = np.asarray(angles_deg, dtype=float)
    w = _normalized_powers(powers)
    if a.shape != w.shape:
        raise ValueError("angles and powers must have matching lengths")
    if kind == "azimuth":
        rad = np.deg2rad(a)
        mean_dir = math.degrees(math.atan2(float(w @ np.sin(rad)), float(w @ np.cos(rad))))
        dev = _wrap_deg(a - mean_dir)
    else:
        dev = a - float(w @ a)
    return math.sqrt(float(w @ dev**2))


def xpr_est(pathset) -> float:
    """Power-weighted mean cross-polarization ratio in dB over the scattered
    paths (the deterministic first path, when present, is excluded)."""
    p = _normalized_powers(pathset.powers)
    xpr = np.asarray(pathset.xpr_db, dtype=float)
    keep = np.ones(p.size, dtype=bool)
    if getattr(pathset, "los_flag", False):
        keep[0] = False
    if not keep.any() or p[keep].sum() <= 0:
        raise ValueError("no scattered paths to estimate the XPR from")
    w = p[keep] / p[keep].sum()
    return float(w @ xpr[keep])


def average_intervals(records, interval_m: float = 1.0) -> list[SampleRecord]:
    """Partition per-snapshot records into arclength bins and average each LSP
    in its native (log/dB) domain; covariates are taken at the bin centroid.

    The records must be ordered along the track.
    """
    records = list(records)
    if not records:
        raise ValueError("empty track")
    if interval_m <= 0:
        raise ValueError("interval_m must be > 0")
    conditions = {r.condition for r in records}
    if len(conditions) > 1:
        raise ValueError(f"mixed propagation conditions in one track: {conditions}")
    pos = np.array([r.position for r in records], dtype=float)
    steps = np.linalg.norm(np.diff(pos, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(steps)])
    n_bins = max(1, int(math.ceil(s[-1] / interval_m))) if s[-1] > 0 else 1
    idx = np.minimum((s / interval_m).astype(int), n_bins - 1)

    out = []
    for b in range(n_bins):
        group = [records[i] for i in np.flatnonzero(idx == b)]
        if not group:
            continue
        keys = set().union(*(g.values.keys() for g in group))
        values = {}
        for k in keys:
            vs = [g.values[k] for g in group if k in g.values and g.values[k] is not None]
            if vs:
                values[k] = float(np.mean(vs))
        out.append(
            SampleRecord(
                position=tuple(np.mean([g.position for g in group], axis=0)),
                f_ghz=float(np.mean([g.f_ghz for g in group])),
                d_2d=float(np.mean([g.d_2d for g in group])),
                h_tx=float(np.mean([g.h_tx for g in group])),
                condition=group[0].condition,
                values=values,
            )
        )
    return out


@dataclass(frozen=True)
class FitResult:
    """Fitted scaling-law coefficients and their OLS standard errors."""

    lsp: str
    descriptor: LspDescriptor
    stderr: dict
    n_records: int


_STAGE1 = ("mu", "gamma", "epsilon", "zeta")
_STAGE2 = ("sigma", "delta", "kappa")
_COVARIATE_LABEL = {
    "gamma": "frequency", "epsilon": "distance", "zeta": "TX height",
    "delta": "frequency", "kappa": "distance",
}


def _design_columns(records):
    lf = np.log10([r.f_ghz for r in records])
    ld = np.log10([r.d_2d for r in records])
    lh = np.log10([r.h_tx for r in records])
    one = np.ones(len(records))
    return {"mu": one, "gamma": lf, "epsilon": ld, "zeta": lh,
            "sigma": one, "delta": lf, "kappa": ld}


def _staged_ols(y, cols, names, fixed):
    """OLS of y on the named columns; fixed coefficients contribute a known
    offset.  Returns (estimates, stderr) keyed by coefficient name."""
    free = [n for n in names if n not in fixed]
    offset = sum((fixed[n] * cols[n] for n in names if n in fixed), np.zeros_like(y))
    est = {n: fixed[n] for n in names if n in fixed}
    se = {}
    if not free:
        return est, se, y - offset
    for n in free:
        if n != names[0] and np.unique(cols[n]).size < 2:
            raise ValueError(
                f"cannot identify {n}: records span a single {_COVARIATE_LABEL[n]} value"
            )
    X = np.column_stack([cols[n] for n in free])
    beta, _, rank, _ = np.linalg.lstsq(X, y - offset, rcond=None)
    if rank < len(free):
        raise ValueError(
            f"rank-deficient design matrix over {free}; covariates are collinear"
        )
    resid = y - offset - X @ beta
    dof = max(1, len(y) - len(free))
    cov = (resid @ resid / dof) * np.linalg.inv(X.T @ X)
    for i, n in enumerate(free):
        est[n] = float(beta[i])
        se[n] = float(math.sqrt(max(0.0, cov[i, i])))
    return est, se, resid


def fit_lsp_model(records, lsp: str, fixed=None) -> FitResult:
    """Two-stage least squares for one LSP.

    Stage 1 regresses the values on [1, log10 f, log10 d, log10 h] for mu,
    gamma, epsilon, zeta; stage 2 regresses the absolute residuals scaled by
    sqrt(pi/2) on [1, log10 f, log10 d] for sigma, delta, kappa.  ``fixed``
    maps coefficient names to frozen values which are held, not estimated.
    """
    records = [r for r in records if lsp in r.values and r.values[lsp] is not None]
    if len(records) < 10:
        raise ValueError(f"need at least 10 records with {lsp} values, got {len(records)}")
    fixed = {k: float(v) for k, v in (fixed or {}).items()}
    unknown = set(fixed) - set(VAR_NAMES)
    if unknown:
        raise ValueError(f"unknown fixed coefficients: {sorted(unknown)}")

    y = np.array([r.values[lsp] for r in records], dtype=float)
    cols = _design_columns(records)
    est1, se1, resid = _staged_ols(y, cols, _STAGE1, fixed)
    z = np.abs(resid) * HALF_NORMAL_FACTOR
    est2, se2, _ = _staged_ols(z, cols, _STAGE2, fixed)

    desc = LspDescriptor(
        mu=est1["mu"], gamma=est1["gamma"], epsilon=est1["epsilon"], zeta=est1["zeta"],
        sigma=est2["sigma"], delta=est2["delta"], kappa=est2["kappa"],
        lambda_m=fixed.get("lambda", 0.0),
        fixed=frozenset(fixed),
    )
    return FitResult(lsp=lsp, descriptor=desc, stderr={**se1, **se2}, n_records=len(records))


@dataclass(frozen=True)
class DecorrelationEstimate:
    """Exponential-decay fit to the residual autocorrelation along a track.

    flag is one of "ok", "sub_spacing" (white-noise-like residuals), "wide"
    (track short relative to the estimate) or "degenerate" (constant
    residuals, divergent decay length).
    """

    lambda_m: float
    flag: str
    spacing_m: float
    track_length_m: float
    n_lags: int


def estimate_decorrelation(records, lsp: str, mean_model: LspDescriptor | None = None) -> DecorrelationEstimate:
    """Fit exp(-d/lambda) to the empirical residual autocorrelation, using
    lags up to the first zero crossing to avoid noise-floor bias.

    Residuals are the values minus the fitted scaling-law mean when
    ``mean_model`` is given, otherwise minus the track average.
    """
    records = [r for r in records if lsp in r.values and r.values[lsp] is not None]
    if len(records) < 50:
        raise ValueError(f"need at least 50 records along the track, got {len(records)}")
    vals = np.array([r.values[lsp] for r in records], dtype=float)
    if mean_model is not None:
        trend = np.array([eval_mean(mean_model, r.f_ghz, r.d_2d, r.h_tx) for r in records])
        resid = vals - trend
    else:
        resid = vals - vals.mean()
    pos = np.array([r.position for r in records], dtype=float)
    steps = np.linalg.norm(np.diff(pos, axis=0), axis=1)
    track_len = float(steps.sum())
    spacing = float(np.median(steps)) if steps.size else 0.0
    if spacing <= 0:
        raise ValueError("track positions do not advance; cannot form lags")

    resid = resid - resid.mean()
    var = float(resid @ resid) / resid.size
    if var <= 1e-18:  # numerically constant residuals (e.g. a noiseless trend)
        return DecorrelationEstimate(
            lambda_m=float("inf"), flag="degenerate",
            spacing_m=spacing, track_length_m=track_len, n_lags=0,
        )

    max_lag = resid.size // 2
    acf = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        acf[k] = float(resid[: resid.size - k] @ resid[k:]) / (resid.size * var)
    crossing = np.flatnonzero(acf <= 0.0)
    k_max = int(crossing[0]) if crossing.size else max_lag
    k_max = max(1, k_max)
    lags = np.arange(k_max + 1) * spacing
    lam0 = max(spacing, float(lags[np.argmin(np.abs(acf[: k_max + 1] - math.exp(-1)))]))
    (lam,), _ = curve_fit(
        lambda d, l: np.exp(-d / l), lags, acf[: k_max + 1],
        p0=[lam0], bounds=(1e-9, np.inf), maxfev=10000,
    )
    lam = float(lam)
    if lam < spacing:
        flag = "sub_spacing"
    elif lam > track_len / 4.0:
        flag = "wide"
    else:
        flag = "ok"
    return DecorrelationEstimate(
        lambda_m=lam, flag=flag, spacing_m=spacing,
        track_length_m=track_len, n_lags=k_max,
    )


def estimate_cross_corr(records, mean_models) -> np.ndarray:
    """Pearson correlation of detrended residuals per LSP pair, order
    XCORR_ORDER.  Rows/columns of LSPs without data or without a mean model
    are NaN (absent)."""
    records = list(records)
    if len(records) < 100:
        raise ValueError(f"need at least 100 records, got {len(records)}")
    resids = {}
    for name in XCORR_ORDER:
        model = mean_models.get(name)
        if model is None:
            continue
        if not all(name in r.values and r.values[name] is not None for r in records):
            continue
        vals = np.array([r.values[name] for r in records], dtype=float)
        trend = np.array([eval_mean(model, r.f_ghz, r.d_2d, r.h_tx) for r in records])
        resids[name] = vals - trend
    m = np.full((8, 8), np.nan)
    np.fill_diagonal(m, 1.0)
    for i, a in enumerate(XCORR_ORDER):
        for j in range(i + 1, 8):
            b = XCORR_ORDER[j]
            if a in resids and b in resids:
                ra, rb = resids[a], resids[b]
                sa, sb = ra.std(), rb.std()
                if sa > 0 and sb > 0:
                    m[i, j] = m[j, i] = float(
                        ((ra - ra.mean()) @ (rb - rb.mean())) / (len(records) * sa * sb)
                    )
                else:
                    m[i, j] = m[j, i] = 1.0 if (sa == 0 and sb == 0 and np.array_equal(ra, rb)) else 0.0
    for i, a in enumerate(XCORR_ORDER):
        if a not in resids:
            m[i, :] = np.nan
            m[:, i] = np.nan
            m[i, i] = np.nan
    return m
