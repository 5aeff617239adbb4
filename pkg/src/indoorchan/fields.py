"""Spatially consistent, cross-correlated standard-normal fields.

Each of the eight stochastic LSPs (order XCORR_ORDER) gets an independent 2D
random field with exponential autocorrelation exp(-d/lambda), realized as a
sum of sinusoids whose wave vectors are sampled from the spectral density of
the exponential covariance.  Evaluating a field is a pure function of
position, so arbitrary (non-grid) positions are exact and cheap, and the same
position always returns the same value.

Cross-correlation between LSPs is imposed pointwise: the vector of eight
independent field values is multiplied by a square-root factor of the
(repaired) cross-correlation matrix.  Each LSP keeps its own decorrelation
distance exactly; cross terms inherit a blend of the two distances, which is
the usual trade-off of this mixing order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import LspDescriptor, ScenarioTable, eval_mean, eval_std, realize_lsp
from .tables import XCORR_ORDER

__all__ = [
    "CorrelationRepair",
    "nearest_correlation",
    "sqrt_factor",
    "CorrelatedFieldSet",
    "LspRealization",
    "realize_at",
    "lsp_at",
    "lsp_track",
]

# eigenvalue floor applied when repairing an indefinite correlation matrix
EIG_FLOOR = 1e-6

# a zero decorrelation distance means "no spatial correlation"; substitute a
# vanishing length so the sum-of-sinusoids machinery still applies
_MIN_LAMBDA = 1e-6


@dataclass(frozen=True)
class CorrelationRepair:
    """Result of projecting a measured correlation matrix onto the PSD cone."""

    matrix: np.ndarray
    max_abs_change: float
    was_psd: bool


def _validate_correlation(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"correlation matrix must be square, got {m.shape}")
    if not np.allclose(m, m.T, atol=1e-9):
        raise ValueError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(m), 1.0, atol=1e-9):
        raise ValueError("correlation matrix must have unit diagonal")
    if np.abs(m).max() > 1.0 + 1e-9:
        raise ValueError("correlation entries must lie in [-1, 1]")
    return m


def nearest_correlation(matrix: np.ndarray) -> CorrelationRepair:
    """Clip negative eigenvalues and renormalize the diagonal to exactly 1.

    A matrix that is already positive semidefinite is returned unchanged; the
    printed measurement tables are not guaranteed to be PSD, and the maximum
    absolute entry change of the repair is reported rather than assumed zero.
    """
    m = _validate_correlation(matrix)
    w = np.linalg.eigvalsh(m)
    if w.min() >= -1e-12:
        return CorrelationRepair(matrix=m.copy(), max_abs_change=0.0, was_psd=True)
    w, v = np.linalg.eigh(m)
    s = (v * np.maximum(w, EIG_FLOOR)) @ v.T
    d = 1.0 / np.sqrt(np.diag(s))
    r = s * np.outer(d, d)
    r = 0.5 * (r + r.T)
    np.fill_diagonal(r, 1.0)
    return CorrelationRepair(
        matrix=r, max_abs_change=float(np.abs(r - m).max()), was_psd=False
    )


def sqrt_factor(corr: np.ndarray) -> np.ndarray:
    """Deterministic square-root factor M with M @ M.T == corr.

    Uses the symmetric eigendecomposition square root, which also handles
    singular (boundary) correlation matrices that Cholesky would reject.
    """
    m = _validate_correlation(corr)
    w, v = np.linalg.eigh(m)
    if w.min() < -1e-9:
        raise ValueError(
            "matrix is not positive semidefinite; repair it with "
            "nearest_correlation() first"
        )
    root = (v * np.sqrt(np.maximum(w, 0.0))) @ v.T
    err = np.abs(root @ root.T - m).max()
    if err > 1e-10:
        raise ValueError(f"square-root reconstruction error {err:.2e} exceeds 1e-10")
    return root


def _draw_wavevectors(rng: np.random.Generator, n: int, lambda_m: float) -> np.ndarray:
    """Sample wave vectors from the 2D spectral density of exp(-d/lambda).

    The radial CDF of the isotropic density S(k) ~ k (a^2 + k^2)^(-3/2) with
    a = 1/lambda inverts to r = a sqrt(1/(1-u)^2 - 1); by Bochner's theorem
    E[cos(k . tau)] over this measure equals exp(-|tau|/lambda).
    """
    a = 1.0 / lambda_m
    u = rng.random(n)
    r = a * np.sqrt(1.0 / (1.0 - u) ** 2 - 1.0)
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


class CorrelatedFieldSet:
    """Eight seeded spatial fields plus the cross-correlation mixing factor.

    Immutable after construction; sampling is pure and thread-safe.
    """

    def __init__(self, table: ScenarioTable, seed: int, n_sinusoids: int = 300):
        if n_sinusoids < 1:
            raise ValueError("n_sinusoids must be >= 1")
        self.seed = int(seed)
        self.n_sinusoids = int(n_sinusoids)
        self.lambdas = {}
        self._wavevectors = {}
        self._phases = {}
        for i, name in enumerate(XCORR_ORDER):
            desc = table.lsp.get(name)
            lam = desc.lambda_m if desc is not None else 0.0
            lam = max(lam, _MIN_LAMBDA)
            self.lambdas[name] = lam
            # stream prefix 1 is reserved for fields; path synthesis uses 2
            rng = np.random.default_rng([self.seed, 1, i])
            self._wavevectors[name] = _draw_wavevectors(rng, n_sinusoids, lam)
            self._phases[name] = rng.uniform(0.0, 2.0 * np.pi, n_sinusoids)
        self.repair = nearest_correlation(table.cross_corr)
        self.mix = sqrt_factor(self.repair.matrix)
        self._amp = math.sqrt(2.0 / n_sinusoids)

    def sample_standard_field(self, lsp: str, position) -> float | np.ndarray:
        """Marginally N(0,1) field value(s); position (2,) or (n, 2)."""
        if lsp not in self._wavevectors:
            raise KeyError(f"unknown LSP {lsp!r}; one of {XCORR_ORDER}")
        pos = np.atleast_2d(np.asarray(position, dtype=float))
        if pos.shape[1] != 2:
            raise ValueError(f"positions must be 2D points, got shape {pos.shape}")
        phase = pos @ self._wavevectors[lsp].T + self._phases[lsp]
        out = self._amp * np.cos(phase).sum(axis=1)
        return float(out[0]) if np.asarray(position).ndim == 1 else out

    def standard_vector(self, position) -> np.ndarray:
        """Independent (unmixed) field values, order XCORR_ORDER; (8,) or (n, 8)."""
        cols = [self.sample_standard_field(name, position) for name in XCORR_ORDER]
        return np.asarray(cols).T if np.asarray(position).ndim > 1 else np.array(cols)

    def mixed_standard(self, position) -> np.ndarray:
        """Cross-correlated standard-normal values, order XCORR_ORDER."""
        return self.standard_vector(position) @ self.mix.T


def field_acf_samples(
    lambda_m: float,
    separation_m: float,
    n_draws: int,
    seed,
    n_sinusoids: int = 300,
):
    """Two field values a fixed distance apart, from n_draws independent field
    realizations; mirrors the sum-of-sinusoids construction used by
    CorrelatedFieldSet for Monte-Carlo checks of the spatial autocorrelation.

    Returns (z1, z2) arrays of length n_draws.
    """
    rng = np.random.default_rng(seed)
    lam = max(lambda_m, _MIN_LAMBDA)
    amp = math.sqrt(2.0 / n_sinusoids)
    z1 = np.empty(n_draws)
    z2 = np.empty(n_draws)
    chunk = max(1, 2_000_000 // n_sinusoids)  # bound memory per batch
    for start in range(0, n_draws, chunk):
        stop = min(start + chunk, n_draws)
        b = stop - start
        k = _draw_wavevectors(rng, b * n_sinusoids, lam).reshape(b, n_sinusoids, 2)
        phases = rng.uniform(0.0, 2.0 * np.pi, (b, n_sinusoids))
        z1[start:stop] = amp * np.cos(phases).sum(axis=1)
        z2[start:stop] = amp * np.cos(k[:, :, 0] * separation_m + phases).sum(axis=1)
    return z1, z2


@dataclass(frozen=True)
class LspRealization:
    """Per-position large-scale parameter values in their native units.

    ``kf`` is None when the scenario has no K-factor (Rayleigh fading).  The
    shadow fading ``sf`` is the zero-mean deviation around the deterministic
    path loss; total loss is path_loss(...) + sf.
    """

    position: tuple
    f_ghz: float
    d_2d: float
    h_tx: float
    ds: float
    kf: float | None
    sf: float
    asd: float
    asa: float
    esd: float
    esa: float
    xpr: float

    def value(self, lsp: str) -> float | None:
        return getattr(self, lsp.lower())


def realize_at(
    table: ScenarioTable,
    mixed: np.ndarray,
    rx_position,
    tx_position,
    f_ghz: float,
    h_tx: float,
) -> LspRealization:
    """Map one vector of mixed standard-normal values through the scaling law."""
    rx = np.asarray(rx_position, dtype=float)
    tx = np.asarray(tx_position, dtype=float)
    d_2d = float(np.hypot(*(rx - tx)))
    if d_2d <= 0.0:
        raise ValueError("RX and TX positions coincide; 2D distance must be > 0")
    values = {}
    for i, name in enumerate(XCORR_ORDER):
        desc = table.lsp.get(name)
        if desc is None:
            values[name] = None
            continue
        values[name] = realize_lsp(desc, f_ghz, d_2d, h_tx, float(mixed[i]))
    return LspRealization(
        position=(float(rx[0]), float(rx[1])),
        f_ghz=f_ghz,
        d_2d=d_2d,
        h_tx=h_tx,
        ds=values["DS"],
        kf=values["KF"],
        sf=values["SF"],
        asd=values["ASD"],
        asa=values["ASA"],
        esd=values["ESD"],
        esa=values["ESA"],
        xpr=values["XPR"],
    )


def lsp_at(
    fieldset: CorrelatedFieldSet,
    table: ScenarioTable,
    rx_position,
    tx_position,
    f_ghz: float,
    h_tx: float,
) -> LspRealization:
    """Spatially consistent LSP realization at one RX position."""
    mixed = fieldset.mixed_standard(np.asarray(rx_position, dtype=float))
    return realize_at(table, mixed, rx_position, tx_position, f_ghz, h_tx)


def lsp_track(
    fieldset: CorrelatedFieldSet,
    table: ScenarioTable,
    rx_positions: np.ndarray,
    tx_positions: np.ndarray,
    f_ghz: float,
    h_tx: float,
) -> list[LspRealization]:
    """Vectorized lsp_at over a track; tx_positions is (2,) or matches rx."""
    rx = np.asarray(rx_positions, dtype=float)
    tx = np.asarray(tx_positions, dtype=float)
    if tx.ndim == 1:
        tx = np.broadcast_to(tx, rx.shape)
    mixed = fieldset.mixed_standard(rx)
    return [
        realize_at(table, mixed[i], rx[i], tx[i], f_ghz, h_tx)
        for i in range(rx.shape[0])
    ]
