"""Large-scale parameter tables and the per-LSP scaling law.

Every LSP follows the same log-linear law in the covariates: the mean is

    mu + gamma*log10(f_GHz) + epsilon*log10(d_2D) + zeta*log10(h_TX)

and the standard deviation is

    sigma + delta*log10(f_GHz) + kappa*log10(d_2D)

with the reference point at 1 GHz, 1 m distance, 1 m TX height.  All values
stay in the LSP's native unit: dB for PL/SF/KF/XPR, log10(seconds) for the
delay spread, log10(degrees) for the angular spreads.  Conversions to linear
units happen downstream, never here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tables import BUILTIN, LSP_NAMES, SCENARIO_NAMES, VAR_NAMES, XCORR_ORDER

__all__ = [
    "LspDescriptor",
    "ScenarioTable",
    "ScenarioFormatError",
    "builtin_scenario",
    "eval_mean",
    "eval_std",
    "realize_lsp",
    "path_loss",
    "load_scenario",
    "save_scenario",
    "LSP_NAMES",
    "SCENARIO_NAMES",
    "XCORR_ORDER",
]

# dataclass field name per file/fit coefficient token
_FIELD_BY_VAR = {
    "mu": "mu", "sigma": "sigma", "lambda": "lambda_m", "gamma": "gamma",
    "epsilon": "epsilon", "zeta": "zeta", "delta": "delta", "kappa": "kappa",
}


class ScenarioFormatError(ValueError):
    """Raised when a scenario file cannot be parsed or violates an invariant."""


@dataclass(frozen=True)
class LspDescriptor:
    """Scaling-law coefficients for one large-scale parameter.

    ``fixed`` lists the coefficient tokens (file spelling, e.g. "gamma",
    "lambda") that are constants rather than estimated values; the fitting
    pipeline keeps them frozen.
    """

    mu: float = 0.0
    sigma: float = 0.0
    lambda_m: float = 0.0
    gamma: float = 0.0
    epsilon: float = 0.0
    zeta: float = 0.0
    delta: float = 0.0
    kappa: float = 0.0
    fixed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        for name in ("mu", "sigma", "lambda_m", "gamma", "epsilon", "zeta", "delta", "kappa"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"descriptor coefficient {name} must be finite, got {v!r}")
        if self.lambda_m < 0:
            raise ValueError(f"decorrelation distance must be >= 0, got {self.lambda_m}")
        unknown = set(self.fixed) - set(VAR_NAMES)
        if unknown:
            raise ValueError(f"unknown coefficient names in fixed set: {sorted(unknown)}")

    def value(self, var: str) -> float:
        return getattr(self, _FIELD_BY_VAR[var])


@dataclass(frozen=True, eq=False)
class ScenarioTable:
    """One propagation condition of a scenario: nine LSP descriptors, the
    delay factor and the 8x8 cross-correlation matrix (order XCORR_ORDER).

    KF may be absent (``lsp`` has no "KF" key), meaning Rayleigh fading with
    no deterministic path power share.
    """

    name: str
    condition: str
    lsp: dict
    r_tau: float
    cross_corr: np.ndarray

    def __post_init__(self):
        if self.condition not in ("LOS", "NLOS"):
            raise ValueError(f"condition must be LOS or NLOS, got {self.condition!r}")
        unknown = set(self.lsp) - set(LSP_NAMES)
        if unknown:
            raise ValueError(f"unknown LSP names: {sorted(unknown)}")
        missing = set(LSP_NAMES) - set(self.lsp) - {"KF"}
        if missing:
            raise ValueError(f"missing LSP descriptors: {sorted(missing)}")
        if not self.r_tau > 1.0:
            raise ValueError(f"delay factor r_tau must be > 1, got {self.r_tau}")
        m = np.asarray(self.cross_corr, dtype=float)
        if m.shape != (8, 8):
            raise ValueError(f"cross_corr must be 8x8, got {m.shape}")
        if not np.allclose(m, m.T, atol=1e-12):
            raise ValueError("cross_corr must be symmetric")
        if not np.allclose(np.diag(m), 1.0, atol=1e-12):
            raise ValueError("cross_corr must have unit diagonal")
        if np.abs(m).max() > 1.0 + 1e-12:
            i, j = np.unravel_index(np.abs(m).argmax(), m.shape)
            raise ValueError(
                f"cross_corr {XCORR_ORDER[i]}-{XCORR_ORDER[j]} = {m[i, j]} outside [-1, 1]"
            )
        m.flags.writeable = False
        object.__setattr__(self, "cross_corr", m)

    def __eq__(self, other):
        if not isinstance(other, ScenarioTable):
            return NotImplemented
        return (
            self.name == other.name
            and self.condition == other.condition
            and self.lsp == other.lsp
            and self.r_tau == other.r_tau
            and np.array_equal(self.cross_corr, other.cross_corr)
        )

    def xcorr(self, a: str, b: str) -> float:
        return float(self.cross_corr[XCORR_ORDER.index(a), XCORR_ORDER.index(b)])


def _check_covariates(f_ghz: float, d_2d: float, h_tx: float = 1.0) -> None:
    if not (f_ghz > 0 and d_2d > 0 and h_tx > 0):
        raise ValueError(
            f"covariates must be positive: f_ghz={f_ghz}, d_2d={d_2d}, h_tx={h_tx}"
        )


def eval_mean(desc: LspDescriptor, f_ghz: float, d_2d: float, h_tx: float) -> float:
    """Deterministic part of the scaling law, in the LSP's native unit."""
    _check_covariates(f_ghz, d_2d, h_tx)
    return (
        desc.mu
        + desc.gamma * math.log10(f_ghz)
        + desc.epsilon * math.log10(d_2d)
        + desc.zeta * math.log10(h_tx)
    )


def eval_std(desc: LspDescriptor, f_ghz: float, d_2d: float) -> float:
    """Standard deviation of the scaling law, floored at 0.

    Some tables carry slightly negative reference sigmas that extrapolate
    below zero at the 1 GHz / 1 m reference point; a negative standard
    deviation is meaningless, so the value clamps.
    """
    _check_covariates(f_ghz, d_2d)
    s = desc.sigma + desc.delta * math.log10(f_ghz) + desc.kappa * math.log10(d_2d)
    return max(0.0, s)


def realize_lsp(desc: LspDescriptor, f_ghz: float, d_2d: float, h_tx: float, x: float) -> float:
    """One realization: mean plus x times std, x a standard-normal draw."""
    if not math.isfinite(x):
        raise ValueError(f"standard-normal draw must be finite, got {x!r}")
    return eval_mean(desc, f_ghz, d_2d, h_tx) + x * eval_std(desc, f_ghz, d_2d)


def path_loss(table: ScenarioTable, f_ghz: float, d_2d: float) -> float:
    """Deterministic path loss in dB; depends on 2D distance and frequency only."""
    _check_covariates(f_ghz, d_2d)
    pl = table.lsp["PL"]
    return pl.mu + pl.gamma * math.log10(f_ghz) + pl.epsilon * math.log10(d_2d)


def builtin_scenario(name: str, condition: str) -> ScenarioTable:
    """Load one of the built-in tables; see tables.SCENARIO_NAMES."""
    try:
        spec = BUILTIN[name]
    except KeyError:
        raise KeyError(
            f"unknown scenario {name!r}; available: {', '.join(SCENARIO_NAMES)}"
        ) from None
    if condition not in spec:
        raise KeyError(f"scenario {name!r} has no condition {condition!r}")
    src = spec[condition]
    lsp = {}
    for lsp_name in LSP_NAMES:
        row = src.get(lsp_name)
        if row is None:
            continue
        kwargs = {}
        present = set()
        for k, v in row.items():
            if k == "fixed":
                continue
            present.add("lambda" if k == "lam" else k)
            kwargs["lambda_m" if k == "lam" else k] = v
        fixed = (set(VAR_NAMES) - present) | set(row.get("fixed", ()))
        lsp[lsp_name] = LspDescriptor(fixed=frozenset(fixed), **kwargs)
    m = np.eye(8)
    m[np.triu_indices(8, k=1)] = src["xcorr"]
    m = m + m.T - np.eye(8)
    return ScenarioTable(
        name=name, condition=condition, lsp=lsp, r_tau=src["r_tau"], cross_corr=m
    )


# ---------------------------------------------------------------------------
# scenario file format
#
# Line-oriented UTF-8 key/value text.  One section per propagation condition:
#
#   name = industrial_combined
#   [LOS]
#   r_tau = 2.7
#   DS_mu = -8.3
#   SF_lambda = 15.0
#   fixed PL_gamma
#   xcorr DS KF = -0.7
#
# A coefficient key that is absent loads as 0 and is treated as fixed; a key
# flagged with a "fixed" line is a constant at the written value.  Omitting a
# whole LSP block (all <LSP>_* keys) marks that LSP as absent.  Comments start
# with '#'.
# ---------------------------------------------------------------------------


def save_scenario(table: ScenarioTable) -> str:
    """Serialize one table to scenario-file text (inverse of load_scenario)."""
    lines = [
        "# indoorchan scenario file",
        f"name = {table.name}",
        "",
        f"[{table.condition}]",
        f"r_tau = {float(table.r_tau)!r}",
    ]
    fixed_lines = []
    for lsp_name in LSP_NAMES:
        desc = table.lsp.get(lsp_name)
        if desc is None:
            continue
        for var in VAR_NAMES:
            v = float(desc.value(var))
            is_fixed = var in desc.fixed
            if v == 0.0 and is_fixed:
                continue  # omission already means fixed-at-zero
            lines.append(f"{lsp_name}_{var} = {v!r}")
            if is_fixed:
                fixed_lines.append(f"fixed {lsp_name}_{var}")
    lines.extend(fixed_lines)
    for i in range(8):
        for j in range(i + 1, 8):
            v = float(table.cross_corr[i, j])
            if v != 0.0:
                lines.append(f"xcorr {XCORR_ORDER[i]} {XCORR_ORDER[j]} = {v!r}")
    lines.append("")
    return "\n".join(lines)


def load_scenario(text: str, condition: str | None = None) -> ScenarioTable:
    """Parse scenario-file text into a ScenarioTable.

    Files written by save_scenario hold a single [LOS] or [NLOS] section; if a
    file carries both, ``condition`` selects which one to load.  Unknown keys
    are rejected with the offending line number.
    """
    name = None
    sections: dict[str, dict] = {}
    current: dict | None = None

    def err(lineno, msg):
        return ScenarioFormatError(f"line {lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            cond = line[1:-1].strip()
            if cond not in ("LOS", "NLOS"):
                raise err(lineno, f"unknown section {line!r} (expected [LOS] or [NLOS])")
            if cond in sections:
                raise err(lineno, f"duplicate section [{cond}]")
            current = {"values": {}, "fixed": set(), "xcorr": {}, "r_tau": None}
            sections[cond] = current
            continue
        if line.startswith("fixed "):
            if current is None:
                raise err(lineno, "fixed line before any [LOS]/[NLOS] section")
            key = line[len("fixed "):].strip()
            lsp_name, var = _split_key(key, lineno)
            current["fixed"].add((lsp_name, var))
            continue
        if line.startswith("xcorr "):
            if current is None:
                raise err(lineno, "xcorr line before any [LOS]/[NLOS] section")
            head, _, val = line.partition("=")
            parts = head.split()
            if len(parts) != 3 or not val.strip():
                raise err(lineno, f"malformed xcorr line {raw.strip()!r}")
            _, a, b = parts
            for n in (a, b):
                if n not in XCORR_ORDER:
                    raise err(lineno, f"unknown LSP {n!r} in xcorr line")
            if a == b:
                raise err(lineno, "xcorr line must name two distinct LSPs")
            v = _parse_float(val, lineno)
            if abs(v) > 1.0:
                raise err(lineno, f"xcorr {a} {b} = {v} outside [-1, 1]")
            pair = tuple(sorted((a, b)))
            if pair in current["xcorr"] and current["xcorr"][pair] != v:
                raise err(lineno, f"conflicting duplicate xcorr entry for {a} {b}")
            current["xcorr"][pair] = v
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise err(lineno, f"expected 'key = value', got {raw.strip()!r}")
        key = key.strip()
        if key == "name":
            name = val.strip()
            continue
        if current is None:
            raise err(lineno, f"key {key!r} before any [LOS]/[NLOS] section")
        if key == "r_tau":
            current["r_tau"] = _parse_float(val, lineno)
            continue
        lsp_name, var = _split_key(key, lineno)
        if (lsp_name, var) in current["values"]:
            raise err(lineno, f"duplicate key {key!r}")
        current["values"][(lsp_name, var)] = _parse_float(val, lineno)

    if name is None:
        raise ScenarioFormatError("missing 'name = ...' line")
    if not sections:
        raise ScenarioFormatError("no [LOS]/[NLOS] section found")
    if condition is None:
        if len(sections) > 1:
            raise ScenarioFormatError(
                "file holds both conditions; pass condition='LOS' or 'NLOS'"
            )
        condition = next(iter(sections))
    if condition not in sections:
        raise ScenarioFormatError(f"file has no [{condition}] section")
    sec = sections[condition]

    if sec["r_tau"] is None:
        raise ScenarioFormatError(f"section [{condition}] is missing r_tau")
    for pair in sec["fixed"]:
        if pair not in sec["values"]:
            raise ScenarioFormatError(
                f"fixed flag for absent key {pair[0]}_{pair[1]} "
                "(omitted coefficients are fixed at 0 already)"
            )

    lsp = {}
    for lsp_name in LSP_NAMES:
        written = {var: v for (ln, var), v in sec["values"].items() if ln == lsp_name}
        if not written:
            continue  # absent LSP, e.g. the office NLOS K-factor
        flagged = {var for (ln, var) in sec["fixed"] if ln == lsp_name}
        fixed = (set(VAR_NAMES) - set(written)) | flagged
        kwargs = {_FIELD_BY_VAR[var]: v for var, v in written.items()}
        try:
            lsp[lsp_name] = LspDescriptor(fixed=frozenset(fixed), **kwargs)
        except ValueError as e:
            raise ScenarioFormatError(f"{lsp_name}: {e}") from e

    m = np.eye(8)
    for (a, b), v in sec["xcorr"].items():
        i, j = XCORR_ORDER.index(a), XCORR_ORDER.index(b)
        m[i, j] = m[j, i] = v
    try:
        return ScenarioTable(
            name=name, condition=condition, lsp=lsp, r_tau=sec["r_tau"], cross_corr=m
        )
    except ValueError as e:
        raise ScenarioFormatError(str(e)) from e


def _split_key(key: str, lineno: int):
    lsp_name, _, var = key.partition("_")
    if lsp_name not in LSP_NAMES or var not in VAR_NAMES:
        raise ScenarioFormatError(
            f"line {lineno}: unknown key {key!r} (expected <LSP>_<coefficient>)"
        )
    return lsp_name, var


def _parse_float(text: str, lineno: int) -> float:
    try:
        return float(text.strip())
    except ValueError:
        raise ScenarioFormatError(f"line {lineno}: not a number: {text.strip()!r}") from None
