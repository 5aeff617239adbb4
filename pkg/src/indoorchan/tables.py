"""Built-in large-scale parameter tables for industrial halls and the 3GPP
indoor-office reference.

Five measured/reference scenarios, each with a LOS and an NLOS column:

* ``setup1``   - 5.4 GHz, omnidirectional TX array (dual mobility)
* ``setup2``   - 5.4 GHz, cross-shaped planar TX array (fixed TX)
* ``setup3``   - 2.37 GHz, planar TX array (fixed TX)
* ``industrial_combined`` - joint fit over all industrial measurements
* ``office_38901``        - 3GPP TR 38.901 indoor-office reference values

Per LSP the dict stores only the coefficients that were actually estimated
(plus any nonzero constants, listed under ``fixed``).  Coefficients that do
not appear load as 0 and are treated as constants by the fitting pipeline.
Cross-correlations are stored as the upper triangle in the canonical order
(DS, KF, SF, ASD, ASA, ESD, ESA, XPR); unavailable entries are 0.
"""

from __future__ import annotations

# Order used for every 8x8 cross-correlation matrix in the package.
XCORR_ORDER = ("DS", "KF", "SF", "ASD", "ASA", "ESD", "ESA", "XPR")

# All large-scale parameters, including the deterministic path loss.
LSP_NAMES = ("PL", "SF", "KF", "DS", "ASA", "ASD", "ESA", "ESD", "XPR")

# Coefficient tokens of the per-LSP scaling law, file-format spelling.
VAR_NAMES = ("mu", "sigma", "lambda", "gamma", "epsilon", "zeta", "delta", "kappa")

SCENARIO_NAMES = ("setup1", "setup2", "setup3", "industrial_combined", "office_38901")


def _upper(entries):
    """28 upper-triangle entries (row-major) in XCORR_ORDER."""
    assert len(entries) == 28
    return tuple(entries)


BUILTIN = {
    "setup1": {
        "LOS": {
            "r_tau": 2.93,
            "PL": dict(mu=36.1, gamma=20.0, epsilon=18.5, fixed=("gamma",)),
            "SF": dict(sigma=1.6, lam=20.6),
            "DS": dict(mu=-7.22, sigma=0.08, lam=42.1, zeta=0.36),
            "KF": dict(mu=-1.6, sigma=2.7, lam=17.5, zeta=-5.7),
            "ASA": dict(mu=1.67, sigma=0.15, lam=6.1),
            "ASD": dict(mu=1.54, sigma=0.1, lam=12.8, zeta=0.05),
            "ESA": dict(mu=1.61, sigma=0.07, lam=13.3, epsilon=-0.5, kappa=0.04),
            "ESD": dict(mu=1.17, sigma=0.07, lam=9.2, zeta=0.13),
            "XPR": dict(mu=13.0, sigma=1.6, lam=16.5, zeta=-1.9),
            "xcorr": _upper([
                -0.57, -0.3, -0.14, 0, 0, 0.32, -0.18,
                0.44, -0.08, 0, 0.07, -0.4, 0.22,
                0.28, 0.12, 0.21, 0.05, 0.2,
                -0.12, 0.08, 0.34, 0.28,
                0.15, -0.13, 0.07,
                0.06, 0.23,
                -0.05,
            ]),
        },
        "NLOS": {
            "r_tau": 3.03,
            "PL": dict(mu=34.4, gamma=20.0, epsilon=21.7, fixed=("gamma",)),
            "SF": dict(sigma=1.6, lam=8.0),
            "DS": dict(mu=-7.12, sigma=0.08, lam=36.4, zeta=0.31),
            "KF": dict(mu=-4.0, sigma=2.5, lam=11.4, zeta=-6.3),
            "ASA": dict(mu=1.61, sigma=0.18, lam=6.8),
            "ASD": dict(mu=1.64, sigma=0.1, lam=16.4, zeta=-0.24),
            "ESA": dict(mu=1.72, sigma=-0.11, lam=11.4, epsilon=-0.54, kappa=0.15),
            "ESD": dict(mu=1.03, sigma=0.1, lam=12.5, epsilon=0.16, kappa=-0.03),
            "XPR": dict(mu=12.8, sigma=1.3, lam=7.1, zeta=-2.5),
            "xcorr": _upper([
                -0.72, 0.3, 0.07, -0.35, 0, 0, -0.36,
                0.39, -0.08, 0.19, -0.12, 0.04, 0.26,
                0.11, 0.14, -0.21, 0.14, 0,
                0, 0, -0.19, -0.08,
                -0.07, 0.19, 0.04,
                -0.1, 0.04,
                0,
            ]),
        },
    },
    "setup2": {
        "LOS": {
            "r_tau": 2.56,
            "PL": dict(mu=34.3, gamma=20.0, epsilon=19.3, fixed=("gamma",)),
            "SF": dict(sigma=1.5, lam=3.5),
            "DS": dict(mu=-7.47, sigma=0.14, lam=24.2, zeta=0.56),
            "KF": dict(mu=4.8, sigma=2.9, lam=13.5, zeta=-8.2),
            "ASA": dict(mu=1.71, sigma=0.12, lam=12.1),
            "ASD": dict(mu=-0.06, sigma=0.31, lam=18.1, zeta=1.02),
            "ESA": dict(mu=1.69, sigma=-0.1, lam=6.4, epsilon=-0.53, kappa=0.14),
            "ESD": dict(mu=1.4, sigma=0.08, lam=10.4, epsilon=-0.53, zeta=0.3, kappa=0.05),
            "XPR": dict(mu=18.0, sigma=2.6, lam=23.4, zeta=-3.6),
            "xcorr": _upper([
                -0.75, -0.25, 0.17, -0.16, 0.3, 0.16, -0.5,
                0.38, -0.4, 0.08, -0.31, -0.16, 0.49,
                -0.05, -0.22, -0.13, -0.18, 0.02,
                -0.02, 0.35, 0.15, -0.47,
                0.16, 0.33, 0.26,
                0.52, -0.24,
                -0.1,
            ]),
        },
        "NLOS": {
            "r_tau": 2.89,
            "PL": dict(mu=39.2, gamma=20.0, epsilon=21.7, fixed=("gamma",)),
            "SF": dict(sigma=3.1, lam=34.2),
            "DS": dict(mu=-7.19, sigma=0.09, lam=10.5, zeta=0.17),
            "KF": dict(mu=-4.4, sigma=2.4, lam=6.1, zeta=-1.0),
            "ASA": dict(mu=1.61, sigma=0.2, lam=9.5),
            "ASD": dict(mu=0.14, sigma=0.29, lam=18.2, zeta=1.43),
            "ESA": dict(mu=1.19, sigma=0.25, lam=12.9, epsilon=-0.34, kappa=0.0),
            "ESD": dict(mu=0.9, sigma=0.3, lam=12.4, epsilon=-0.38, zeta=0.54, kappa=-0.08),
            "XPR": dict(mu=15.2, sigma=1.8, lam=6.9, zeta=0.6),
            "xcorr": _upper([
                -0.46, 0.03, -0.41, 0.11, 0, 0.03, 0.12,
                0.31, 0.15, -0.04, 0, 0.08, 0.02,
                0, 0.44, 0.29, 0.37, 0.14,
                -0.18, 0.04, -0.18, -0.16,
                0.27, 0.31, 0.23,
                0.17, 0.06,
                0.06,
            ]),
        },
    },
    "setup3": {
        "LOS": {
            "r_tau": 2.55,
            "PL": dict(mu=37.2, gamma=20.0, epsilon=17.6, fixed=("gamma",)),
            "SF": dict(sigma=1.7, lam=14.8),
            "DS": dict(mu=-7.78, sigma=0.11, lam=99.7, zeta=0.4),
            "KF": dict(mu=2.8, sigma=2.6, lam=30.3, zeta=-3.6),
            "ASA": dict(mu=1.67, sigma=0.19, lam=6.3),
            "ASD": dict(mu=0.56, sigma=0.32, lam=23.8, zeta=0.22),
            "ESA": dict(mu=1.71, sigma=0.09, lam=10.3, epsilon=-0.54, kappa=0.05),
            "ESD": dict(mu=1.03, sigma=0.08, lam=6.4, epsilon=-0.2, zeta=0.26, kappa=0.08),
            "XPR": dict(mu=16.1, sigma=3.2, lam=14.9, zeta=-3.5),
            "xcorr": _upper([
                -0.72, -0.03, 0.44, 0.19, 0.4, 0.47, -0.33,
                0.22, -0.55, -0.1, -0.26, -0.3, 0.37,
                -0.1, 0.03, 0.05, 0.1, -0.12,
                0, 0.3, 0.26, -0.41,
                0.12, 0.43, -0.1,
                0.31, -0.04,
                -0.22,
            ]),
        },
        "NLOS": {
            "r_tau": 2.74,
            "PL": dict(mu=30.1, gamma=20.0, epsilon=24.7, fixed=("gamma",)),
            "SF": dict(sigma=1.7, lam=32.1),
            "DS": dict(mu=-7.72, sigma=0.12, lam=127.2, zeta=0.38),
            "KF": dict(mu=-1.0, sigma=1.9, lam=17.0, zeta=-1.9),
            "ASA": dict(mu=1.56, sigma=0.26, lam=9.8),
            "ASD": dict(mu=0.75, sigma=0.24, lam=17.9, zeta=0.29),
            "ESA": dict(mu=1.82, sigma=-0.12, lam=21.1, epsilon=-0.65, kappa=0.21),
            "ESD": dict(mu=1.43, sigma=0.06, lam=11.6, epsilon=-0.5, zeta=0.25, kappa=0.08),
            "XPR": dict(mu=15.0, sigma=2.1, lam=16.3, zeta=-3.7),
            "xcorr": _upper([
                -0.69, 0.39, 0.3, 0.3, 0.45, 0.5, -0.43,
                -0.14, -0.22, -0.03, -0.34, -0.26, 0.27,
                0, 0.31, 0.19, 0.22, -0.07,
                0.06, 0.35, 0.05, -0.27,
                0, 0.44, -0.07,
                0.19, -0.32,
                -0.3,
            ]),
        },
    },
    "industrial_combined": {
        "LOS": {
            "r_tau": 2.7,
            "PL": dict(mu=36.3, gamma=19.5, epsilon=18.3),
            "SF": dict(sigma=1.8, lam=15.0, delta=-0.3),
            "DS": dict(mu=-8.3, sigma=0.09, lam=50.0, gamma=1.26, zeta=0.49, delta=0.07),
            "KF": dict(mu=7.8, sigma=1.8, lam=32.0, gamma=-7.3, zeta=-7.7, delta=2.6),
            "ASA": dict(mu=1.69, sigma=0.15, lam=10.0),
            "ASD": dict(mu=1.66, sigma=0.12, lam=10.0, zeta=0.1),
            "ESA": dict(mu=1.64, sigma=0.01, lam=10.0, epsilon=-0.5, kappa=0.09),
            "ESD": dict(mu=1.55, sigma=0.01, lam=10.0, epsilon=-0.5, zeta=0.3, kappa=0.09),
            "XPR": dict(mu=16.8, sigma=3.1, lam=30.0, zeta=-4.5),
            "xcorr": _upper([
                -0.7, -0.3, 0.4, 0, 0.4, 0.3, -0.4,
                0.4, -0.5, 0, -0.3, -0.3, 0.5,
                0, 0, 0, 0, 0,
                0, 0.4, 0.2, -0.5,
                0.1, 0.3, 0,
                0.3, -0.2,
                -0.2,
            ]),
        },
        "NLOS": {
            "r_tau": 3.0,
            "PL": dict(mu=29.1, gamma=25.4, epsilon=24.1),
            "SF": dict(sigma=1.15, lam=30.0, delta=3.15),
            "DS": dict(mu=-8.19, sigma=0.11, lam=52.0, gamma=1.37, zeta=0.3),
            "KF": dict(mu=4.2, sigma=1.1, lam=14.0, gamma=-11.7, zeta=-3.3, delta=2.2),
            "ASA": dict(mu=1.62, sigma=0.22, lam=13.0),
            "ASD": dict(mu=1.68, sigma=0.1, lam=13.0, zeta=-0.2),
            "ESA": dict(mu=1.64, sigma=0.06, lam=20.0, epsilon=-0.5, kappa=0.1),
            "ESD": dict(mu=1.6, sigma=0.17, lam=20.0, epsilon=-0.5, zeta=0.14, kappa=0.1),
            "XPR": dict(mu=14.4, sigma=2.4, lam=27.0, zeta=-2.2),
            "xcorr": _upper([
                -0.6, 0.4, 0.2, 0, 0.3, 0.3, -0.4,
                0, 0, 0, -0.3, 0, 0.3,
                0.2, 0.2, 0.3, 0.3, 0,
                0, 0.4, 0, -0.2,
                0, 0.3, 0,
                0.3, 0,
                -0.3,
            ]),
        },
    },
    "office_38901": {
        "LOS": {
            "r_tau": 3.6,
            "PL": dict(mu=32.4, gamma=20.0, epsilon=17.3),
            "SF": dict(sigma=3.0, lam=10.0),
            "DS": dict(mu=-7.69, sigma=0.18, lam=8.0, gamma=-0.01),
            "KF": dict(mu=7.0, sigma=4.0, lam=4.0),
            "ASA": dict(mu=1.781, sigma=0.119, lam=5.0, gamma=-0.19, delta=0.12),
            "ASD": dict(mu=1.60, sigma=0.18, lam=7.0),
            "ESA": dict(mu=1.44, sigma=0.264, lam=4.0, gamma=-0.26, delta=-0.04),
            "ESD": dict(mu=2.228, sigma=0.30, lam=4.0, gamma=-1.43, delta=0.13),
            "XPR": dict(mu=11.0, sigma=4.0),
            "xcorr": _upper([
                -0.5, -0.8, 0.6, 0.8, 0.1, 0.2, 0,
                0.5, 0, 0, 0, 0.1, 0,
                -0.4, -0.5, 0.2, 0.3, 0,
                0.4, 0.5, 0, 0,
                0, 0.5, 0,
                0, 0,
                0,
            ]),
        },
        "NLOS": {
            "r_tau": 3.0,
            "PL": dict(mu=17.3, gamma=24.9, epsilon=38.3),
            "SF": dict(sigma=8.0, lam=6.0),
            "DS": dict(mu=-7.17, sigma=0.055, lam=5.0, gamma=-0.28, delta=0.1),
            "KF": None,  # not available for the office NLOS reference
            "ASA": dict(mu=1.863, sigma=0.059, lam=3.0, gamma=-0.11, delta=0.12),
            "ASD": dict(mu=1.62, sigma=0.25, lam=3.0),
            "ESA": dict(mu=1.387, sigma=0.746, lam=4.0, gamma=-0.15, delta=-0.09),
            "ESD": dict(mu=1.08, sigma=0.36, lam=4.0),
            "XPR": dict(mu=10.0, sigma=4.0),
            "xcorr": _upper([
                0, -0.5, 0.4, 0, -0.27, -0.06, 0,
                0, 0, 0, 0, 0, 0,
                0, -0.4, 0, 0, 0,
                0.4, 0.35, 0.23, 0,
                -0.08, 0.43, 0,
                0.42, 0,
                0,
            ]),
        },
    },
}
