"""Geometric-stochastic channel engine for industrial indoor radio (2-6 GHz).

Generates spatially consistent large-scale parameters and channel impulse
responses from measured parameter tables, and recovers those parameters from
sample data via the inverse fitting pipeline.
"""

__version__ = "0.1.0"

from .params import (  # noqa: F401
    LspDescriptor,
    ScenarioTable,
    ScenarioFormatError,
    builtin_scenario,
    eval_mean,
    eval_std,
    realize_lsp,
    path_loss,
    load_scenario,
    save_scenario,
)
from .fields import (  # noqa: F401
    CorrelatedFieldSet,
    LspRealization,
    nearest_correlation,
    sqrt_factor,
    lsp_at,
    lsp_track,
)
from .smallscale import (  # noqa: F401
    PathSet,
    draw_delays,
    draw_powers,
    draw_angles,
    apply_polarization,
    synthesize_pathset,
    to_cir,
    freq_response,
)
from .analysis import (  # noqa: F401
    SampleRecord,
    rms_ds,
    kf_est,
    rms_angular_spread,
    xpr_est,
    average_intervals,
    fit_lsp_model,
    estimate_decorrelation,
    estimate_cross_corr,
)
from .tables import LSP_NAMES, SCENARIO_NAMES, XCORR_ORDER  # noqa: F401
