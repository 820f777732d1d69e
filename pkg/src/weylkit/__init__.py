"""Numerical toolkit for Weyl-type almost periodicity of sampled paths."""

from .almost_period import (
    AlmostPeriodSet,
    TauScan,
    containment_check,
    inclusion_length,
    intersect,
    near_group_violations,
    scan_periods,
    scan_values,
)
from .errors import CapacityError, InputError
from .generators import (
    FrequencySpec,
    Grid,
    MeasureComponent,
    cb_panel_check,
    dense_module_signal,
    measure_valued_path,
    quasi_periodic_signal,
    set_valued_path,
)
from .metric_core import (
    EUCLIDEAN,
    HAUSDORFF,
    LEVY_PROKHOROV,
    TRUNCATED_EUCLIDEAN,
    TRUNCATED_HAUSDORFF,
    FiniteMeasure,
    FiniteSet,
    MetricKind,
    dist,
    hausdorff,
    levy_prokhorov,
    r_delta,
)
from .sampled_path import GridMask, SampledPath, shift, window_mean_p
from .selection import (
    ScanParams,
    SlackFunction,
    measure_selection,
    nearest_point_selection,
    verify_thm1,
    verify_thm3,
)
from .weyl_metrics import (
    compactness_diagnostic,
    d_p_limit,
    d_pl,
    kappa_w,
    mstar_diagnostic,
)

__all__ = [name for name in dir() if not name.startswith("_")]
