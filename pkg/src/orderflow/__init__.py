"""Two-layer Hawkes order-flow model: simulation, scaling limits, Hurst estimation and impact."""

__version__ = "0.1.0"

from .specialfn import MLParams, mittag_leffler, ml_cdf, ml_cdf_integral, ml_density
from .kernels import (GridKernel, KernelMatrixSpec, KernelSpec, eigen_kernels, exp_mixture,
                      kernel_eval, offspring_delay, resolvent, shifted_pareto)
from .paths import PathGrid
from .scaling import (FiniteHorizonParams, LimitParams, finite_horizon_params, rescale_core,
                      rescale_signed, rescale_unsigned)
from .hawkes import (EventStream, TwoLayerParams, aggregate_flows, intensity_path,
                     martingale_residual, simulate_core, simulate_thinning, simulate_two_layer)
from .limits import (MixedFbmParams, VolterraGrid, simulate_core_limit, simulate_fbm,
                     simulate_mixed_fbm, simulate_reaction_limit, simulate_signed_limit)
from .estimators import (EstimateReport, deseasonalize, hurst_fbm, hurst_mixed, hurst_volume,
                         qv, truncate_outliers)
from .impact import (PropagatorSpec, metaorder_experiment, mi_curve, price_path,
                     propagator_kernel, two_layer_propagator, vol_hurst)
from .ingest import TradeRecord, bin_flows, load_trades
