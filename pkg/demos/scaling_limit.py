"""Rescaled core flow of the two-layer model against its Volterra limit.

As T grows the finite-horizon parameters approach criticality, and the mean
of the rescaled unsigned core flow should approach 2 g(t), with
g(t) = t (1 - E_{a,2}(-t^a)).
"""
import numpy as np

from orderflow import LimitParams, aggregate_flows, finite_horizon_params, simulate_two_layer
from orderflow.cli import build_two_layer
from orderflow.config import parse_config
from orderflow.rng import path_seeds
from orderflow.scaling import rescale_core
from orderflow.specialfn import ml_cdf_integral

lp = LimitParams(0.375)
t_check = np.array([0.25, 0.5, 1.0])
print("limit mean 2 g(t):", np.round(2 * ml_cdf_integral(lp.alpha0, 1.0, t_check), 4))

for k in (10, 12, 14):
    T = 2.0 ** k
    _, fh, params = build_two_layer(parse_config("", T=T))
    grid = np.linspace(0.0, T, 257)
    vals = []
    for s in path_seeds(k, 100):
        _, _, _, V = aggregate_flows(simulate_two_layer(params, T, s), grid)
        v = rescale_core(V, fh)
        vals.append(np.interp(t_check, v.t, v["V"]))
    vals = np.array(vals)
    print(f"T=2^{k}: a0={fh.a0_T:.4f} a1={fh.a1_T:.5f} rescaled mean", np.round(vals.mean(0), 4),
          "+-", np.round(vals.std(0) / 10, 4))
