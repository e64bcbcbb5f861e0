"""Default deployment profile: per-budget timings, entropy rates and accuracies.

Times in ms measured on a Raspberry Pi 4B (device) and an RTX 2080TI (server),
clip size 16x3x224x224, budgets A = {1, 2, 4, 8, 16}, tabulated at 100% and 40%
spatial budget. ``deepisc`` rows carry the DeepISC codec time in ``t_fr_ms``;
its 100% rows have no published codec time or accuracy and are left blank
(unavailable). The ``local`` row holds on-device inference time in
``t_vit_ms``; that value is a placeholder chosen so the local/offload crossover
lands near 1.2 Mbps, not a measurement.
"""

DEFAULT_DIMS = (16, 3, 224, 224)
DEFAULT_ALPHAS = (1, 2, 4, 8, 16)
DEFAULT_BETAS = (1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4)
TABULATED_BETAS = (1.0, 0.4)

DEFAULT_PROFILE_CSV = """\
method,alpha_k,beta_m_percent,t_fa_ms,t_sa_ms,t_fr_ms,t_vit_ms,t_ee_ms,t_ed_ms,entropy_bits,accuracy_pct,accuracy_spread
stae,16,100,0,0,0,31.5,10.53,8.63,15.37,73.3,0.24
stae,8,100,2.7,0,0,24.6,8.25,7.41,14.48,71.9,0.21
stae,4,100,2.7,0,0,18.7,6.94,5.52,13.86,70.8,0.20
stae,2,100,2.7,0,0,10.2,4.76,3.37,13.13,69.8,0.19
stae,1,100,2.7,0,0,6.8,3.03,2.04,12.62,68.7,0.21
stae,16,40,0,43.3,16.3,31.5,9.35,7.92,14.03,72.6,0.18
stae,8,40,2.7,36.1,7.8,24.6,7.95,6.41,13.01,71.3,0.17
stae,4,40,2.7,30.3,4.9,18.7,5.90,4.91,12.89,70.1,0.22
stae,2,40,2.7,21.7,2.5,10.2,4.24,3.02,12.73,69.1,0.20
stae,1,40,2.7,15.4,1.6,6.8,2.79,1.76,12.26,68.1,0.19
deepisc,16,100,0,0,,31.5,8.73,7.36,14.72,,
deepisc,8,100,2.7,0,,24.6,7.42,5.83,13.71,,
deepisc,4,100,2.7,0,,18.7,5.49,4.25,13.27,,
deepisc,2,100,2.7,0,,10.2,4.06,2.79,12.91,,
deepisc,1,100,2.7,0,,6.8,2.30,1.47,12.33,,
deepisc,16,40,0,0,82.7,31.5,8.31,7.12,13.92,68.6,0.14
deepisc,8,40,2.7,0,67.3,24.6,7.21,5.43,12.94,67.1,0.19
deepisc,4,40,2.7,0,54.1,18.7,5.08,4.07,12.47,66.0,0.21
deepisc,2,40,2.7,0,41.9,10.2,3.89,2.54,12.42,64.9,0.16
deepisc,1,40,2.7,0,31.5,6.8,2.02,1.35,12.11,62.8,0.19
local,16,100,,,,620,,,,73.3,0.24
"""
