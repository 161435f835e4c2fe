# %% [markdown]
# # Spin-wave storage efficiency, noise and signal-to-noise ratio
#
# The spin-wave memory transfers the excitation to a spin level and back
# with two control pulses.  Its efficiency is the echo efficiency times two
# transfers times spin dephasing.  The control pulses also create noise,
# which is the quantity that limits single-photon operation.

# %%
import numpy as np
from _plotting import plt, save

from afcmemory import detection, spinwave

spin = spinwave.SpinParams(26.0)
eff = spinwave.total_efficiency(0.056, 0.817, spinwave.spin_decoherence(spin, 7.8))
print(eff)

# %% [markdown]
# ## Noise budget
#
# Noise measured with the filter in three settings fixes the three source
# strengths of the model.  The model then predicts the noise for any filter
# width.

# %%
chain = detection.DetectionChain()
noise = detection.calibrate_noise(detection.DEFAULT_ANCHORS, chain)
budget = detection.noise_budget(chain, detection.FilterConfig(), noise)
print(f"noise per gate with the 2 MHz hole: {budget.total:.2e}")
print(f"  fluorescence {budget.fluorescence:.2e}, leakage {budget.leakage:.2e}, dark {budget.dark:.2e}")

rows = detection.filter_sweep(noise, np.linspace(0.5, 24, 48), eff.eta_sw, chain)
if plt:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.semilogy([r["hole_width_MHz"] for r in rows], [r["p_N"] for r in rows])
    ax.set(xlabel="filter hole width (MHz)", ylabel="noise per gate")
    save(fig, "filter_sweep.png")

# %% [markdown]
# ## Signal-to-noise ratio
#
# SNR grows linearly with input photon number; its inverse slope mu_1 is
# the input for which signal equals noise.  A Monte Carlo count at the
# operating point of 1.15 photons agrees with the expectation.

# %%
mu1 = detection.mu_one(eff.eta_sw, budget.total)
print(f"mu_1 = {mu1:.3f}")
means = detection.expected_counts(1.15, eff.eta_sw, chain, budget.total)
est = detection.snr_from_histogram(detection.simulate_windows(means, 700_000, seed=1))
print(f"SNR expected {means.snr:.2f}, simulated {est.snr:.2f} +/- {est.sigma:.2f}")

# %% [markdown]
# Longer spin storage reduces the signal through inhomogeneous spin
# dephasing while the noise stays put.

# %%
for ts in (5.0, 7.8, 12.5, 18.8, 25.0):
    e = spinwave.total_efficiency(0.056, 0.817, spinwave.spin_decoherence(spin, ts))
    print(f"T_s = {ts:5.1f} us   SNR = {1.15 / detection.mu_one(e.eta_sw, budget.total):6.2f}")
