# %% [markdown]
# # Storing time-bin qubits and beating the classical bound
#
# A time-bin qubit written twice, with a phase step between the writes,
# interferes with itself at the output.  Fringe visibility and the
# early/late fidelity give the total qubit fidelity, which must beat the
# best measure-and-prepare strategy at the same efficiency.

# %%
import numpy as np
from _plotting import plt, save

from afcmemory import benchmark, qubit

dw = qubit.DoubleWriteConfig()
scan = qubit.fringe_scan(qubit.TimeBinQubit(mu_q=5.9), dw, 0.028, 2_000_000, seed=0)
print(f"fitted visibility {scan.visibility:.3f} +/- {scan.visibility_sigma:.3f}")
print(f"model visibility  {qubit.visibility_model(5.9, dw.mu1p, dw.alpha):.3f}")

if plt:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(scan.delta_beta, scan.counts, "o")
    xs = np.linspace(0, 360, 200)
    ax.plot(xs, scan.fit.predict(xs))
    ax.set(xlabel="write phase (deg)", ylabel="central-bin counts")
    save(fig, "fringe.png")

# %% [markdown]
# ## Fidelity against the classical bound
#
# The excess-noise factor alpha is fitted to the measured total fidelities.
# The classical bound accounts for the Poisson photon-number spread of the
# weak coherent input and the memory efficiency of 2.2 %.

# %%
res = qubit.fit_alpha()
alpha = res.params["alpha"]
print(f"alpha = {alpha:.2f} +/- {res.uncertainties['alpha']:.2f}")
crossing = benchmark.quantum_crossing(0.11, alpha, 0.022)
print(f"model fidelity exceeds the classical bound above mu = {crossing.mu_star:.2f}")
for row in crossing.table:
    print(f"mu = {row['mu_q']:.1f}  F_T = {row['F_T_measured']:.3f}  F_C = {row['F_C']:.3f}")

mus = np.geomspace(0.05, 10, 60)
curves = benchmark.fidelity_curves(mus, 0.11, alpha, 0.022)
if plt:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.semilogx(mus, [c["F_T"] for c in curves], label="memory model")
    ax.semilogx(mus, [c["F_C"] for c in curves], label="classical, eta = 2.2 %")
    ax.semilogx(mus, [c["F_C_eta1"] for c in curves], "--", label="classical, eta = 1")
    ax.axhline(2 / 3, color="gray", lw=0.8)
    t = qubit.measured_table()
    ax.errorbar(t["mu_q"], t["F_T"], t["F_T_sigma"], fmt="o", label="measured")
    ax.set(xlabel="photons per qubit", ylabel="fidelity")
    ax.legend(fontsize=8)
    save(fig, "fidelity.png")
