"""Numerical model of an atomic-frequency-comb spin-wave memory in Pr:Y2SiO5.

Modules
-------
spectrum      level scheme, optical pumping and comb profiles
propagation   Kramers-Kronig transfer function and echo extraction
spinwave      chirped transfer pulses and spin dephasing
detection     noise budget, filtering and photon-counting Monte Carlo
qubit         time-bin storage, double-write fringes, fidelity model
benchmark     classical measure-and-prepare fidelity bound
fitkit        weighted least-squares fits
harness       config-driven experiment runner and command line
"""

__version__ = "0.1.0"
