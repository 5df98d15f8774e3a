"""Simulator and analysis toolkit for prethermal discrete-time-crystal
spin dynamics under kicked spin-lock drives with a superimposed AC field.

Layout:

- :mod:`dtcsim.lattice`     - random dipolar spin clusters
- :mod:`dtcsim.operators`   - Hilbert-space operators (H_dd, H_SL, I^alpha)
- :mod:`dtcsim.sequence`    - pulse schedules, AC drive, disorder draws
- :mod:`dtcsim.propagator`  - exact state propagation and readout
- :mod:`dtcsim.analysis`    - fidelity, lifetimes, spectra, oracles
- :mod:`dtcsim.experiments` - ensembles, sweeps, run directories, CLI
"""

__version__ = "0.1.0"
