"""Cellular radio simulator and drone-UE detection toolkit.

Simulates a sectorized hexagonal network, reproduces the aerial radio
phenomena (interference growth and SINR degradation with altitude), builds
the two-feature drone-detection datasets, trains logistic-regression and
decision-tree classifiers, and gates measured or simulated KPIs against
drone-application connectivity requirements.
"""

__version__ = "0.1.0"

from droneradio.core import active_backend, compiled_available  # noqa: F401
