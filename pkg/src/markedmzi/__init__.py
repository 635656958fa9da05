"""Simulator of a Mach-Zehnder interferometer whose signal path is marked
by the polarization of an entangled idler photon, read out by unambiguous
state discrimination."""

from .experiment import (
    CoincidenceTable,
    ConfigError,
    DomainError,
    DualityReport,
    IdlerMeasurement,
    coincidence_table_analytic,
    coincidence_table_circuit,
    duality_report,
    joint_state,
    signal_rho,
    usd_angle,
    usd_measurement,
)

__version__ = "0.1.0"
