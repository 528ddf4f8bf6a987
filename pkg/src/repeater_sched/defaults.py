"""Model constants and default parameter grid.

Every physical constant of the simulation is named here instead of being
hard-coded at its point of use, so a run's configuration can be recorded
verbatim in result stores and reports.
"""

# Fiber attenuation length (meters).
DEFAULT_ATTENUATION_M = 20_000.0

# Memory model: pure dephasing with this coherence time (seconds).
DEFAULT_COHERENCE_TIME_S = 1.0

# Classical heralding signals propagate in fiber at this speed (m/s).
DEFAULT_SIGNAL_SPEED_M_S = 2.0e8

# SKR values below this count as "no key" when flagging plateau ratios.
NEGLIGIBLE_SKR = 1e-10

# Fidelity thresholds tried for the threshold-rule baseline.
DEFAULT_FTH_GRID = (0.9, 0.95, 0.99)

# Fixed fallback seed so unseeded runs stay reproducible.
DEFAULT_SEED = 20240731

# Default sweep grid (overridable per sweep config).
DEFAULT_N_VALUES = tuple(2**k for k in range(2, 13))
DEFAULT_M_VALUES = (512, 1024, 2048)
DEFAULT_COUPLING_VALUES = (0.3, 0.5, 0.9, 1.0)
DEFAULT_GATE_ERROR_VALUES = (1e-4, 1e-3)

# Total-distance range (meters) and number of log-spaced points.
DEFAULT_DISTANCE_RANGE_M = (10_000.0, 10_000_000.0)
DEFAULT_DISTANCE_POINTS = 40

# Environment variable capping sweep worker parallelism.
THREADS_ENV_VAR = "REPEATER_SCHED_THREADS"


def model_constants() -> dict:
    """Constants that pin down the physical model, for run metadata."""
    return {
        "attenuation_m": DEFAULT_ATTENUATION_M,
        "coherence_time_s": DEFAULT_COHERENCE_TIME_S,
        "signal_speed_m_s": DEFAULT_SIGNAL_SPEED_M_S,
        "negligible_skr": NEGLIGIBLE_SKR,
    }
