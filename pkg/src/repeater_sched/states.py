"""Bell-diagonal state algebra: noise channels and recurrence purification.

Average EPR-pair states are tracked as the four diagonal weights in the
Bell basis, ordered (Phi+, Psi-, Psi+, Phi-).  All maps in this module
are closed on that family: depolarizing and dephasing noise, the DEJMPS
purification step, entanglement swapping via a Bell measurement, and the
Werner-state fidelity recurrence of the BBPSSW protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .defaults import DEFAULT_COHERENCE_TIME_S, DEFAULT_SIGNAL_SPEED_M_S

# Tolerance for the normalization invariant of a Bell-diagonal state.
NORM_ATOL = 1e-12

# Bell-basis labels in coefficient order.
BELL_LABELS = ("phi_plus", "psi_minus", "psi_plus", "phi_minus")

# Error syndromes (x, z) of the Bell states, in coefficient order:
# Phi+ carries no error, Psi+ a bit flip, Phi- a phase flip, Psi- both.
BELL_SYNDROMES = ((0, 0), (1, 1), (1, 0), (0, 1))


@dataclass(frozen=True, slots=True)
class NoiseParams:
    """Hardware noise model of a chain.

    gate_error is the depolarizing weight applied per two-qubit
    operation.  Memory decoherence is pure dephasing with the given
    coherence time; waits are converted to time via the classical
    signal speed in fiber.
    """

    gate_error: float
    coherence_time_s: float = DEFAULT_COHERENCE_TIME_S
    signal_speed_m_s: float = DEFAULT_SIGNAL_SPEED_M_S

    def __post_init__(self) -> None:
        if not 0.0 <= self.gate_error < 1.0:
            raise ValueError(f"gate_error must be in [0, 1), got {self.gate_error}")
        if not self.coherence_time_s > 0.0:
            raise ValueError("coherence_time_s must be positive")
        if not self.signal_speed_m_s > 0.0:
            raise ValueError("signal_speed_m_s must be positive")


@dataclass(frozen=True, slots=True)
class BellDiagonalState:
    """Average two-qubit state, diagonal in the Bell basis.

    Coefficients (a, b, c, d) weight (Phi+, Psi-, Psi+, Phi-); they are
    probabilities summing to one, and the fidelity to the target Phi+
    pair is the first coefficient.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        total = self.a + self.b + self.c + self.d
        if abs(total - 1.0) > NORM_ATOL:
            raise ValueError(f"coefficients must sum to 1, got {total!r}")
        for name, value in zip(BELL_LABELS, self.coeffs):
            if not -NORM_ATOL <= value <= 1.0 + NORM_ATOL:
                raise ValueError(f"coefficient {name} out of [0, 1]: {value!r}")

    @property
    def coeffs(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def fidelity(self) -> float:
        return self.a

    @staticmethod
    def werner(fidelity: float) -> "BellDiagonalState":
        """Werner state: all error weight spread evenly off the target."""
        if not 0.0 <= fidelity <= 1.0:
            raise ValueError(f"fidelity must be in [0, 1], got {fidelity}")
        rest = (1.0 - fidelity) / 3.0
        return BellDiagonalState(fidelity, rest, rest, rest)

    @staticmethod
    def perfect() -> "BellDiagonalState":
        return BellDiagonalState(1.0, 0.0, 0.0, 0.0)


def bbpssw_fidelity_update(fidelity: float) -> float:
    """One BBPSSW purification step on two Werner pairs of this fidelity.

    Returns the post-selected output fidelity

        F' = (F^2 + ((1-F)/3)^2) / (F^2 + 2F(1-F)/3 + 5((1-F)/3)^2)

    which exceeds F for F in (1/2, 1).  This recurrence is a reference
    map for tests and baselines; the chain protocol itself distills with
    the DEJMPS step below.
    """
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"fidelity must be in [0, 1], got {fidelity}")
    miss = (1.0 - fidelity) / 3.0
    num = fidelity * fidelity + miss * miss
    den = fidelity * fidelity + 2.0 * fidelity * miss + 5.0 * miss * miss
    return num / den


def depolarize(state: BellDiagonalState, weight: float) -> BellDiagonalState:
    """Two-qubit depolarizing channel: mix toward the maximally mixed state."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must be in [0, 1], got {weight}")
    keep = 1.0 - weight
    mix = weight * 0.25
    a, b, c, d = state.coeffs
    return BellDiagonalState(keep * a + mix, keep * b + mix, keep * c + mix, keep * d + mix)


def dephase_weight(state: BellDiagonalState, lam: float) -> BellDiagonalState:
    """Apply phase damping with a given mixing weight lam in [0, 1/2].

    A phase flip exchanges Phi+ with Phi- and Psi+ with Psi-, so
    dephasing mixes those coefficient pairs.
    """
    if not 0.0 <= lam <= 0.5:
        raise ValueError(f"dephasing weight must be in [0, 1/2], got {lam}")
    a, b, c, d = state.coeffs
    keep = 1.0 - lam
    return BellDiagonalState(
        keep * a + lam * d,
        keep * b + lam * c,
        keep * c + lam * b,
        keep * d + lam * a,
    )


def dephase(state: BellDiagonalState, wait_distance_m: float, noise: NoiseParams) -> BellDiagonalState:
    """Memory dephasing while waiting for classical signals to travel.

    The wait time is wait_distance_m / signal speed and the mixing
    weight is lam = (1 - exp(-t / T_coh)) / 2, saturating at the
    fully dephased value 1/2.
    """
    if wait_distance_m < 0.0:
        raise ValueError(f"wait distance must be >= 0, got {wait_distance_m}")
    t = wait_distance_m / noise.signal_speed_m_s
    lam = 0.5 * -math.expm1(-t / noise.coherence_time_s)
    return dephase_weight(state, lam)


def dejmps_step(
    state: BellDiagonalState, noise: NoiseParams
) -> tuple[BellDiagonalState, float]:
    """One DEJMPS purification step on two identical copies of `state`.

    Each input copy first passes through a two-qubit depolarizing
    channel with the gate-error weight, then the ideal recurrence map
    acts on the noisy coefficients (A, B, C, D):

        success = (A + B)^2 + (C + D)^2
        output  = (A^2 + B^2, 2CD, C^2 + D^2, 2AB) / success

    Returns the post-selected output state and the success probability.
    The coefficient convention is pinned by an exact two-pair circuit
    simulation in the test suite.
    """
    noisy = depolarize(state, noise.gate_error)
    a, b, c, d = noisy.coeffs
    success = (a + b) ** 2 + (c + d) ** 2
    if success <= 0.0:
        return state, 0.0
    return (
        BellDiagonalState(
            (a * a + b * b) / success,
            2.0 * c * d / success,
            (c * c + d * d) / success,
            2.0 * a * b / success,
        ),
        success,
    )


def swap_states(
    left: BellDiagonalState, right: BellDiagonalState, noise: NoiseParams
) -> BellDiagonalState:
    """Entanglement swapping of two links via a middle Bell measurement.

    Pauli error syndromes (x, z) add modulo two across the two input
    links, so the output coefficients are the group convolution of the
    inputs over Z2 x Z2; the Bell-state measurement itself contributes
    one depolarizing application at the gate-error weight.
    """
    a1, b1, c1, d1 = left.coeffs
    a2, b2, c2, d2 = right.coeffs
    a = a1 * a2 + b1 * b2 + c1 * c2 + d1 * d2
    b = a1 * b2 + b1 * a2 + c1 * d2 + d1 * c2
    c = a1 * c2 + c1 * a2 + b1 * d2 + d1 * b2
    d = a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2
    # The convolution of two unit-mass vectors has unit mass; dividing by
    # the computed sum removes the rounding that would otherwise compound
    # exponentially over deep swapping hierarchies.
    total = a + b + c + d
    fused = BellDiagonalState(a / total, b / total, c / total, d / total)
    return depolarize(fused, noise.gate_error)
