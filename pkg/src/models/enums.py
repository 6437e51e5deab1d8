from enum import Enum


class Port(str, Enum):
    """
    Waveguide port the probe enters from.

    A wave from the right sees the emitter chain in reverse order.
    """

    LEFT = "left"
    RIGHT = "right"


class SolverTier(str, Enum):
    """Solver used for sideband amplitudes in sweeps."""

    FLOQUET = "floquet"  # weak-drive linear response
    LINDBLAD = "lindblad"  # master equation, any drive power


class DissipatorConvention(str, Enum):
    """
    How the coherence decay rate enters the master equation.

    PURE_DEPHASING adds a separate dephasing channel at rate Gamma2 - Gamma1/2.
    PRINTED_DIAGONAL adds Gamma2 to the diagonal of the radiative kernel.
    """

    PURE_DEPHASING = "pure_dephasing"
    PRINTED_DIAGONAL = "printed_diagonal"


class BlochFrame(str, Enum):
    """Reference frame for Bloch integration."""

    ROTATING = "rotating"  # rotating at the drive frequency
    LAB = "lab"


class ModulationDepthConvention(str, Enum):
    """Relation between the Bloch-field modulation depth and A_m."""

    AMPLITUDE = "amplitude"  # delta_omega = A_m
    PEAK_TO_PEAK = "peak_to_peak"  # delta_omega = 2 A_m


class Direction(str, Enum):
    """Output channel relative to the probe's propagation."""

    FORWARD = "forward"  # transmitted side
    BACKWARD = "backward"  # reflected side
