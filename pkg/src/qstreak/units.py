"""Atomic-unit conversions used throughout the package."""

import math

SPEED_OF_LIGHT = 137.036  # a.u.
BOHR_NM = 0.0529177  # nm per bohr
HARTREE_EV = 27.2114
ATOMIC_INTENSITY = 3.50945e16  # W/cm^2
ATOMIC_TIME_FS = 0.0241888  # fs per a.u. of time


def intensity_to_field(intensity):
    """Peak field amplitude (a.u.) of a linearly polarized pulse of the given
    intensity in W/cm^2."""
    if intensity < 0:
        raise ValueError(f"intensity must be non-negative, got {intensity}")
    return math.sqrt(intensity / ATOMIC_INTENSITY)


def field_to_intensity(field):
    return field * field * ATOMIC_INTENSITY


def wavelength_to_omega(lambda_nm):
    """Angular frequency in a.u. for a vacuum wavelength in nanometres."""
    if not lambda_nm > 0:
        raise ValueError(f"wavelength must be positive, got {lambda_nm}")
    return 2.0 * math.pi * SPEED_OF_LIGHT / (lambda_nm / BOHR_NM)


def ev_to_hartree(energy_ev):
    return energy_ev / HARTREE_EV


def fs_to_au(t_fs):
    return t_fs / ATOMIC_TIME_FS


def as_to_au(t_as):
    return t_as * 1e-3 / ATOMIC_TIME_FS
