"""Attosecond streaking with squeezed-coherent infrared light.

Ensemble TDSE simulation of delay-resolved photoelectron spectra and
retrieval of the light state's phases and field scales from the first two
momentum moments.
"""

__version__ = "0.1.0"
