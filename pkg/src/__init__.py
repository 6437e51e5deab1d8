"""
modmirror: photon scattering from frequency-modulated emitters in a waveguide.
"""

__version__ = "0.3.0"
