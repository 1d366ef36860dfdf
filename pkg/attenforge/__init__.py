"""Two-port modelling, synthesis and verification of switch-type mm-wave step attenuators."""

__version__ = "0.1.0"
