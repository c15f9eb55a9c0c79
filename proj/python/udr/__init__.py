"""Density-ratio estimation, covariate-shift correction and conditional flows."""

from ._udr import *  # noqa: F401,F403
from ._udr import IoError, NumericalError  # noqa: F401
