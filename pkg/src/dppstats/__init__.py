"""Counting statistics of rotation-invariant determinantal point processes."""

from .ensembles import Ensemble, Family, Profile, profile

__all__ = ["Ensemble", "Family", "Profile", "profile"]
__version__ = "0.1.0"
