"""
effham utilities package

``DataLoader`` depends on the models package and is imported from
``effham.utils.data_loader`` directly.
"""
from .numerics import EigenSystem, eig_full, fidelity, null_space

__all__ = [
    "EigenSystem",
    "eig_full",
    "null_space",
    "fidelity",
]
