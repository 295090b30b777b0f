"""
Tabular views of trajectories for CSV output.
"""
from typing import Sequence, Tuple

import numpy as np
import pandas as pd


def trajectory_frame(times: Sequence[float], states: Sequence[np.ndarray]) -> pd.DataFrame:
    """
    One row per time: ``t`` followed by ``re_mn``/``im_mn`` for every
    matrix entry in row-major order.
    """
    if len(times) != len(states):
        raise ValueError(f"{len(times)} times but {len(states)} states")
    stacked = np.array(states, dtype=np.complex128)
    n = stacked.shape[1]
    columns = {"t": np.asarray(times, dtype=float)}
    for m in range(n):
        for k in range(n):
            columns[f"re_{m}{k}"] = stacked[:, m, k].real
            columns[f"im_{m}{k}"] = stacked[:, m, k].imag
    return pd.DataFrame(columns)


def two_band_frame(
    times: Sequence[float], components: Sequence[Tuple[np.ndarray, np.ndarray]]
) -> pd.DataFrame:
    """
    Populations and coherences of both bands plus the reduced trace.

    ``rho1`` is the lower-band component and ``rho2`` the upper one; ``e``
    and ``g`` label the qubit levels.
    """
    frame = pd.DataFrame({"t": np.asarray(times, dtype=float)})
    for label, k in (("rho1", 0), ("rho2", 1)):
        mats = np.array([pair[k] for pair in components], dtype=np.complex128)
        frame[f"{label}_ee"] = mats[:, 0, 0].real
        frame[f"{label}_gg"] = mats[:, 1, 1].real
        frame[f"re_{label}_eg"] = mats[:, 0, 1].real
        frame[f"im_{label}_eg"] = mats[:, 0, 1].imag
    frame["trace"] = frame["rho1_ee"] + frame["rho1_gg"] + frame["rho2_ee"] + frame["rho2_gg"]
    return frame
