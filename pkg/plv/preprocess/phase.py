import numpy as np
from scipy.signal import hilbert

from plv.preprocess.epochs import EpochSet, PhaseEpochs


def wrap_phase(phase: np.ndarray) -> np.ndarray:
    """Maps angles from [-pi, pi] onto (-pi, pi]."""
    return np.where(phase <= -np.pi, phase + 2 * np.pi, phase)


def analytic_phase(epochs: EpochSet) -> PhaseEpochs:
    """Instantaneous phase of the FFT analytic signal of every trial and channel."""
    if not isinstance(epochs, EpochSet):
        raise TypeError(f"the 'epochs' specified was of wrong type {type(epochs)}, expected {EpochSet}.")
    analytic = hilbert(epochs.data, axis=-1)
    return PhaseEpochs(phase=wrap_phase(np.angle(analytic)), source=epochs)
