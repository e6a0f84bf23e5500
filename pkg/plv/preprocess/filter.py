import numpy as np
from scipy.signal import butter, sosfiltfilt

from plv.exceptions import DataError
from plv.ingest.recording import FrequencyBand
from plv.preprocess.epochs import EpochSet

DEFAULT_ORDER = 4


class FilterLengthError(DataError):
    pass


def design_bandpass(band: FrequencyBand, sampling_rate: float, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Butterworth band-pass as second-order sections."""
    band.validate(sampling_rate)
    return butter(order, [band.low_hz, band.high_hz], btype='bandpass', fs=sampling_rate, output='sos')


def padding_length(sos: np.ndarray) -> int:
    """Default edge padding of sosfiltfilt; epochs must be longer than this."""
    return 3 * (2 * len(sos) + 1 - min((sos[:, 2] == 0).sum(), (sos[:, 5] == 0).sum()))


def bandpass(epochs: EpochSet, band: FrequencyBand, order: int = DEFAULT_ORDER) -> EpochSet:
    """Zero-phase band-pass: the filter is run forward then backward along each trial and channel."""
    if not isinstance(epochs, EpochSet):
        raise TypeError(f"the 'epochs' specified was of wrong type {type(epochs)}, expected {EpochSet}.")
    if not isinstance(band, FrequencyBand):
        raise TypeError(f"the 'band' specified was of wrong type {type(band)}, expected {FrequencyBand}.")
    if not isinstance(order, int):
        raise TypeError(f"the 'order' specified was of wrong type {type(order)}, expected {int}.")
    if order < 1:
        raise ValueError(f"the 'order' specified was less than 1.")
    sos = design_bandpass(band, epochs.sampling_rate, order)
    padlen = padding_length(sos)
    if epochs.n_samples <= padlen:
        raise FilterLengthError(
            f"epochs of {epochs.n_samples} samples are too short for the order {order} {band} filter, "
            f"more than {padlen} samples are needed.")
    filtered = sosfiltfilt(sos, epochs.data, axis=-1, padlen=padlen)
    return epochs.with_data(filtered, band=band)
