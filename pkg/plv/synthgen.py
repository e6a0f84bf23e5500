"""
Synthetic multichannel EEG with known phase coupling. Coupled channels share a carrier whose per-trial phase offset
is von Mises distributed, so the expected phase-locking value of a coupled pair is I1(kappa)/I0(kappa).
"""
from __future__ import annotations
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import i0e, i1e

from plv.exceptions import ConfigurationError
from plv.ingest.montage import Montage, REGIONS
from plv.ingest.recording import Recording, Marker
from plv.preprocess.epochs import (
    EpochSet, EpochWindow, IMAGINED_SPEECH, CLASS_LABELS, REST_LABEL, TASK, REST, PARADIGMS, STIMULUS,
    condition_of, format_marker_description)

# spawn key namespaces, kept apart so unit and subject streams never collide
UNIT_STREAM = 0
SUBJECT_STREAM = 1
OUTPUT_FORMATS = ('brainvision', 'csv', 'both')


class NyquistError(ConfigurationError):
    pass


class CouplingError(ConfigurationError):
    pass


def generator(seed: int, *key: int) -> np.random.Generator:
    """Counter-based Philox stream for (seed, key). The same seed and key always give the same stream."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def derive_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(1, dtype=np.uint64)[0])


def expected_plv(kappa: float) -> float:
    """I1(kappa)/I0(kappa), the mean resultant length of a von Mises(0, kappa) offset. Infinite kappa gives 1."""
    if kappa < 0 or math.isnan(kappa):
        raise ValueError(f"the 'kappa' specified must be non-negative, got {kappa}.")
    if math.isinf(kappa):
        return 1.0
    # exponentially scaled Bessel functions stay finite for large kappa
    return float(i1e(kappa) / i0e(kappa))


@dataclass(frozen=True)
class ChannelCoupling:
    """The target channel's phase is the source channel's phase plus a von Mises(0, kappa) offset."""
    source: str
    target: str
    kappa: float

    def __str__(self) -> str:
        return f"{self.source}-{self.target}:{self.kappa:g}"


@dataclass(frozen=True)
class CouplingSpec:
    channel_labels: Tuple[str, ...]
    couplings: Tuple[ChannelCoupling, ...] = ()
    carrier_hz: float = 10.0
    trial_jitter: bool = False
    jitter_hz: float = 0.5
    noise_sigma: float = 0.0
    amplitude_uv: float = 10.0
    seed: int = 0

    def problems(self) -> List[str]:
        found = []
        known = set(self.channel_labels)
        if len(known) != len(self.channel_labels):
            found.append("the simulated channel labels are not unique.")
        if not self.carrier_hz > 0:
            found.append(f"the carrier frequency must be positive, got {self.carrier_hz:g} Hz.")
        if self.trial_jitter and not 0 <= self.jitter_hz < self.carrier_hz:
            found.append(f"the carrier jitter must lie in [0, carrier), got {self.jitter_hz:g} Hz.")
        if not self.noise_sigma >= 0:
            found.append(f"the noise sigma must not be negative, got {self.noise_sigma:g}.")
        if not self.amplitude_uv >= 0:
            found.append(f"the carrier amplitude must not be negative, got {self.amplitude_uv:g}.")
        if not 0 <= self.seed < 2 ** 64:
            found.append(f"the seed must be a 64-bit unsigned integer, got {self.seed}.")
        targets = set()
        for coupling in self.couplings:
            for label in (coupling.source, coupling.target):
                if label not in known:
                    found.append(f"coupling {coupling} names the unknown channel '{label}'.")
            if coupling.source == coupling.target:
                found.append(f"coupling {coupling} couples a channel to itself.")
            if coupling.target in targets:
                found.append(f"channel '{coupling.target}' is the target of more than one coupling.")
            targets.add(coupling.target)
            if not coupling.kappa >= 0:
                found.append(f"coupling {coupling} must have a non-negative kappa.")
        if not found and _has_cycle(self.couplings):
            found.append("the couplings form a cycle, every channel must trace back to an uncoupled root.")
        return found

    def validate(self) -> None:
        found = self.problems()
        if found:
            raise CouplingError(found)

    def parents(self) -> Dict[str, ChannelCoupling]:
        return {coupling.target: coupling for coupling in self.couplings}


def _has_cycle(couplings: Sequence[ChannelCoupling]) -> bool:
    parents = {coupling.target: coupling.source for coupling in couplings}
    for start in parents:
        seen = {start}
        node = start
        while node in parents:
            node = parents[node]
            if node in seen:
                return True
            seen.add(node)
    return False


def coupling_order(spec: CouplingSpec) -> List[ChannelCoupling]:
    """Couplings ordered so every source is resolved before it is used, ties kept in declaration order."""
    parents = spec.parents()

    def depth(label: str) -> int:
        steps = 0
        while label in parents:
            label = parents[label].source
            steps += 1
        return steps

    return sorted(spec.couplings, key=lambda coupling: depth(coupling.target))


def _ancestry(label: str, parents: Mapping[str, ChannelCoupling]) -> List[Tuple[str, float]]:
    """(channel, expected plv of the edge to its parent) from label up to its root, root last with value 1."""
    chain = []
    while label in parents:
        chain.append((label, expected_plv(parents[label].kappa)))
        label = parents[label].source
    chain.append((label, 1.0))
    return chain


def expected_pair_plv(spec: CouplingSpec, a: str, b: str) -> float:
    """
    Expected PLV between any two simulated channels. Offsets along a coupling path add up independently, so the
    expectation is the product of the edge values on the path. Channels in different coupling trees expect 0.
    """
    if a == b:
        return 1.0
    parents = spec.parents()
    chain_a = _ancestry(a, parents)
    chain_b = _ancestry(b, parents)
    nodes_b = [node for node, _ in chain_b]
    for index_a, (node, _) in enumerate(chain_a):
        if node in nodes_b:
            index_b = nodes_b.index(node)
            value = 1.0
            for _, edge in chain_a[:index_a] + chain_b[:index_b]:
                value *= edge
            return value
    return 0.0


def gen_pink_noise(
        n_samples: int, sigma: float, seed: Union[int, np.random.Generator], n_channels: int = None) -> np.ndarray:
    """
    1/f noise with standard deviation sigma. White Gaussian noise is shaped in the frequency domain by a 1/sqrt(f)
    magnitude envelope with the DC bin removed. Given n_channels, every channel is drawn and shaped at once and the
    result is n_channels x n_samples, each row scaled to sigma on its own.
    """
    if not isinstance(n_samples, (int, np.integer)):
        raise TypeError(f"the 'n_samples' specified was of wrong type {type(n_samples)}, expected {int}.")
    if n_samples < 2:
        raise ValueError(f"the 'n_samples' specified must be at least 2, got {n_samples}.")
    if sigma < 0:
        raise ValueError(f"the 'sigma' specified must not be negative, got {sigma}.")
    if n_channels is not None and (not isinstance(n_channels, (int, np.integer)) or n_channels < 1):
        raise ValueError(f"the 'n_channels' specified must be a positive integer, got {n_channels}.")
    shape = (n_samples,) if n_channels is None else (n_channels, n_samples)
    rng = seed if isinstance(seed, np.random.Generator) else generator(int(seed))
    if sigma == 0:
        return np.zeros(shape, dtype=np.float64)
    spectrum = np.fft.rfft(rng.standard_normal(shape), axis=-1)
    frequencies = np.fft.rfftfreq(n_samples)
    envelope = np.zeros_like(frequencies)
    envelope[1:] = 1.0 / np.sqrt(frequencies[1:])
    noise = np.fft.irfft(spectrum * envelope, n=n_samples, axis=-1)
    noise -= noise.mean(axis=-1, keepdims=True)
    deviation = noise.std(axis=-1, keepdims=True)
    # a flat row stays zero
    scale = np.divide(sigma, deviation, out=np.zeros_like(deviation), where=deviation > 0)
    return noise * scale


def _trial_phases(spec: CouplingSpec, order: Sequence[ChannelCoupling], rng: np.random.Generator) -> np.ndarray:
    index = {label: position for position, label in enumerate(spec.channel_labels)}
    phases = rng.uniform(-np.pi, np.pi, size=len(spec.channel_labels))
    for coupling in order:
        # numpy samples von Mises with the Best-Fisher rejection method, kappa 0 is uniform
        offset = 0.0 if math.isinf(coupling.kappa) else rng.vonmises(0.0, coupling.kappa)
        phases[index[coupling.target]] = phases[index[coupling.source]] + offset
    return phases


def gen_coupled_epochs(
        spec: CouplingSpec, n_trials: int, n_samples: int, fs: float,
        paradigm: str = IMAGINED_SPEECH, class_label: str = CLASS_LABELS[0], condition: str = None) -> EpochSet:
    """
    n_trials epochs of a shared carrier. Trial n draws from its own Philox stream keyed by (seed, n), in the
    order: carrier jitter, channel phases, coupling offsets, then per-channel pink noise.
    """
    if not isinstance(spec, CouplingSpec):
        raise TypeError(f"the 'spec' specified was of wrong type {type(spec)}, expected {CouplingSpec}.")
    if not isinstance(n_trials, (int, np.integer)) or n_trials < 1:
        raise ValueError(f"the 'n_trials' specified must be a positive integer, got {n_trials}.")
    if not isinstance(n_samples, (int, np.integer)) or n_samples < 2:
        raise ValueError(f"the 'n_samples' specified must be an integer of at least 2, got {n_samples}.")
    spec.validate()
    highest = spec.carrier_hz + (spec.jitter_hz if spec.trial_jitter else 0.0)
    if not fs > 2 * highest:
        raise NyquistError(
            f"a sampling rate of {fs:g} Hz cannot carry a {highest:g} Hz carrier, it needs more than {2 * highest:g} Hz.")
    condition = condition if condition is not None else condition_of(class_label)
    order = coupling_order(spec)
    time = np.arange(n_samples, dtype=np.float64) / fs
    data = np.empty((n_trials, len(spec.channel_labels), n_samples), dtype=np.float64)
    for trial in range(n_trials):
        rng = generator(spec.seed, trial)
        carrier = spec.carrier_hz
        if spec.trial_jitter:
            carrier += rng.uniform(-spec.jitter_hz, spec.jitter_hz)
        phases = _trial_phases(spec, order, rng)
        data[trial] = spec.amplitude_uv * np.cos(2 * np.pi * carrier * time[np.newaxis, :] + phases[:, np.newaxis])
        if spec.noise_sigma > 0:
            data[trial] += gen_pink_noise(n_samples, spec.noise_sigma, rng, n_channels=len(spec.channel_labels))
    return EpochSet(
        data=data, sampling_rate=fs, paradigm=paradigm, class_label=class_label, condition=condition,
        window=EpochWindow(start_offset_s=0.0, duration_s=n_samples / fs), channel_labels=spec.channel_labels)


def assemble_recording(epoch_sets: Sequence[EpochSet]) -> Recording:
    """Lays the trials of every epoch set back to back, one Stimulus marker at the first sample of each trial."""
    if not epoch_sets:
        raise ValueError("cannot assemble a recording from no epoch sets.")
    first = epoch_sets[0]
    for epochs in epoch_sets:
        if epochs.channel_labels != first.channel_labels or epochs.sampling_rate != first.sampling_rate:
            raise ValueError(f"{epochs} does not share the channels and sampling rate of {first}.")
    trials = []
    markers = []
    position = 0
    for epochs in epoch_sets:
        description = format_marker_description(epochs.paradigm, epochs.class_label, epochs.condition)
        for trial in epochs.data:
            markers.append(Marker(sample=position, kind=STIMULUS, description=description))
            trials.append(trial)
            position += trial.shape[1]
    return Recording(
        channel_labels=first.channel_labels, sampling_rate=first.sampling_rate,
        data=np.concatenate(trials, axis=1), markers=markers)


@dataclass(frozen=True)
class ConditionCoupling:
    """
    Coupling of one condition: explicit channel pairs, or a hub every other channel locks onto with the kappa of
    its region (region_kappas) or the default kappa.
    """
    pairs: Tuple[ChannelCoupling, ...] = ()
    hub: Optional[str] = None
    kappa: float = 0.0
    region_kappas: Tuple[Tuple[str, float], ...] = ()

    def couplings(self, montage: Montage, scale: float = 1.0) -> Tuple[ChannelCoupling, ...]:
        """Couplings over the montage's channels, every kappa multiplied by scale."""
        if self.hub is None:
            return tuple(ChannelCoupling(pair.source, pair.target, pair.kappa * scale) for pair in self.pairs)
        kappas = dict(self.region_kappas)
        return tuple(
            ChannelCoupling(self.hub, label, kappas.get(montage.region_of(label), self.kappa) * scale)
            for label in montage.channel_labels if label != self.hub)

    def problems(self, montage: Montage) -> List[str]:
        found = []
        if self.hub is not None and self.pairs:
            found.append("a coupling section holds either pairs or a hub, not both.")
        if self.hub is not None and self.hub not in montage.channel_labels:
            found.append(f"the coupling hub '{self.hub}' is not a simulated channel.")
        for region, kappa in self.region_kappas:
            if region not in REGIONS:
                found.append(f"kappa.{region} names an unknown region, expected one of {REGIONS}.")
            if not kappa >= 0:
                found.append(f"kappa.{region} must not be negative, got {kappa:g}.")
        if not self.kappa >= 0:
            found.append(f"kappa must not be negative, got {self.kappa:g}.")
        return found


@dataclass(frozen=True)
class SimulationSpec:
    """A whole synthetic study: subjects x paradigms, each holding every class of the task and rest conditions."""
    montage: Montage
    seed: int = 0
    sampling_rate: float = 250.0
    n_trials: int = 50
    duration_s: float = 2.0
    carrier_hz: float = 10.0
    amplitude_uv: float = 10.0
    noise_sigma: float = 0.0
    trial_jitter: bool = False
    jitter_hz: float = 0.5
    output_format: str = 'brainvision'
    binary_format: str = 'IEEE_FLOAT_32'
    resolution: Optional[float] = None
    subjects: Tuple[str, ...] = ('S1',)
    paradigms: Tuple[str, ...] = (IMAGINED_SPEECH,)
    classes: Tuple[str, ...] = CLASS_LABELS
    subject_kappa_sd: float = 0.0
    task: ConditionCoupling = field(default_factory=ConditionCoupling)
    rest: Optional[ConditionCoupling] = None
    include_rest: bool = False
    write_config: bool = False
    montage_source: str = 'default'

    @property
    def channel_labels(self) -> Tuple[str, ...]:
        return self.montage.channel_labels

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sampling_rate))

    @property
    def conditions(self) -> Tuple[str, ...]:
        return (TASK, REST) if self.rest is not None or self.include_rest else (TASK,)

    @property
    def writes_brainvision(self) -> bool:
        return self.output_format in ('brainvision', 'both')

    @property
    def writes_csv(self) -> bool:
        return self.output_format in ('csv', 'both')

    def problems(self) -> List[str]:
        found = []
        if not self.sampling_rate > 0:
            found.append(f"sampling_rate must be positive, got {self.sampling_rate:g}.")
        if self.n_trials < 2:
            found.append(f"n_trials must be at least 2, got {self.n_trials}.")
        if self.n_samples < 2:
            found.append(f"duration_s of {self.duration_s:g} s holds fewer than 2 samples.")
        if self.output_format not in OUTPUT_FORMATS:
            found.append(f"format must be one of {OUTPUT_FORMATS}, got '{self.output_format}'.")
        if not self.subjects:
            found.append("at least one subject must be simulated.")
        for paradigm in self.paradigms:
            if paradigm not in PARADIGMS:
                found.append(f"unknown paradigm '{paradigm}', expected one of {PARADIGMS}.")
        if not self.classes:
            found.append("at least one class must be simulated.")
        for class_label in self.classes:
            if class_label not in CLASS_LABELS:
                found.append(f"unknown class '{class_label}', expected one of {CLASS_LABELS}.")
        if not self.subject_kappa_sd >= 0:
            found.append(f"subject_kappa_sd must not be negative, got {self.subject_kappa_sd:g}.")
        found += self.task.problems(self.montage)
        if self.rest is not None:
            found += self.rest.problems(self.montage)
        if self.sampling_rate > 0:
            highest = self.carrier_hz + (self.jitter_hz if self.trial_jitter else 0.0)
            if not self.sampling_rate > 2 * highest:
                found.append(
                    f"a sampling rate of {self.sampling_rate:g} Hz cannot carry a {highest:g} Hz carrier.")
        if not found:
            for condition in self.conditions:
                found += self.coupling_spec(0, 0, condition, self.classes[0] if condition == TASK else REST_LABEL).problems()
        return found

    def unit_labels(self) -> List[Tuple[str, str]]:
        """(class label, condition) of every epoch set in a simulated recording, in recording order."""
        labels = [(class_label, TASK) for class_label in self.classes]
        if REST in self.conditions:
            labels.append((REST_LABEL, REST))
        return labels

    def subject_scale(self, subject_index: int) -> float:
        """Per-subject lognormal factor on every kappa, 1 when subject_kappa_sd is 0."""
        if self.subject_kappa_sd == 0:
            return 1.0
        return float(np.exp(generator(self.seed, SUBJECT_STREAM, subject_index).normal(0.0, self.subject_kappa_sd)))

    def coupling_spec(self, subject_index: int, paradigm_index: int, condition: str, class_label: str) -> CouplingSpec:
        coupling = self.task if condition == TASK else self.rest
        scale = self.subject_scale(subject_index)
        class_index = (CLASS_LABELS + (REST_LABEL,)).index(class_label)
        return CouplingSpec(
            channel_labels=self.channel_labels,
            couplings=coupling.couplings(self.montage, scale) if coupling is not None else (),
            carrier_hz=self.carrier_hz, trial_jitter=self.trial_jitter, jitter_hz=self.jitter_hz,
            noise_sigma=self.noise_sigma, amplitude_uv=self.amplitude_uv,
            seed=derive_seed(self.seed, UNIT_STREAM, subject_index, paradigm_index, class_index))


@dataclass(frozen=True)
class ManifestRow:
    subject: str
    paradigm: str
    class_label: str
    condition: str
    channel_a: str
    channel_b: str
    kappa: float
    expected_plv: float


@dataclass
class SimulatedUnit:
    """Everything simulated for one subject and paradigm."""
    subject: str
    paradigm: str
    epoch_sets: List[EpochSet]
    manifest: List[ManifestRow]

    def recording(self) -> Recording:
        return assemble_recording(self.epoch_sets)


def simulate_unit(simulation: SimulationSpec, subject_index: int, paradigm: str) -> SimulatedUnit:
    """Generates every (class, condition) epoch set of one subject and paradigm. Pure given the simulation seed."""
    subject = simulation.subjects[subject_index]
    paradigm_index = PARADIGMS.index(paradigm)
    epoch_sets = []
    manifest = []
    for class_label, condition in simulation.unit_labels():
        spec = simulation.coupling_spec(subject_index, paradigm_index, condition, class_label)
        epoch_sets.append(gen_coupled_epochs(
            spec, n_trials=simulation.n_trials, n_samples=simulation.n_samples, fs=simulation.sampling_rate,
            paradigm=paradigm, class_label=class_label, condition=condition))
        manifest += [
            ManifestRow(
                subject=subject, paradigm=paradigm, class_label=class_label, condition=condition,
                channel_a=coupling.source, channel_b=coupling.target, kappa=coupling.kappa,
                expected_plv=expected_plv(coupling.kappa))
            for coupling in spec.couplings]
    return SimulatedUnit(subject=subject, paradigm=paradigm, epoch_sets=epoch_sets, manifest=manifest)
