import unittest
import tempfile
from pathlib import Path

import numpy as np

from plv.exceptions import DataError
from plv.ingest.brainvision import (
    parse_brainvision_header, parse_brainvision_markers, format_brainvision_header, load_recording,
    write_brainvision, read_header, ParseError, UnsupportedFormatError, TruncationError, MissingFileError,
    EncodingRangeError, UnencodableTextError, decode_samples)
from plv.ingest.recording import Recording, Marker, InvalidRecordingError

HEADER = """Brain Vision Data Exchange Header File Version 1.0
; Data created by a recorder

[Common Infos]
Codepage=UTF-8
DataFile=x.eeg
MarkerFile=x.vmrk
DataFormat=BINARY
DataOrientation=VECTORIZED
NumberOfChannels=2
SamplingInterval=4000

[Binary Infos]
BinaryFormat=INT_16

[Channel Infos]
Ch1=Fp1,,0.5,mV
Ch2=Fp2\\1x,,,

[Comment]
A free text section = not key value
[ unbalanced
"""

MARKERS = """Brain Vision Data Exchange Marker File, Version 1.0

[Common Infos]
Codepage=UTF-8
DataFile=x.eeg

[Marker Infos]
Mk2=Stimulus,imagined_speech/Help me/task,11,1,0
Mk1=New Segment,,1,1,0
Mk3=Comment,a\\1b,20,1,0
"""


def random_recording(rng: np.random.Generator) -> Recording:
    n_channels = int(rng.integers(1, 6))
    n_samples = int(rng.integers(10, 200))
    labels = [f"Ch,{index}" if rng.random() < 0.2 else f"E{index}" for index in range(n_channels)]
    sampling_rate = float(rng.choice([100.0, 250.0, 256.0, 500.0, 1000.0]))
    data = rng.normal(0.0, 20.0, (n_channels, n_samples))
    markers = sorted(
        (Marker(int(rng.integers(0, n_samples)), 'Stimulus', f"imagined_speech/Yes/task,{index}")
         for index in range(int(rng.integers(0, 6)))), key=lambda marker: marker.sample)
    return Recording(labels, sampling_rate, data, markers)


class TestHeader(unittest.TestCase):

    def test_parse(self):
        header = parse_brainvision_header(HEADER)
        self.assertEqual(header.channel_labels, ('Fp1', 'Fp2,x'))
        self.assertEqual(header.resolutions_uv, (500.0, 1.0))
        self.assertEqual(header.orientation, 'VECTORIZED')
        self.assertEqual(header.binary_format, 'INT_16')
        self.assertEqual(header.sampling_rate, 250.0)
        self.assertEqual(header.marker_file, 'x.vmrk')
        self.assertEqual(header.sample_size, 2)

    def test_missing_entry(self):
        with self.assertRaises(ParseError) as context:
            parse_brainvision_header(HEADER.replace("DataFile=x.eeg\n", ""))
        self.assertEqual(context.exception.key, 'DataFile')
        with self.assertRaises(ParseError) as context:
            parse_brainvision_header(HEADER.replace("Ch2=Fp2\\1x,,,\n", ""))
        self.assertEqual(context.exception.key, 'Ch2')

    def test_identification(self):
        with self.assertRaises(ParseError):
            parse_brainvision_header(HEADER.replace("Brain Vision Data Exchange", "EEG"))

    def test_unsupported(self):
        with self.assertRaises(UnsupportedFormatError):
            parse_brainvision_header(HEADER.replace("INT_16", "INT_32"))
        with self.assertRaises(UnsupportedFormatError):
            parse_brainvision_header(HEADER.replace("DataFormat=BINARY", "DataFormat=ASCII"))
        with self.assertRaises(UnsupportedFormatError):
            parse_brainvision_header(HEADER.replace("0.5,mV", "0.5,furlong"))

    def test_corrupted_headers_raise_data_errors(self):
        lines = HEADER.splitlines()
        for index in range(len(lines)):
            corrupted = "\n".join(lines[:index] + lines[index + 1:])
            try:
                parse_brainvision_header(corrupted)
            except DataError:
                pass
        for bad in ("NumberOfChannels=two", "SamplingInterval=-4", "SamplingInterval=abc", "NumberOfChannels=0"):
            key = bad.split('=')[0]
            text = "\n".join(bad if line.startswith(key) else line for line in lines)
            with self.assertRaises(ParseError):
                parse_brainvision_header(text)

    def test_format_is_parsed_back(self):
        header = parse_brainvision_header(HEADER)
        again = parse_brainvision_header(format_brainvision_header(header))
        self.assertEqual(again.channel_labels, header.channel_labels)
        self.assertEqual(again.resolutions_uv, header.resolutions_uv)
        self.assertEqual(format_brainvision_header(again), format_brainvision_header(header))


class TestMarkers(unittest.TestCase):

    def test_parse(self):
        markers = parse_brainvision_markers(MARKERS)
        self.assertEqual(markers, [
            Marker(0, 'New Segment', ''),
            Marker(10, 'Stimulus', 'imagined_speech/Help me/task'),
            Marker(19, 'Comment', 'a,b')])

    def test_invalid_position(self):
        with self.assertRaises(ParseError):
            parse_brainvision_markers(MARKERS.replace(",1,1,0", ",0,1,0"))
        with self.assertRaises(ParseError):
            parse_brainvision_markers(MARKERS.replace(",20,1,0", ",x,1,0"))
        with self.assertRaises(ParseError):
            parse_brainvision_markers(MARKERS.replace("Mk3=Comment,a\\1b,20,1,0", "Mk3=Comment"))

    def test_no_markers(self):
        self.assertEqual(parse_brainvision_markers(MARKERS.split("[Marker Infos]")[0]), [])


class TestRecordingFiles(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def test_float_round_trip(self):
        data = np.arange(12, dtype=np.float64).reshape(3, 4) * 0.5 - 2.0
        markers = [Marker(0, 'Stimulus', 'imagined_speech/Help me/task'), Marker(3, 'Comment', 'a,b')]
        recording = Recording(['Fp1', 'C,3', 'Oz'], 500.0, data, markers)
        write_brainvision(recording, self.path / 'S1_imagined_speech.vhdr')
        for suffix in ('.vhdr', '.vmrk', '.eeg'):
            self.assertTrue((self.path / f"S1_imagined_speech{suffix}").is_file())
        self.assertIn("Ch2=C\\13,,1,µV", (self.path / 'S1_imagined_speech.vhdr').read_text(encoding='utf-8'))
        self.assertIn("Mk2=Comment,a\\1b,4,1,0", (self.path / 'S1_imagined_speech.vmrk').read_text(encoding='utf-8'))
        loaded = load_recording(self.path / 'S1_imagined_speech.vhdr')
        self.assertEqual(loaded.channel_labels, ('Fp1', 'C,3', 'Oz'))
        self.assertEqual(loaded.sampling_rate, 500.0)
        self.assertEqual(list(loaded.markers), markers)
        np.testing.assert_array_equal(loaded.data, data)

    def test_int16_round_trip(self):
        data = np.array([[12.3, -0.4, 3276.7], [0.0, 1.1, -3276.8]])
        recording = Recording(['Fz', 'Cz'], 250.0, data)
        header = write_brainvision(recording, self.path / 'r.vhdr', binary_format='INT_16', resolution=0.1)
        self.assertEqual(header.binary_format, 'INT_16')
        self.assertEqual((self.path / 'r.eeg').stat().st_size, data.size * 2)
        np.testing.assert_allclose(load_recording(self.path / 'r.vhdr').data, data, atol=1e-9)

    def test_int16_range(self):
        recording = Recording(['Fz'], 250.0, np.array([[5000.0, 0.0]]))
        with self.assertRaises(EncodingRangeError):
            write_brainvision(recording, self.path / 'r.vhdr', binary_format='INT_16', resolution=0.1)

    def test_vectorized_and_multiplexed(self):
        header = parse_brainvision_header(HEADER)
        # two channels of three INT_16 samples, stored channel after channel
        (self.path / 'x.eeg').write_bytes(np.array([1, 2, 3, 4, 5, 6], dtype='<i2').tobytes())
        (self.path / 'x.vmrk').write_text(MARKERS, encoding='utf-8')
        (self.path / 'x.vhdr').write_text(HEADER, encoding='utf-8')
        with self.assertRaises(InvalidRecordingError):
            # the marker at sample 19 lies outside three samples
            load_recording(self.path / 'x.vhdr')
        (self.path / 'x.vmrk').write_text(MARKERS.split("[Marker Infos]")[0], encoding='utf-8')
        recording = load_recording(self.path / 'x.vhdr')
        np.testing.assert_allclose(recording.data, [[500.0, 1000.0, 1500.0], [4.0, 5.0, 6.0]])
        self.assertEqual(read_header(self.path / 'x.vhdr'), header)
        multiplexed = HEADER.replace("VECTORIZED", "MULTIPLEXED")
        (self.path / 'x.vhdr').write_text(multiplexed, encoding='utf-8')
        np.testing.assert_allclose(load_recording(self.path / 'x.vhdr').data, [[500.0, 1500.0, 2500.0], [2.0, 4.0, 6.0]])

    def test_truncated_data(self):
        recording = Recording(['Fz', 'Cz'], 250.0, np.zeros((2, 10)))
        write_brainvision(recording, self.path / 'r.vhdr')
        payload = (self.path / 'r.eeg').read_bytes()
        (self.path / 'r.eeg').write_bytes(payload[:-1])
        with self.assertRaises(TruncationError):
            load_recording(self.path / 'r.vhdr')

    def test_missing_files(self):
        with self.assertRaises(MissingFileError):
            load_recording(self.path / 'absent.vhdr')
        write_brainvision(Recording(['Fz'], 250.0, np.zeros((1, 10))), self.path / 'r.vhdr')
        (self.path / 'r.eeg').unlink()
        with self.assertRaises(MissingFileError):
            load_recording(self.path / 'r.vhdr')

    def test_write_parse_write_is_a_fixed_point(self):
        rng = np.random.default_rng(20)
        for trial in range(20):
            recording = random_recording(rng)
            binary_format = 'INT_16' if trial % 2 else 'IEEE_FLOAT_32'
            first, second = self.path / f"first{trial}", self.path / f"second{trial}"
            write_brainvision(recording, first / 'r.vhdr', binary_format=binary_format)
            write_brainvision(load_recording(first / 'r.vhdr'), second / 'r.vhdr')
            for name in ('r.vhdr', 'r.vmrk', 'r.eeg'):
                self.assertEqual((first / name).read_bytes(), (second / name).read_bytes(), f"{name} of recording {trial}")

    def test_text_that_would_not_read_back_is_refused(self):
        data = np.zeros((1, 10))
        for labels, markers in (
                (['Fz '], []), ([''], []), (['F\\1z'], []), (['F\nz'], []),
                (['Fz'], [Marker(0, ' Stimulus', 'imagined_speech/Yes/task')]),
                (['Fz'], [Marker(0, 'Stimulus', 'imagined_speech/Yes/task ')]),
                (['Fz'], [Marker(0, 'Stimulus', 'a\nb')]),
                (['Fz'], [Marker(0, 'Stimulus', 'a\rb')])):
            with self.assertRaises(UnencodableTextError, msg=repr((labels, markers))):
                write_brainvision(Recording(labels, 250.0, data, markers), self.path / 'bad' / 'r.vhdr')
        self.assertFalse((self.path / 'bad').exists())
        self.assertTrue(issubclass(UnencodableTextError, DataError))

    def test_inner_spaces_and_commas_read_back(self):
        markers = [Marker(2, 'Stimulus', 'visual_imagery/Thank you/task'), Marker(5, 'Comment', '')]
        recording = Recording(['F 3', 'C,z'], 250.0, np.zeros((2, 10)), markers)
        write_brainvision(recording, self.path / 'r.vhdr')
        loaded = load_recording(self.path / 'r.vhdr')
        self.assertEqual(loaded.channel_labels, ('F 3', 'C,z'))
        self.assertEqual(list(loaded.markers), markers)

    def test_int16_decoding_is_linear(self):
        header = parse_brainvision_header(HEADER)
        rng = np.random.default_rng(4)
        a, b = rng.integers(-8000, 8000, (2, 6)).astype('<i2')

        def decode(counts: np.ndarray) -> np.ndarray:
            return decode_samples(counts.astype('<i2').tobytes(), header)

        np.testing.assert_array_equal(decode(a + b), decode(a) + decode(b))
        np.testing.assert_array_equal(decode(3 * a), 3 * decode(a))
        np.testing.assert_array_equal(decode(np.zeros(6)), np.zeros((2, 3)))
