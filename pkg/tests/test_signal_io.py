import numpy as np
import pytest
from scipy.io import wavfile

from cvfscreen.signal_io import (AudioError, AudioSignal, SignalTooShort, frame, frame_count,
                                 hamming, load_wav, ms_to_samples, write_wav)

from conftest import FS, signal, tone


def test_pcm16_roundtrip_is_scaled_and_dc_free(tmp_path):
    x = tone(200, 0.5) + 0.1
    pcm = np.round(x * 32767).astype(np.int16)
    wavfile.write(tmp_path / "a.wav", FS, pcm)
    s = load_wav(tmp_path / "a.wav")
    assert s.sample_rate == FS and s.source_id == "a.wav"
    assert abs(s.samples.mean()) < 1e-12
    ref = pcm / 32768.0
    np.testing.assert_allclose(s.samples, ref - ref.mean(), atol=1e-12)


def test_stereo_is_averaged(tmp_path):
    left = tone(200, 0.2)
    right = -left
    data = np.stack([left, right], axis=1).astype(np.float32)
    wavfile.write(tmp_path / "st.wav", FS, data)
    s = load_wav(tmp_path / "st.wav")
    assert np.max(np.abs(s.samples)) < 1e-6


def test_float32_is_clipped(tmp_path):
    x = np.concatenate([np.full(100, 2.0), np.full(100, -2.0)]).astype(np.float32)
    wavfile.write(tmp_path / "f.wav", FS, x)
    s = load_wav(tmp_path / "f.wav")
    assert np.max(np.abs(s.samples)) <= 1.0


def test_write_then_load(tmp_path):
    x = tone(300, 0.3)
    write_wav(tmp_path / "w.wav", signal(x))
    s = load_wav(tmp_path / "w.wav")
    np.testing.assert_allclose(s.samples, x - x.mean(), atol=2e-4)


@pytest.mark.parametrize("rate", [11025, 12000])
def test_unsupported_rate_rejected(tmp_path, rate):
    wavfile.write(tmp_path / "r.wav", rate, np.zeros(1000, dtype=np.int16))
    with pytest.raises(AudioError, match="sample rate"):
        load_wav(tmp_path / "r.wav")


def test_unsupported_encoding_rejected(tmp_path):
    wavfile.write(tmp_path / "i32.wav", FS, np.zeros(1000, dtype=np.int32))
    with pytest.raises(AudioError, match="encoding"):
        load_wav(tmp_path / "i32.wav")


def test_missing_and_corrupt_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_wav(tmp_path / "nope.wav")
    (tmp_path / "bad.wav").write_bytes(b"not a wav file at all")
    with pytest.raises(AudioError):
        load_wav(tmp_path / "bad.wav")


def test_signal_validation():
    with pytest.raises(AudioError):
        AudioSignal(np.array([]), FS)
    with pytest.raises(AudioError):
        AudioSignal(np.array([0.0, np.nan]), FS)
    with pytest.raises(AudioError):
        AudioSignal(np.zeros(10), 12345)
    assert AudioSignal(np.zeros(FS), FS).duration == 1.0


def test_hamming_matches_numpy():
    for n in (1, 2, 7, 400):
        np.testing.assert_allclose(hamming(n), np.hamming(n), atol=1e-15)


def test_frame_geometry():
    s = signal(np.arange(16000, dtype=float))
    fs = frame(s, 25, 10, "rectangular")
    assert fs.frame_len == 400 and fs.hop == 160
    assert fs.frame_count == (16000 - 400) // 160 + 1 == frame_count(16000, 400, 160)
    np.testing.assert_array_equal(fs.frames[3], np.arange(480, 880))
    w = frame(s, 25, 10, "hamming")
    np.testing.assert_allclose(w.frames[3], np.arange(480, 880) * np.hamming(400))


def test_too_short_reports_required_length():
    with pytest.raises(SignalTooShort) as exc:
        frame(signal(np.zeros(100)), 25, 10)
    assert exc.value.required == ms_to_samples(25, FS) == 400


def test_frame_argument_validation():
    s = signal(np.zeros(1000))
    with pytest.raises(ValueError):
        frame(s, 10, 25)
    with pytest.raises(ValueError):
        frame(s, 25, 10, "hann")


def test_constant_pcm_becomes_zero(tmp_path):
    wavfile.write(tmp_path / "c.wav", FS, np.full(1000, 16384, dtype=np.int16))
    s = load_wav(tmp_path / "c.wav")
    np.testing.assert_allclose(s.samples, 0.0, atol=1e-12)


def test_opposite_stereo_channels_cancel(tmp_path):
    data = np.tile([[0.5, -0.5]], (1000, 1)).astype(np.float32)
    wavfile.write(tmp_path / "pm.wav", FS, data)
    np.testing.assert_array_equal(load_wav(tmp_path / "pm.wav").samples, 0.0)


def test_scripted_tone_survives_loading(tmp_path):
    t = np.arange(FS) / FS
    ref = 0.5 * np.sin(2 * np.pi * 200 * t)
    wavfile.write(tmp_path / "t.wav", FS, ref.astype(np.float32))
    s = load_wav(tmp_path / "t.wav")
    assert len(s) == 16000
    assert abs(np.max(s.samples) - 0.5) < 1e-3 and abs(s.samples.mean()) < 1e-12
    np.testing.assert_allclose(s.samples, ref, atol=1e-6)


def test_frame_count_example():
    fs = frame(signal(np.zeros(16000)), 25, 10)
    assert (fs.frame_len, fs.hop, fs.frame_count) == (400, 160, 98)


def test_rectangular_partition_reconstructs():
    x = np.random.default_rng(3).standard_normal(16123)
    fs = frame(signal(x), 25, 25, "rectangular")
    n = fs.frame_count * fs.frame_len
    np.testing.assert_array_equal(fs.frames.ravel(), x[:n])


def test_one_sample_short():
    with pytest.raises(SignalTooShort):
        frame(signal(np.zeros(399)), 25, 10)
    assert frame(signal(np.zeros(400)), 25, 10).frame_count == 1


def test_hamming_endpoints():
    w = hamming(400)
    assert abs(w[0] - 0.08) < 1e-12 and abs(w[-1] - 0.08) < 1e-12


def test_loading_is_deterministic(tmp_path):
    write_wav(tmp_path / "d.wav", signal(tone(250, 0.2)))
    a, b = load_wav(tmp_path / "d.wav"), load_wav(tmp_path / "d.wav")
    assert a.samples.tobytes() == b.samples.tobytes()
