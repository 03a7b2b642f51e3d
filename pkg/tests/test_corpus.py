import json

import numpy as np
import pytest

from cvfscreen.corpus import (ClassSpec, ManifestError, SynthSpec, ingest_manifest, synth_corpus,
                              synth_recording, write_manifest)
from cvfscreen.signal_io import AudioSignal, load_wav
from cvfscreen.vad import VOICED, segment_voicing

from conftest import FS, signal, tone


@pytest.fixture
def two_files(tmp_path):
    from cvfscreen.signal_io import write_wav
    for n in ("a.wav", "b.wav"):
        write_wav(tmp_path / n, signal(tone(200, 0.5)))
    return tmp_path


def _manifest(dirpath, body):
    p = dirpath / "m.csv"
    p.write_text("path,label,subject_id\n" + body)
    return p


def test_two_line_manifest(two_files):
    c = ingest_manifest(_manifest(two_files, "a.wav,CR,s1\nb.wav,MCI,s2\n"))
    assert c.counts == {"CR": 1, "MCI": 1}
    assert c.entries[0].path == two_files / "a.wav"


def test_unknown_label_names_line_and_allowed_set(two_files):
    with pytest.raises(ManifestError, match=r"m\.csv:3: unknown label 'AD'.*CR, MCI"):
        ingest_manifest(_manifest(two_files, "a.wav,CR,s1\nb.wav,AD,s2\n"))


def test_manifest_errors(two_files, tmp_path):
    with pytest.raises(ManifestError, match="header"):
        (tmp_path / "h.csv").write_text("file,label\n")
        ingest_manifest(tmp_path / "h.csv")
    with pytest.raises(ManifestError, match="duplicate"):
        ingest_manifest(_manifest(two_files, "a.wav,CR,s1\na.wav,MCI,s2\n"))
    with pytest.raises(ManifestError, match="3 fields"):
        ingest_manifest(_manifest(two_files, "a.wav,CR\n"))
    with pytest.raises(ManifestError, match="MCI has no entries"):
        ingest_manifest(_manifest(two_files, "a.wav,CR,s1\n"))
    with pytest.raises(FileNotFoundError, match=":2: audio file not found"):
        ingest_manifest(_manifest(two_files, "zz.wav,CR,s1\nb.wav,MCI,s2\n"))
    with pytest.raises(FileNotFoundError):
        ingest_manifest(tmp_path / "missing.csv")


def test_write_manifest_round_trip(two_files):
    write_manifest(two_files / "w.csv", [("a.wav", "CR", "x"), ("b.wav", "MCI", "y")])
    c = ingest_manifest(two_files / "w.csv")
    assert [e.subject_id for e in c.entries] == ["x", "y"]


def test_synth_counts_and_determinism(tmp_path):
    spec = SynthSpec.from_dict({"duration_s": 3, "classes": {"CR": {"count": 4}, "MCI": {"count": 6}}})
    m1 = synth_corpus(spec, 5, tmp_path / "one")
    m2 = synth_corpus(spec, 5, tmp_path / "two")
    assert ingest_manifest(m1).counts == {"CR": 4, "MCI": 6}
    for f in sorted((tmp_path / "one").iterdir()):
        assert f.read_bytes() == (tmp_path / "two" / f.name).read_bytes()
    m3 = synth_corpus(spec, 6, tmp_path / "three")
    assert (tmp_path / "one" / "cr_000.wav").read_bytes() != (tmp_path / "three" / "cr_000.wav").read_bytes()


def test_hundred_entry_manifest(tmp_path):
    spec = SynthSpec.from_dict({"duration_s": 1, "classes": {"CR": {"count": 50, "burst_rate": 60},
                                                             "MCI": {"count": 50, "burst_rate": 60}}})
    c = ingest_manifest(synth_corpus(spec, 0, tmp_path))
    assert len(c) == 100 and c.counts == {"CR": 50, "MCI": 50}


def test_single_burst_one_voiced_segment():
    spec = SynthSpec.from_dict({"duration_s": 4, "classes": {
        "CR": {"count": 1, "fixed_bursts": 1, "noise_floor": 0.0, "breathiness": 0.0}}})
    for seed in range(5):
        x = synth_recording(spec.classes["CR"], spec, np.random.default_rng(seed))
        kinds = segment_voicing(AudioSignal(x, FS)).kinds()
        assert kinds.count(VOICED) == 1


@pytest.mark.slow
def test_burst_rates_are_recovered(tmp_path):
    spec = SynthSpec.from_dict({"duration_s": 30, "classes": {
        "CR": {"count": 50, "burst_rate": 22}, "MCI": {"count": 50, "burst_rate": 12}}})
    c = ingest_manifest(synth_corpus(spec, 1, tmp_path))
    counts = {"CR": [], "MCI": []}
    for e in c.entries:
        seg = segment_voicing(load_wav(e.path))
        counts[e.label].append(seg.kinds().count(VOICED))
    for label, rate in (("CR", 22), ("MCI", 12)):
        expected = rate * 30 / 60
        assert abs(np.mean(counts[label]) - expected) <= 0.10 * expected


def test_spec_json_round_trip(tmp_path):
    spec = SynthSpec.from_dict({"duration_s": 2.5, "classes": {"MCI": {"count": 3, "jitter": 0.02}}})
    p = tmp_path / "s.json"
    p.write_text(json.dumps(spec.to_dict()))
    assert SynthSpec.load(p) == spec


def test_spec_validation():
    with pytest.raises(ValueError):
        SynthSpec.from_dict({"classes": {"AD": {}}})
    with pytest.raises(ValueError):
        SynthSpec.from_dict({"sample_rate": 12345})
    with pytest.raises(TypeError):
        SynthSpec.from_dict({"classes": {"CR": {"bogus": 1}}})
    with pytest.raises(ValueError, match="noise kind"):
        synth_recording(ClassSpec(noise_kind="pink"), SynthSpec(duration_s=1), np.random.default_rng(0))
