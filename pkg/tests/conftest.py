import time
from pathlib import Path

import numpy as np
import pytest

from cvfscreen.signal_io import AudioSignal

FS = 16000


def tone(freq, seconds, fs=FS, amp=0.5, phase=0.0):
    t = np.arange(int(round(seconds * fs))) / fs
    return amp * np.sin(2 * np.pi * freq * t + phase)


def harmonic(f0, seconds, fs=FS, amp=0.5, n_harm=4):
    t = np.arange(int(round(seconds * fs))) / fs
    x = sum((0.6 ** h) * np.sin(2 * np.pi * (h + 1) * f0 * t) for h in range(n_harm))
    return amp * x / np.max(np.abs(x))


def signal(x, fs=FS, name="test"):
    return AudioSignal(np.asarray(x, dtype=float), fs, name)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_SPEC = Path(__file__).parent / "data" / "acceptance_synth.json"
ACCEPTANCE_SEED = 0


@pytest.fixture(scope="session")
def acceptance_corpus(tmp_path_factory):
    """The 50+50 acceptance corpus, synthesized and extracted once per session."""
    from cvfscreen.corpus import SynthSpec, ingest_manifest, synth_corpus
    from cvfscreen.pipeline import extract_all

    out = tmp_path_factory.mktemp("acceptance")
    t0 = time.perf_counter()
    manifest = synth_corpus(SynthSpec.load(ACCEPTANCE_SPEC), ACCEPTANCE_SEED, out)
    corpus = ingest_manifest(manifest)
    t1 = time.perf_counter()
    fm = extract_all(corpus)
    t2 = time.perf_counter()
    return {"dir": out, "manifest": manifest, "corpus": corpus, "matrix": fm,
            "synth_s": t1 - t0, "extract_s": t2 - t1}


# -- acceptance summary ------------------------------------------------------

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


def pytest_runtest_logreport(report):
    number = getattr(report, "criterion", None)
    if number is None:
        return
    entry = _criteria.setdefault(number, {"title": report.criterion_title, "ok": True, "ran": False})
    if report.when == "call":
        entry["ran"] = True
    if report.failed:
        entry["ok"] = False


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        rep.criterion, rep.criterion_title = marker.args[0], marker.args[1]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        status = "PASS" if e["ok"] and e["ran"] else ("FAIL" if not e["ok"] else "NOT RUN")
        terminalreporter.write_line(f"criterion {number}: {status}  {e['title']}")
