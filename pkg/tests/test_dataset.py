import json

import numpy as np
import pytest

from prosoforge.dataset import (
    Chunk,
    Manifest,
    ManifestEntry,
    StyleRule,
    ingest,
    load_style_rules,
    reassemble,
    segment,
)
from prosoforge.errors import FormatError, ValidationError
from prosoforge.signal_core import AudioBuffer, write_wav

from synth import SR, concat, silence, tone


@pytest.fixture
def corpus_dir(tmp_path):
    root = tmp_path / "corpus"
    (root / "alice").mkdir(parents=True)
    (root / "bob" / "conv").mkdir(parents=True)
    write_wav(tone(200.0, 1.0), root / "alice" / "take.wav")
    (root / "alice" / "take.txt").write_text("hello there\n")
    write_wav(tone(150.0, 0.5, sr=22050), root / "bob" / "conv" / "take.wav")
    (root / "notes.md").write_text("not audio")
    return root


class TestIngest:
    def test_entries_and_skips(self, corpus_dir):
        m = ingest(corpus_dir)
        # notes.md and the transcript are both non-WAV files
        assert len(m) == 2 and m.skipped == 2
        a, b = m.entries
        assert (a.id, a.path, a.speaker, a.text) == ("alice/take", "alice/take.wav", "alice", "hello there")
        assert a.duration_s == 1.0 and a.sample_rate_hz == 16000
        assert (b.id, b.speaker, b.sample_rate_hz) == ("bob/conv/take", "bob", 22050)
        assert b.duration_s == pytest.approx(0.5, abs=1e-3)

    def test_two_wavs_one_txt(self, tmp_path):
        write_wav(tone(200.0, 1.0), tmp_path / "a.wav")
        write_wav(tone(200.0, 0.25), tmp_path / "b.wav")
        (tmp_path / "readme.txt").write_text("x")
        m = ingest(tmp_path)
        assert len(m) == 2 and m.skipped == 1
        assert m.entries[0].duration_s == 1.000 and m.entries[0].speaker == ""

    def test_style_rules_first_match(self, corpus_dir):
        rules = [StyleRule("bob/conv/*", "conversational"), StyleRule("*", "read")]
        styles = [e.style for e in ingest(corpus_dir, rules).entries]
        assert styles == ["read", "conversational"]
        assert [e.style for e in ingest(corpus_dir).entries] == ["unknown", "unknown"]

    def test_idempotent(self, corpus_dir):
        assert ingest(corpus_dir).to_jsonl() == ingest(corpus_dir).to_jsonl()

    def test_missing_root(self, tmp_path):
        with pytest.raises(OSError):
            ingest(tmp_path / "absent")

    def test_style_rules_file(self, tmp_path):
        p = tmp_path / "rules.json"
        p.write_text(json.dumps([{"glob": "*.wav", "style": "read"}]))
        assert load_style_rules(p) == [StyleRule("*.wav", "read")]
        p.write_text(json.dumps([{"glob": "*.wav", "style": "shouting"}]))
        with pytest.raises(ValidationError):
            load_style_rules(p)


class TestManifest:
    def test_jsonl_round_trip(self, corpus_dir, tmp_path):
        m = ingest(corpus_dir)
        m.save(tmp_path / "m.jsonl")
        back = Manifest.load(tmp_path / "m.jsonl")
        assert back.entries == m.entries
        assert (tmp_path / "m.jsonl").read_text() == back.to_jsonl()
        first = json.loads((tmp_path / "m.jsonl").read_text().splitlines()[0])
        assert list(first) == ["id", "path", "speaker", "text", "style", "duration_s", "sample_rate_hz"]

    def test_duplicate_ids(self):
        e = ManifestEntry("a", "a.wav", "", "", "read", 1.0, SR)
        with pytest.raises(ValidationError):
            Manifest([e, e])

    def test_bad_line(self, tmp_path):
        p = tmp_path / "m.jsonl"
        p.write_text('{"id": "a"}\n')
        with pytest.raises(FormatError):
            Manifest.load(p)


class TestSegment:
    def test_ten_seconds_three_chunks(self):
        buf = AudioBuffer(np.random.default_rng(0).uniform(-0.5, 0.5, 10 * SR), SR)
        chunks = segment(buf, 4.0)
        assert len(chunks) == 3
        assert all(len(c.audio) <= 4 * SR for c in chunks)
        assert chunks[0].offset == 0
        assert all(a.offset + len(a.audio) == b.offset for a, b in zip(chunks, chunks[1:]))
        assert chunks[-1].offset + len(chunks[-1].audio) == len(buf)

    def test_short_input_single_chunk(self):
        buf = tone(200.0, 2.0)
        (chunk,) = segment(buf, 4.0)
        assert chunk.offset == 0 and np.array_equal(chunk.audio.samples, buf.samples)

    def test_cut_in_silence(self):
        buf = concat(tone(200.0, 1.0), silence(0.4), tone(200.0, 1.0))
        chunks = segment(buf, 1.5)
        assert len(chunks) == 2
        assert SR <= chunks[1].offset <= 1.4 * SR

    @pytest.mark.parametrize("seconds,max_len", [(10.0, 4.0), (7.3, 1.0), (2.6, 2.5)])
    def test_lossless(self, seconds, max_len):
        buf = AudioBuffer(np.random.default_rng(1).standard_normal(int(seconds * SR)) * 0.1, SR)
        chunks = segment(buf, max_len)
        assert all(len(c.audio) <= int(max_len * SR) for c in chunks)
        assert reassemble(chunks, len(buf)).tobytes() == buf.samples.tobytes()

    def test_min_length(self):
        with pytest.raises(ValidationError):
            segment(tone(200.0, 1.0), 0.4)

    def test_reassemble_offsets(self):
        chunks = [Chunk(0, AudioBuffer(np.ones(3), SR)), Chunk(3, AudioBuffer(2 * np.ones(2), SR))]
        assert reassemble(chunks, 5).tolist() == [1, 1, 1, 2, 2]
