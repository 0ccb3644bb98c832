"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""

import json
import math

import numpy as np

from prosoforge.dataset import Manifest, ingest, reassemble, segment
from prosoforge.melspec import LOG_FLOOR, MfccMatrix, build_mel_filterbank, mel_spectrogram
from prosoforge.metrics import MetricReport, Rating, RatingsTable, evaluate_pair, mcd, mos_aggregate, pcd, rmse
from prosoforge.prosody import (
    PRESETS,
    PitchContour,
    ProsodyProfile,
    convert,
    detect_segments,
    shift_pitch,
    time_stretch,
    track_pitch,
    transform_contour,
)
from prosoforge.render import mel_to_pgm_bytes
from prosoforge.signal_core import AudioBuffer, FrameSpec, istft, stft, write_wav
from prosoforge.tensorfile import read_tensor, write_tensor
from prosoforge.vocoder import (
    TOY_GENERATOR,
    DiscriminatorConfig,
    GeneratorConfig,
    WeightStore,
    discriminator_forward,
    gan_losses,
    generator_forward,
    griffin_lim,
    init_weights,
    spsa_step,
    spsa_train,
)
from prosoforge.vocoder.models import POST_KERNEL, PRE_KERNEL

from synth import SR, corpus, harmonic_fixture, semitone_std, silence, tone, tone_pause_tone, vibrato_fixture


def _judge(acceptance, number, title, checks):
    """Evaluate ``checks`` (label -> zero-arg callable returning bool) and record the verdict."""
    failed = []
    for label, check in checks.items():
        try:
            ok = bool(check())
        except Exception as exc:  # a crash is a failed check, reported by name
            ok = False
            label = f"{label}: {type(exc).__name__}: {exc}"
        if not ok:
            failed.append(label)
    acceptance(number, title, not failed, "failed: " + "; ".join(failed) if failed else f"{len(checks)} checks")
    assert not failed, failed


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_01_metric_golden_values(acceptance):
    unit = 10 * math.log(10) / math.sqrt(2)
    two = np.zeros((2, 2))
    two_off = two.copy()
    two_off[0, 0] = two_off[1, 1] = 1.0
    checks = {
        "mcd identical = 0": lambda: mcd(MfccMatrix(np.ones((3, 4))), MfccMatrix(np.ones((3, 4)))) == 0.0,
        "mcd T=1 K=1 = 16.2818": lambda: _rel(mcd(MfccMatrix(np.zeros((1, 1))), MfccMatrix(np.ones((1, 1)))), unit) <= 1e-9
        and abs(unit - 16.2818) < 1e-4,
        "mcd T=2 = 23.0259": lambda: _rel(mcd(MfccMatrix(two), MfccMatrix(two_off)), 10 * math.log(10)) <= 1e-9,
        "pcd = 25": lambda: pcd(PitchContour.from_f0([100.0, 110.0], 0.016), PitchContour.from_f0([105.0, 105.0], 0.016))[0] == 25.0,
        "rmse = 2.5": lambda: rmse(AudioBuffer(np.zeros(4), SR), AudioBuffer(np.array([3.0, 4.0, 0.0, 0.0]), SR)) == 2.5,
        "mos [3,4,5] = 4.0": lambda: mos_aggregate(RatingsTable([Rating(str(i), "s", v) for i, v in enumerate([3, 4, 5])])).mos == 4.0,
    }
    _judge(acceptance, 1, "metric golden values", checks)


def test_02_self_evaluation(acceptance, tmp_path):
    def check(name, buf):
        p = tmp_path / f"{name}.wav"
        write_wav(buf, p)
        rep = evaluate_pair(p, p)
        return rep.mcd == 0.0 and rep.pcd == 0.0 and rep.rmse == 0.0

    checks = {name: (lambda n=name, b=buf: check(n, b)) for name, buf in sorted(corpus().items())}
    _judge(acceptance, 2, "self-evaluation is all zeros", checks)


def test_03_stft_round_trip(acceptance):
    spec = FrameSpec(1024, 256, "hann_periodic")

    def check(seed):
        x = np.random.default_rng(seed).uniform(-1, 1, SR)
        y = istft(stft(x, spec), spec).samples
        return np.max(np.abs(y - x[: len(y)])) < 1e-6

    _judge(acceptance, 3, "STFT/ISTFT round trip", {f"seed {s}": (lambda s=s: check(s)) for s in range(10)})


def test_04_mel_correctness(acceptance):
    bank, spec = build_mel_filterbank(), FrameSpec()
    top = 2595 * math.log10(1 + 8000 / 700)
    centres = np.array([700 * (10 ** (top * (m + 1) / 81 / 2595) - 1) for m in range(80)])
    expected = int(np.argmin(np.abs(centres - 1000.0)))
    t = np.arange(SR) / SR
    tone_mel = mel_spectrogram(AudioBuffer(0.5 * np.cos(2 * np.pi * 1000 * t), SR), spec, bank).values
    x = tone(440.0, 0.5)
    a = mel_spectrogram(x, spec, bank).values
    b = mel_spectrogram(x.with_samples(2 * x.samples), spec, bank).values
    above = (a > np.log(LOG_FLOOR)) & (b > np.log(LOG_FLOOR))
    checks = {
        "1 kHz in expected band every frame": lambda: np.all(np.argmax(tone_mel, axis=1) == expected),
        "silence floor = ln(1e-5)": lambda: np.all(mel_spectrogram(silence(0.5), spec, bank).values == np.log(1e-5)),
        "gain shift = ln 2": lambda: above.any() and np.max(np.abs(b[above] - a[above] - np.log(2))) <= 1e-9,
    }
    _judge(acceptance, 4, "mel correctness", checks)


def test_05_pitch_tracker(acceptance):
    c = track_pitch(tone(200.0, 2.0))
    checks = {
        "200 Hz median within 2 Hz": lambda: abs(np.median(c.f0_hz[c.voiced]) - 200.0) <= 2.0,
        ">= 90% voiced": lambda: c.voiced_fraction >= 0.9,
        "silence unvoiced": lambda: not track_pitch(silence(1.0)).voiced.any(),
    }
    _judge(acceptance, 5, "pitch tracker", checks)


def test_06_prosody_contracts(acceptance):
    def shifted():
        c = track_pitch(shift_pitch(tone(150.0, 1.0), 2.0))
        return _rel(np.median(c.f0_hz[c.voiced]), 300.0) <= 0.02

    def stretched():
        buf = tone(220.0, 1.0)
        return _rel(len(time_stretch(buf, 0.5)), 2 * len(buf)) <= 0.01

    def contour():
        c = PitchContour.from_f0([100.0, 400.0], 0.016, f0_range=(20.0, 2000.0))
        out = transform_contour(c, ProsodyProfile(pitch_range_scale=2.0)).f0_hz
        return _rel(out[0], 50.0) <= 1e-9 and _rel(out[1], 800.0) <= 1e-9

    _judge(acceptance, 6, "prosody contracts", {"shift x2": shifted, "stretch 0.5": stretched, "contour [50, 800]": contour})


def test_07_conversion_end_to_end(acceptance):
    def widened():
        buf = vibrato_fixture()
        profile = PRESETS["conversational-expressive"].with_overrides(pitch_range_scale=1.5)
        ratio = semitone_std(track_pitch(convert(buf, profile))) / semitone_std(track_pitch(buf))
        return 1.2 <= ratio <= 1.8

    def pause_doubled():
        def pause_s(x):
            c = track_pitch(x)
            (p,) = detect_segments(c).pauses()
            return p.n_frames * c.hop_s

        buf = tone_pause_tone(0.5)
        return abs(pause_s(convert(buf, ProsodyProfile(pause_scale=2.0))) / pause_s(buf) - 2.0) <= 0.2

    def neutral():
        buf = vibrato_fixture()
        y = convert(buf, PRESETS["neutral"]).samples
        n = min(len(y), len(buf))
        return np.corrcoef(y[:n], buf.samples[:n])[0, 1] > 0.95

    checks = {"range ratio in [1.2, 1.8]": widened, "pause x2 within 10%": pause_doubled, "neutral corr > 0.95": neutral}
    _judge(acceptance, 7, "conversion end to end", checks)


def test_08_griffin_lim(acceptance):
    spec = FrameSpec()
    mag = np.abs(stft(harmonic_fixture(), spec))
    res = griffin_lim(mag, spec, 60)
    zero = griffin_lim(mag, spec, 0).audio.samples
    checks = {
        "SC_final <= SC_initial": lambda: res.sc_final <= res.sc_initial,
        "SC_final < 0.1": lambda: res.sc_final < 0.1,
        "n_iter=0 is zero-phase ISTFT": lambda: zero.tobytes() == istft(mag.astype(complex), spec).samples.tobytes(),
    }
    _judge(acceptance, 8, f"Griffin-Lim (SC {res.sc_initial:.3f} -> {res.sc_final:.3f})", checks)


def _receptive_interval(config, frame, n_frames):
    lo, hi = max(frame - PRE_KERNEL // 2, 0), min(frame + PRE_KERNEL // 2, n_frames - 1)
    length = n_frames
    reach = (config.resblock_kernel - 1) // 2
    for f, k in zip(config.upsample_factors, config.upsample_kernels):
        p = (k - f) // 2
        lo, hi = lo * f - p - sum(config.resblock_dilations) * reach, hi * f - p + k - 1 + sum(config.resblock_dilations) * reach
        length *= f
        lo, hi = max(lo, 0), min(hi, length - 1)
    return max(lo - POST_KERNEL // 2, 0), min(hi + POST_KERNEL // 2, length - 1)


def test_09_generator_invariants(acceptance):
    rng = np.random.default_rng(9)

    def random_config():
        factors = tuple(int(f) for f in rng.integers(2, 6, size=rng.integers(1, 4)))
        kernels = tuple(f + 2 * int(rng.integers(0, 3)) for f in factors)
        return GeneratorConfig(n_mels=int(rng.integers(2, 12)), base_channels=int(rng.choice([2, 4, 8])),
                               upsample_factors=factors, upsample_kernels=kernels)

    def length_check(cfg):
        frames = int(rng.integers(1, 12))
        mel = rng.uniform(-5, 0, (frames, cfg.n_mels))
        return len(generator_forward(mel, cfg, init_weights(cfg, 0))) == frames * cfg.hop

    def zero_weights():
        mel = rng.uniform(-5, 0, (6, TOY_GENERATOR.n_mels))
        return not np.any(generator_forward(mel, TOY_GENERATOR, init_weights(TOY_GENERATOR, 0).zeros_like()).samples)

    def locality():
        cfg = GeneratorConfig(n_mels=4, base_channels=4, upsample_factors=(4, 2), upsample_kernels=(8, 4))
        store = init_weights(cfg, 1)
        mel = rng.uniform(-5, 0, (12, 4))
        ok = True
        for frame in (0, 5, 11):
            bumped = mel.copy()
            bumped[frame] += 1.0
            diff = generator_forward(bumped, cfg, store).samples - generator_forward(mel, cfg, store).samples
            lo, hi = _receptive_interval(cfg, frame, 12)
            ok &= not np.any(diff[:lo]) and not np.any(diff[hi + 1:]) and np.any(diff[lo:hi + 1])
        return ok

    checks = {f"length config {i}": (lambda c=random_config(): length_check(c)) for i in range(5)}
    checks.update({"zero weights": zero_weights, "receptive field": locality})
    _judge(acceptance, 9, "generator invariants", checks)


def test_10_gan_losses(acceptance):
    cfg = DiscriminatorConfig()
    store = init_weights(cfg, 0)
    spec, bank = FrameSpec(), build_mel_filterbank()
    x = harmonic_fixture(seconds=0.25)
    d = discriminator_forward(x, cfg, store)
    same = gan_losses(x, x, d, d, spec, bank)
    z = silence(0.1)
    hand = gan_losses(z, z, [(np.array([0.5]), [])], [(np.array([0.5]), [])], spec, bank)
    checks = {
        "feature matching = 0": lambda: same.feature_matching == 0.0,
        "mel reconstruction = 0": lambda: same.mel_reconstruction == 0.0,
        "hand adv_d = 0.5": lambda: abs(hand.adv_d - 0.5) <= 1e-12,
    }
    _judge(acceptance, 10, "GAN losses", checks)


def test_11_spsa(acceptance):
    def quadratic():
        w = np.zeros(1)
        for i in range(200):
            w, _ = spsa_step(lambda v: float((v[0] - 3.0) ** 2), w, 0.05, 0.01, i)
        return abs(w[0] - 3.0) < 0.5

    def toy():
        spec = FrameSpec()
        bank = build_mel_filterbank(n_mels=TOY_GENERATOR.n_mels)
        t = np.arange(2 * SR) / SR
        target = AudioBuffer(0.4 * np.sin(2 * np.pi * 220 * t) + 0.2 * np.sin(2 * np.pi * 440 * t), SR)
        mel = mel_spectrogram(target, spec, bank)
        _, losses = spsa_train(init_weights(TOY_GENERATOR, 11), [mel], [target], TOY_GENERATOR, spec, bank,
                               steps=100, a=0.01, c=0.01, seed=11)
        return np.median(losses[-10:]) < np.median(losses[:10])

    _judge(acceptance, 11, "SPSA", {"quadratic |w-3| < 0.5": quadratic, "toy generator loss falls": toy})


def test_12_formats(acceptance, tmp_path):
    def tensorfile():
        t = np.random.default_rng(0).standard_normal((3, 4, 5)).astype(np.float32)
        write_tensor(tmp_path / "t.pft", t)
        return read_tensor(tmp_path / "t.pft").tobytes() == t.tobytes()

    def weightstore():
        store = init_weights(GeneratorConfig(), 4)
        store.save(tmp_path / "w.pfw")
        back = WeightStore.load(tmp_path / "w.pfw")
        return back.equals(store) and back.to_bytes() == (tmp_path / "w.pfw").read_bytes()

    def pgm():
        raw = mel_to_pgm_bytes(np.random.default_rng(1).standard_normal((10, 80)))
        pixels = np.frombuffer(raw[len(b"P5\n10 80\n255\n"):], dtype=np.uint8)
        return raw.startswith(b"P5\n10 80\n255\n") and pixels.size == 800 and pixels.min() == 0 and pixels.max() == 255

    def report():
        write_wav(tone(200.0, 0.5), tmp_path / "a.wav")
        text = evaluate_pair(tmp_path / "a.wav", tmp_path / "a.wav").to_json()
        return MetricReport(**json.loads(text)).to_json() == text

    def manifest():
        (tmp_path / "corpus").mkdir()
        write_wav(tone(200.0, 1.0), tmp_path / "corpus" / "a.wav")
        write_wav(tone(300.0, 0.5), tmp_path / "corpus" / "b.wav")
        m = ingest(tmp_path / "corpus")
        m.save(tmp_path / "m.jsonl")
        return Manifest.load(tmp_path / "m.jsonl").to_jsonl() == (tmp_path / "m.jsonl").read_text()

    def segmentation():
        buf = AudioBuffer(np.random.default_rng(2).uniform(-0.5, 0.5, 10 * SR), SR)
        return reassemble(segment(buf, 4.0), len(buf)).tobytes() == buf.samples.tobytes()

    checks = {"TensorFile": tensorfile, "WeightStore": weightstore, "PGM": pgm, "report JSON": report,
              "manifest JSONL": manifest, "segmentation": segmentation}
    _judge(acceptance, 12, "formats and lossless segmentation", checks)
