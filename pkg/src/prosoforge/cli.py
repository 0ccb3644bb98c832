"""``prosoforge`` command-line interface.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 validation or
computation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import VOCODERS, RunConfig, load_run_config
from .errors import FormatError, ProsoforgeError
from .metrics import StageError, evaluate_pair, evaluate_pairs, mos_aggregate, RatingsTable

log = logging.getLogger("prosoforge")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INVALID = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# flag name -> RunConfig field
_CONFIG_FLAGS = {
    "sample_rate": "sample_rate_hz",
    "n_fft": "n_fft",
    "hop": "hop",
    "window": "window",
    "n_mels": "n_mels",
    "fmin": "fmin_hz",
    "fmax": "fmax_hz",
    "f0_min": "f0_min_hz",
    "f0_max": "f0_max_hz",
    "profile": "profile",
    "mcd_mode": "mcd_mode",
    "n_mfcc": "n_mfcc",
    "allow_truncate": "allow_truncate",
    "vocoder": "vocoder",
    "n_iter": "griffin_lim_iters",
    "seed": "seed",
    "learning_rate": "learning_rate",
}


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration (flags override the config file)")
    g.add_argument("--config", help="JSON config file (default: $PROSOFORGE_CONFIG)")
    g.add_argument("--sample-rate", type=int)
    g.add_argument("--n-fft", type=int)
    g.add_argument("--hop", type=int)
    g.add_argument("--window", choices=["hann_periodic", "rect"])
    g.add_argument("--n-mels", type=int)
    g.add_argument("--fmin", type=float)
    g.add_argument("--fmax", type=float)
    g.add_argument("--f0-min", type=float)
    g.add_argument("--f0-max", type=float)
    g.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="prosoforge", description="Prosody conversion, vocoding and speech-quality metrics.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("convert", help="re-speak a WAV with a prosody profile")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--profile", help="preset name or profile JSON path")
    _common(p)

    p = sub.add_parser("analyze", help="write pitch contour and segment CSVs")
    p.add_argument("input")
    p.add_argument("--contour-csv", required=True)
    p.add_argument("--segments-csv")
    _common(p)

    p = sub.add_parser("melspec", help="WAV to log-mel tensor file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--pgm", help="also render the mel image as binary PGM")
    _common(p)

    p = sub.add_parser("vocode", help="mel tensor file to WAV")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--vocoder", choices=list(VOCODERS))
    p.add_argument("--n-iter", type=int, help="Griffin-Lim iterations")
    p.add_argument("--weights", help="generator weight store (gan)")
    p.add_argument("--generator-config", help="generator config JSON (gan)")
    _common(p)

    p = sub.add_parser("eval", help="objective metrics for reference/synthesis pairs")
    p.add_argument("ref", nargs="?")
    p.add_argument("syn", nargs="?")
    p.add_argument("--pairs", help="CSV with columns ref,syn")
    p.add_argument("--out", help="report JSON (single pair) or JSON Lines (pairs)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--pesq", type=float, help="externally computed PESQ to record")
    p.add_argument("--mcd-mode", choices=["paper", "conventional"])
    p.add_argument("--n-mfcc", type=int)
    p.add_argument("--allow-truncate", action="store_true", default=None)
    _common(p)

    p = sub.add_parser("mos", help="aggregate listener ratings")
    p.add_argument("ratings")
    p.add_argument("--out")
    p.add_argument("--scale-min", type=float, default=1.0)
    p.add_argument("--scale-max", type=float, default=5.0)

    p = sub.add_parser("dataset", help="corpus utilities")
    dsub = p.add_subparsers(dest="dataset_command", parser_class=_Parser)
    q = dsub.add_parser("ingest")
    q.add_argument("root")
    q.add_argument("--out", required=True)
    q.add_argument("--style-rules")
    q = dsub.add_parser("segment")
    q.add_argument("input")
    q.add_argument("--out-dir", required=True)
    q.add_argument("--max-len", type=float, default=4.0)
    _common(q)

    p = sub.add_parser("train-toy", help="SPSA demo run on a small generator")
    p.add_argument("target")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--learning-rate", type=float, help="SPSA step size")
    p.add_argument("--perturbation", type=float, default=0.01)
    p.add_argument("--loss-csv", required=True)
    p.add_argument("--weights-out")
    _common(p)

    p = sub.add_parser("plot", help="waveform CSV and mel PGM for a WAV")
    p.add_argument("input")
    p.add_argument("--waveform-csv")
    p.add_argument("--mel-pgm")
    p.add_argument("--decimate", type=int, default=1)
    _common(p)
    return parser


def _run_config(args) -> RunConfig:
    overrides = {field: getattr(args, flag) for flag, field in _CONFIG_FLAGS.items() if hasattr(args, flag)}
    return load_run_config(getattr(args, "config", None), overrides)


def _read_input(path, cfg: RunConfig):
    from .signal_core import read_wav, resample

    buf = read_wav(path)
    if buf.sample_rate_hz != cfg.sample_rate_hz:
        log.info("resampling %s from %d Hz to %d Hz", path, buf.sample_rate_hz, cfg.sample_rate_hz)
        buf = resample(buf, cfg.sample_rate_hz)
    return buf


def _bank(cfg: RunConfig):
    from .melspec import build_mel_filterbank

    return build_mel_filterbank(cfg.sample_rate_hz, cfg.n_fft, cfg.n_mels, cfg.fmin_hz, cfg.fmax_hz)


def cmd_convert(args) -> None:
    from .prosody import convert, load_profile
    from .signal_core import write_wav

    cfg = _run_config(args)
    buf = _read_input(args.input, cfg)
    out = convert(buf, load_profile(cfg.profile), cfg.frame_spec, cfg.f0_range)
    write_wav(out, args.output)


def cmd_analyze(args) -> None:
    from .prosody import detect_segments, track_pitch
    from .render import dump_contour_csv, dump_segments_csv

    cfg = _run_config(args)
    buf = _read_input(args.input, cfg)
    contour = track_pitch(buf, cfg.f0_range, cfg.frame_spec)
    seg_map = detect_segments(contour)
    dump_contour_csv(contour, seg_map, args.contour_csv)
    if args.segments_csv:
        dump_segments_csv(seg_map, contour.hop_s, args.segments_csv)


def cmd_melspec(args) -> None:
    from .melspec import mel_spectrogram
    from .render import render_mel_pgm
    from .tensorfile import write_tensor

    cfg = _run_config(args)
    buf = _read_input(args.input, cfg)
    mel = mel_spectrogram(buf, cfg.frame_spec, _bank(cfg))
    write_tensor(args.output, mel.values)
    if args.pgm:
        render_mel_pgm(mel, args.pgm)


def cmd_vocode(args) -> None:
    from .errors import ValidationError
    from .melspec import MelSpectrogram
    from .signal_core import write_wav
    from .tensorfile import read_tensor
    from .vocoder import GeneratorConfig, WeightStore, generator_forward, griffin_lim, load_config, mel_pseudo_inverse

    cfg = _run_config(args)
    if cfg.vocoder == "gan" and not args.weights:
        raise ValidationError("--weights is required for the gan vocoder")
    gen_cfg = None
    if cfg.vocoder == "gan":
        gen_cfg = load_config(args.generator_config) if args.generator_config else GeneratorConfig(n_mels=cfg.n_mels)
        if gen_cfg.hop != cfg.hop:
            raise ValidationError(f"generator upsamples by {gen_cfg.hop}, config hop is {cfg.hop}")
    values = read_tensor(args.input).astype("float64")
    if values.ndim != 2 or values.shape[1] != cfg.n_mels:
        raise ValidationError(f"expected a frames x {cfg.n_mels} mel tensor, got {values.shape}")
    bank = _bank(cfg)
    mel = MelSpectrogram(values, cfg.sample_rate_hz, cfg.n_fft, cfg.hop, cfg.n_mels, bank.fmin_hz, bank.fmax_hz)
    if cfg.vocoder == "griffinlim":
        result = griffin_lim(mel_pseudo_inverse(mel, bank), cfg.frame_spec, cfg.griffin_lim_iters, cfg.sample_rate_hz)
        log.info("griffin-lim spectral convergence %.4f -> %.4f", result.sc_initial, result.sc_final)
        audio = result.audio.peak_normalized()
    else:
        audio = generator_forward(mel, gen_cfg, WeightStore.load(args.weights))
    write_wav(audio, args.output)


def _write_json(doc, out: Optional[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_eval(args) -> None:
    cfg = _run_config(args)
    econf = cfg.eval_config()
    if args.pairs:
        if args.ref or args.syn:
            raise UsageError("give either REF SYN or --pairs, not both")
        with open(args.pairs, newline="") as fh:
            pairs = [(r["ref"], r["syn"]) for r in csv.DictReader(fh)]
        reports = evaluate_pairs(pairs, econf, workers=args.workers)
        lines = "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in reports)
        if args.out:
            Path(args.out).write_text(lines)
        else:
            sys.stdout.write(lines)
        return
    if not (args.ref and args.syn):
        raise UsageError("eval needs REF and SYN paths (or --pairs)")
    report = evaluate_pair(args.ref, args.syn, econf, args.pesq)
    _write_json(report.to_dict(), args.out)


def cmd_mos(args) -> None:
    table = RatingsTable.from_csv(args.ratings, args.scale_min, args.scale_max)
    _write_json(mos_aggregate(table).to_dict(), args.out)


def cmd_dataset(args) -> None:
    from .dataset import ingest, load_style_rules, segment
    from .signal_core import write_wav

    if args.dataset_command == "ingest":
        rules = load_style_rules(args.style_rules) if args.style_rules else []
        manifest = ingest(args.root, rules)
        manifest.save(args.out)
        log.info("%d entries, %d non-WAV files skipped", len(manifest), manifest.skipped)
    elif args.dataset_command == "segment":
        cfg = _run_config(args)
        buf = _read_input(args.input, cfg)
        chunks = segment(buf, args.max_len, spec=cfg.frame_spec)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = Path(args.input).stem
        with open(out_dir / "offsets.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["chunk", "offset_samples", "length_samples"])
            for i, c in enumerate(chunks):
                name = f"{stem}_{i:03d}.wav"
                write_wav(c.audio, out_dir / name)
                w.writerow([name, c.offset, len(c.audio)])
    else:
        raise UsageError("dataset needs a subcommand: ingest or segment")


def cmd_train_toy(args) -> None:
    from .melspec import build_mel_filterbank, mel_spectrogram
    from .vocoder import TOY_GENERATOR, init_weights, spsa_train

    cfg = _run_config(args)
    target = _read_input(args.target, cfg)
    bank = build_mel_filterbank(cfg.sample_rate_hz, cfg.n_fft, TOY_GENERATOR.n_mels)
    spec = cfg.frame_spec
    mel = mel_spectrogram(target, spec, bank)
    weights = init_weights(TOY_GENERATOR, cfg.seed)
    weights, losses = spsa_train(
        weights, [mel], [target], TOY_GENERATOR, spec, bank,
        steps=args.steps, a=cfg.learning_rate, c=args.perturbation, seed=cfg.seed,
    )
    with open(args.loss_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "loss"])
        for i, value in enumerate(losses):
            w.writerow([i, repr(value)])
    if args.weights_out:
        weights.save(args.weights_out)


def cmd_plot(args) -> None:
    from .melspec import mel_spectrogram
    from .render import dump_waveform_csv, render_mel_pgm

    cfg = _run_config(args)
    if not (args.waveform_csv or args.mel_pgm):
        raise UsageError("plot needs --waveform-csv and/or --mel-pgm")
    if args.decimate < 1:
        raise UsageError("--decimate must be >= 1")
    buf = _read_input(args.input, cfg)
    if args.waveform_csv:
        dump_waveform_csv(buf, args.waveform_csv, args.decimate)
    if args.mel_pgm:
        render_mel_pgm(mel_spectrogram(buf, cfg.frame_spec, _bank(cfg)), args.mel_pgm)


COMMANDS = {
    "convert": cmd_convert,
    "analyze": cmd_analyze,
    "melspec": cmd_melspec,
    "vocode": cmd_vocode,
    "eval": cmd_eval,
    "mos": cmd_mos,
    "dataset": cmd_dataset,
    "train-toy": cmd_train_toy,
    "plot": cmd_plot,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
        if not args.command:
            raise UsageError("missing command")
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"prosoforge: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"prosoforge: {exc}", file=sys.stderr)
        io = exc.stage == "read" and isinstance(exc.cause, (OSError, FormatError))
        return EXIT_IO if io else EXIT_INVALID
    except (OSError, FormatError) as exc:
        print(f"prosoforge: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ProsoforgeError as exc:
        print(f"prosoforge: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
