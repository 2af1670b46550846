"""Command-line front door.

Subcommands:
    segment   batch-run a segmenter over WAV files, export per-cough WAVs
              plus manifest.json
    ingest    build a manifest for an already-segmented directory (e.g.
              manually cut files) so it can be annotated and evaluated
    merge     combine several manifests (one per method, typically) into
              one, so a single annotation CSV can be scored across methods
    evaluate  score an annotation CSV against a manifest: Fleiss' kappa,
              majority-vote consensus, precision, rater diagnostics
    serve     run the browser annotation service

Diagnostics go to stderr; machine-readable output (JSON/CSV/figures) goes
to files only. Exit code 0 means no error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from coughseg import __version__
from coughseg.annotations import (
    parse_annotations,
    session_to_matrix,
    write_consensus_csv,
)
from coughseg.audio import load_audio
from coughseg.errors import (
    CoughsegError,
    DegenerateAgreementError,
    IncompleteGridError,
)
from coughseg.metrics import (
    consensus_labels,
    fleiss_kappa,
    kappa_to_dict,
    precision,
    precision_to_dict,
    rater_diagnostics,
)
from coughseg.segment import (
    METHOD_HYSTERESIS,
    METHOD_MANUAL,
    METHOD_RMS,
    HysteresisParams,
    ManifestEntry,
    RmsThresholdParams,
    SegmentBounds,
    SegmentManifest,
    export_segments,
    hysteresis_segment,
    rms_threshold_segment,
)
from coughseg.server import AnnotationServer

_METHOD_ALIASES = {
    "hysteresis": METHOD_HYSTERESIS,
    "rms_threshold": METHOD_RMS,
    "rms": METHOD_RMS,
}


def _collect_wavs(source: Path) -> list[Path]:
    if source.is_file():
        return [source]
    if source.is_dir():
        return sorted(
            (p for p in source.rglob("*") if p.is_file() and p.suffix.lower() == ".wav"),
            key=lambda p: p.relative_to(source).as_posix(),
        )
    raise CoughsegError(f"input {source} is neither a file nor a directory")


def _build_params(args) -> HysteresisParams | RmsThresholdParams:
    def pick(value, default):
        return default if value is None else value

    if args.method == METHOD_HYSTERESIS:
        d = HysteresisParams()
        return HysteresisParams(
            low_mult=pick(args.low_mult, d.low_mult),
            high_mult=pick(args.high_mult, d.high_mult),
            min_len_ms=pick(args.min_len_ms, d.min_len_ms),
            pad_ms=pick(args.pad_ms, d.pad_ms),
            envelope_window_ms=pick(args.envelope_window_ms, d.envelope_window_ms),
            envelope_hop_ms=pick(args.envelope_hop_ms, d.envelope_hop_ms),
        )
    d = RmsThresholdParams()
    return RmsThresholdParams(
        threshold=pick(args.threshold, d.threshold),
        frame_ms=pick(args.frame_ms, d.frame_ms),
        min_len_ms=pick(args.min_len_ms, d.min_len_ms),
        max_len_ms=pick(args.max_len_ms, d.max_len_ms),
        context_frames=pick(args.context_frames, d.context_frames),
    )


def cmd_segment(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = _build_params(args)
    segmenter = (
        hysteresis_segment if args.method == METHOD_HYSTERESIS else rms_threshold_segment
    )

    manifest = SegmentManifest()
    total = 0
    processed = 0
    for path in _collect_wavs(Path(args.input)):
        try:
            clip = load_audio(path)
        except CoughsegError as exc:
            if args.skip_bad:
                print(f"skipping {path}: {exc}", file=sys.stderr)
                continue
            raise
        segments = segmenter(clip, params)
        entry = export_segments(
            clip,
            segments,
            out_dir,
            params=params,
            method=args.method,
            overwrite=args.overwrite,
        )
        manifest.add(entry)
        if args.figures:
            from coughseg.report import save_segment_overlay

            fig_dir = out_dir / "figures"
            fig_dir.mkdir(exist_ok=True)
            save_segment_overlay(
                clip, segments, fig_dir / f"{entry.source_id}_{args.method}.png"
            )
        print(f"{clip.source_id}: {len(segments)} segment(s)", file=sys.stderr)
        total += len(segments)
        processed += 1

    manifest.save(out_dir / "manifest.json")
    print(f"total: {total} segment(s) from {processed} file(s)", file=sys.stderr)
    return 0


def cmd_ingest(args) -> int:
    source = Path(args.input)
    if not source.is_dir():
        raise CoughsegError(f"ingest expects a directory of WAV files, got {source}")
    manifest = SegmentManifest()
    count = 0
    for path in _collect_wavs(source):
        clip = load_audio(path)
        if len(clip) == 0:
            raise CoughsegError(f"{path}: empty audio file")
        bounds = SegmentBounds(0, len(clip), method=args.method, source_id=clip.source_id)
        manifest.add(
            ManifestEntry(
                source_id=clip.source_id,
                method=args.method,
                params={},
                segments=[bounds],
                files=[path.name],
            )
        )
        count += 1
    if count == 0:
        raise CoughsegError(f"no WAV files found under {source}")
    manifest.save(args.out)
    print(f"ingested {count} pre-segmented file(s) -> {args.out}", file=sys.stderr)
    return 0


def cmd_merge(args) -> int:
    merged = SegmentManifest()
    for path in args.manifests:
        for entry in SegmentManifest.load(path).entries:
            merged.add(entry)
    if not merged.entries:
        raise CoughsegError("nothing to merge: all input manifests are empty")
    merged.save(args.out)
    print(
        f"merged {len(args.manifests)} manifest(s): {len(merged.entries)} "
        f"entries, {len(merged.all_files())} segment file(s) -> {args.out}",
        file=sys.stderr,
    )
    return 0


def _evaluate_method(session, manifest, method: str) -> dict:
    matrix, items = session_to_matrix(session, manifest, method=method)
    grid = session.grid()
    item_set = set(items)
    raters = sorted({r.rater_id for r in session.records if r.segment_file in item_set})
    labels = {item: {r: grid[item][r] for r in raters} for item in items}

    try:
        kappa = kappa_to_dict(fleiss_kappa(matrix), method, matrix)
    except DegenerateAgreementError as exc:
        kappa = {"method": method, "N": matrix.N, "n": matrix.n, "k": matrix.k, "error": str(exc)}

    consensus = consensus_labels(labels, items)
    prec = precision_to_dict(precision(consensus), method)

    try:
        diagnostics = [
            {"rater_id": rater, "agreement_rate": rate}
            for rater, rate in rater_diagnostics(labels)
        ]
    except ValueError:
        diagnostics = []  # fewer than 3 raters: leave-one-out vote undefined

    params_for_method = [e.params for e in manifest.entries if e.method == method]
    return {
        "method": method,
        "params": params_for_method[0] if params_for_method else {},
        "agreement": kappa,
        "precision": prec,
        "rater_diagnostics": diagnostics,
        "consensus": dict(zip(items, consensus)),
    }


def cmd_evaluate(args) -> int:
    from coughseg.report import print_report, save_report_figures

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = SegmentManifest.load(args.manifest)
    session = parse_annotations(args.annotations, manifest_ref=str(args.manifest))

    methods = []
    for entry in manifest.entries:
        if entry.method not in methods:
            methods.append(entry.method)
    if not methods:
        raise CoughsegError("manifest has no entries to evaluate")

    report = {
        "tool_version": __version__,
        "manifest": str(args.manifest),
        "annotations": str(args.annotations),
        "methods": [_evaluate_method(session, manifest, m) for m in methods],
    }

    all_items: list[str] = []
    all_labels: list[int] = []
    for section in report["methods"]:
        for item, label in section["consensus"].items():
            all_items.append(item)
            all_labels.append(label)

    (out_dir / "report.json").write_text(
        json.dumps(report, indent=2) + "\n", encoding="utf-8"
    )
    write_consensus_csv(all_items, all_labels, out_dir / "consensus.csv")
    if not args.no_figures:
        save_report_figures(report, out_dir)
    print_report(report)
    print(f"report written to {out_dir}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    segments_dir = Path(args.segments_dir) if args.segments_dir else Path(args.manifest).parent
    annotations = (
        Path(args.annotations) if args.annotations else segments_dir / "annotations.csv"
    )
    server = AnnotationServer(
        manifest_path=args.manifest,
        segments_dir=segments_dir,
        annotations_path=annotations,
        ui_dir=args.ui_dir,
        rater_id=args.rater_id,
        shuffle_seed=args.shuffle_seed,
    )
    try:
        server.start(args.port, host=args.host)
    except OSError as exc:
        raise CoughsegError(f"cannot bind port {args.port}: {exc}") from exc
    print(
        f"annotation server on http://{args.host}:{server.port} "
        f"({len(server.item_order)} segments, labels -> {annotations})",
        file=sys.stderr,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        print("shutting down", file=sys.stderr)
        server.shutdown()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coughseg",
        description="Segment multi-cough recordings, annotate the pieces, score the methods.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="split WAV file(s) into single-cough WAVs")
    p.add_argument("input", help="WAV file or directory of WAVs")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument(
        "--method",
        default="hysteresis",
        choices=sorted(_METHOD_ALIASES),
        help="segmentation algorithm (rms is shorthand for rms_threshold)",
    )
    p.add_argument("--skip-bad", action="store_true", help="skip undecodable inputs instead of aborting")
    p.add_argument("--overwrite", action="store_true", help="replace existing exported files")
    p.add_argument("--figures", action="store_true", help="render per-file waveform overlays")
    p.add_argument("--low-mult", type=float, help="hysteresis low threshold multiplier (default 0.1)")
    p.add_argument("--high-mult", type=float, help="hysteresis high threshold multiplier (default 2.0)")
    p.add_argument("--pad-ms", type=float, help="hysteresis padding per side (default 0)")
    p.add_argument("--envelope-window-ms", type=float, help="hysteresis envelope window (default 20)")
    p.add_argument("--envelope-hop-ms", type=float, help="hysteresis envelope hop (default 10)")
    p.add_argument("--threshold", type=float, help="RMS activity threshold (default 0.09)")
    p.add_argument("--frame-ms", type=float, help="RMS frame length (default 42.67)")
    p.add_argument("--context-frames", type=int, help="RMS context frames per side (default 3)")
    p.add_argument("--min-len-ms", type=float, help="minimum segment length (default 200 hysteresis / 300 rms)")
    p.add_argument("--max-len-ms", type=float, help="maximum segment length, rms only (default 3000)")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("ingest", help="manifest for an already-segmented directory")
    p.add_argument("input", help="directory of pre-segmented WAV files")
    p.add_argument("-o", "--out", required=True, help="manifest.json path to write")
    p.add_argument("--method", default=METHOD_MANUAL, help="method label for the manifest (default: manual)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("merge", help="combine several manifests into one")
    p.add_argument("manifests", nargs="+", help="manifest.json files to combine")
    p.add_argument("-o", "--out", required=True, help="combined manifest.json path")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("evaluate", help="compute agreement and precision from annotations")
    p.add_argument("annotations", help="annotations.csv")
    p.add_argument("manifest", help="manifest.json the annotations refer to")
    p.add_argument("-o", "--out", required=True, help="directory for report.json, consensus.csv, figures")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="run the annotation web service")
    p.add_argument("manifest", help="manifest.json to annotate")
    p.add_argument("--segments-dir", help="directory with the exported WAVs (default: manifest's directory)")
    p.add_argument("--annotations", help="label log CSV (default: segments dir / annotations.csv)")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--rater-id", help="pin the session to one rater id")
    p.add_argument("--ui-dir", help="directory with the built browser UI (frontend/dist)")
    p.add_argument("--shuffle-seed", type=int, help="randomize presentation order with this seed")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "method", None) in _METHOD_ALIASES:
        args.method = _METHOD_ALIASES[args.method]
    try:
        return args.func(args)
    except IncompleteGridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for segment_file, rater in exc.missing[:20]:
            print(f"  missing: {segment_file} x {rater}", file=sys.stderr)
        return 1
    except CoughsegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
