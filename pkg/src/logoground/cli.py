"""Batch command-line front-end.

Subcommands: score rollout files, evaluate prediction files, build and
validate datasets, run the scoring service, and dry-run the judge. All
file I/O is line-delimited JSON. Exit codes: 0 success, 1 validation
failures (per-line diagnostics on stderr), 2 usage errors.
"""

import json
import sys
from pathlib import Path

import click

from . import KERNEL_BACKEND, __version__
from .dataset import read_records, remap_record, validate_dataset
from .errors import ConfigError, DatasetValidationError, JudgeProtocolError
from .evaluation import ChoicePrediction, build_report
from .geometry import make_box
from .judge import JudgeRequest, judge_batch, render_judge_prompt
from .rewards import GroundTruth
from .scoring import (
    JUDGE_MODES,
    ServiceSettings,
    group_spec_from_dict,
    make_judge_backend,
    merge_config,
    score_batch,
)

STAGE_TAUS = {"perception": 0.5, "reasoning": 0.3}


def _load_settings(config_path) -> ServiceSettings:
    if config_path is None:
        return ServiceSettings()
    try:
        return ServiceSettings.from_file(config_path)
    except (OSError, ValueError, ConfigError) as exc:
        raise click.ClickException(f"bad config file {config_path}: {exc}")


def _resolve_tau(tau, stage):
    # an explicit --tau always beats the --stage convenience value
    if tau is not None:
        return tau
    if stage is not None:
        return STAGE_TAUS[stage]
    return None


def _check_output(path, force: bool):
    if path is not None and Path(path).exists() and not force:
        raise click.ClickException(f"output {path} exists; pass --force to overwrite")


def _read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                yield lineno, line


@click.group()
@click.version_option(version=__version__)
def main():
    """Reward scoring and evaluation for visually-grounded rollouts."""


@main.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("output_path", type=click.Path(dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True), help="Server-defaults JSON file.")
@click.option("--tau", type=float, default=None, help="IoU threshold override.")
@click.option("--alpha", type=float, default=None, help="Accuracy weight override.")
@click.option("--stage", type=click.Choice(sorted(STAGE_TAUS)), default=None,
              help="Convenience tau: perception=0.5, reasoning=0.3.")
@click.option("--judge-mode", type=click.Choice(JUDGE_MODES), default=None)
@click.option("--force", is_flag=True, help="Overwrite the output file if it exists.")
def score(input_path, output_path, config_path, tau, alpha, stage, judge_mode, force):
    """Score a rollout-group file (one JSON group per line).

    Each line holds {"prompt_id", "ground_truth": {"answer", "gt_boxes"},
    "task_prompt", "rollouts": [...]}; the output carries one scored
    group per line, identical to the service response groups.
    """
    _check_output(output_path, force)
    settings = _load_settings(config_path)
    overrides = {"tau": _resolve_tau(tau, stage), "alpha": alpha}
    try:
        cfg = merge_config(settings.reward, {k: v for k, v in overrides.items() if v is not None})
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    mode = judge_mode or settings.default_judge_mode

    specs = []
    failures = 0
    for lineno, line in _read_jsonl(input_path):
        try:
            specs.append(group_spec_from_dict(json.loads(line), index=len(specs)))
        except (json.JSONDecodeError, ValueError) as exc:
            click.echo(f"{input_path}:{lineno}: {exc}", err=True)
            failures += 1
    if not specs:
        click.echo("no valid groups in input", err=True)
        sys.exit(1)

    groups, _ = score_batch(
        specs,
        cfg,
        judge_mode=mode,
        backend=make_judge_backend(mode),
        judge_concurrency=settings.judge_concurrency,
        judge_retries=settings.judge_retries,
        workers=settings.workers,
    )
    with open(output_path, "w", encoding="utf-8") as fh:
        for group in groups:
            fh.write(json.dumps(group, ensure_ascii=False) + "\n")
    click.echo(f"scored {len(groups)} group(s) -> {output_path}")
    if failures:
        sys.exit(1)


def _load_gt_file(gt_path, direction):
    """Ground truth from either flat gt lines or full dataset records."""
    answers = {}
    box_sets = {}
    errors = []
    for lineno, line in _read_jsonl(gt_path):
        try:
            data = json.loads(line)
            if "images" in data:  # full benchmark record: remap into canvas space
                from .dataset import record_from_dict

                record = record_from_dict(data)
                _, boxes = remap_record(record, direction)
                answers[record.record_id] = record.answer
                box_sets[record.record_id] = boxes
            else:
                rid = str(data["record_id"])
                answers[rid] = data["answer"]
                box_sets[rid] = [make_box(*b) for b in data.get("gt_boxes", [])]
        except (ValueError, KeyError, TypeError, DatasetValidationError) as exc:
            errors.append(f"{gt_path}:{lineno}: {exc}")
    return answers, box_sets, errors


@main.command("eval")
@click.option("--preds", "preds_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help='Predictions: {"record_id", "choice"?, "boxes"?} per line.')
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Ground truth: flat gt lines or full benchmark records.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the JSON report here (default: stdout table only).")
@click.option("--tau", type=float, default=None)
@click.option("--stage", type=click.Choice(sorted(STAGE_TAUS)), default=None)
@click.option("--direction", type=click.Choice(["horizontal", "vertical"]), default="horizontal",
              help="Concat direction when --gt holds full records.")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report to stdout.")
@click.option("--force", is_flag=True)
def eval_cmd(preds_path, gt_path, out_path, tau, stage, direction, as_json, force):
    """Evaluate a prediction file: accuracy, macro-F1, grounding P/R, AP50."""
    _check_output(out_path, force)
    tau = _resolve_tau(tau, stage) or 0.5

    answers, gt_box_sets, errors = _load_gt_file(gt_path, direction)
    choice_preds = {}
    pred_box_sets = {}
    for lineno, line in _read_jsonl(preds_path):
        try:
            data = json.loads(line)
            rid = str(data["record_id"])
            if rid in choice_preds:
                raise ValueError(f"duplicate prediction for record_id {rid!r}")
            choice = data.get("choice")
            choice_preds[rid] = ChoicePrediction(rid, choice)
            pred_box_sets[rid] = [make_box(*b) for b in data.get("boxes", [])]
        except (ValueError, KeyError, TypeError) as exc:
            errors.append(f"{preds_path}:{lineno}: {exc}")
    for msg in errors:
        click.echo(msg, err=True)
    if errors:
        sys.exit(1)
    unknown = set(choice_preds) - set(answers)
    if unknown:
        click.echo(f"predictions for unknown record_id(s): {sorted(unknown)}", err=True)
        sys.exit(1)

    record_ids = list(answers)
    try:
        report = build_report(
            list(choice_preds.values()),
            [(rid, answers[rid]) for rid in record_ids],
            [pred_box_sets.get(rid, []) for rid in record_ids],
            [gt_box_sets[rid] for rid in record_ids],
            tau=tau,
        )
    except ValueError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)

    if out_path:
        Path(out_path).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    click.echo(json.dumps(report.to_dict(), indent=2) if as_json else report.render_text())


@main.command()
@click.option("--records", "records_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--images-root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--direction", type=click.Choice(["horizontal", "vertical"]), default="horizontal")
@click.option("--force", is_flag=True)
def concat(records_path, images_root, out_dir, direction, force):
    """Compose one canvas image per record plus a layout sidecar."""
    from .dataset import compose_record_image

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    failures = 0
    written = 0
    for lineno, record, error in read_records(records_path):
        if error is not None:
            click.echo(f"{records_path}:{lineno}: {error}", err=True)
            failures += 1
            continue
        png_path = out / f"{record.record_id}.png"
        sidecar_path = out / f"{record.record_id}.layout.json"
        if (png_path.exists() or sidecar_path.exists()) and not force:
            click.echo(f"{png_path} exists; pass --force to overwrite", err=True)
            failures += 1
            continue
        try:
            layout, boxes = remap_record(record, direction)
            compose_record_image(record, layout, images_root, png_path)
        except (DatasetValidationError, OSError) as exc:
            click.echo(f"{records_path}:{lineno}: {exc}", err=True)
            failures += 1
            continue
        sidecar = {
            "record_id": record.record_id,
            "direction": layout.direction,
            "sizes": [list(s) for s in layout.sizes],
            "offsets": [list(o) for o in layout.offsets],
            "canvas": list(layout.canvas),
            "gt_boxes": [list(b) for b in boxes],
        }
        sidecar_path.write_text(json.dumps(sidecar, indent=2) + "\n")
        written += 1
    click.echo(f"composited {written} record(s) -> {out_dir}")
    if failures:
        sys.exit(1)


@main.command()
@click.option("--records", "records_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report on stdout.")
def validate(records_path, as_json):
    """Validate a benchmark record file and report dataset statistics."""
    report = validate_dataset(read_records(records_path))
    for issue in report.issues:
        for reason in issue.reasons:
            click.echo(f"{records_path}:{issue.line}: [{issue.record_id}] {reason}", err=True)
    click.echo(json.dumps(report.to_dict(), indent=2) if as_json else report.render_text())
    if not report.ok:
        sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def serve(host, port, config_path):
    """Run the HTTP scoring service."""
    import uvicorn

    from .service import create_app

    settings = _load_settings(config_path)
    try:
        uvicorn.run(create_app(settings), host=host, port=port, log_level="warning")
    except OSError as exc:  # port already bound, permission, ...
        click.echo(f"cannot serve on {host}:{port}: {exc}", err=True)
        sys.exit(1)


@main.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.option("--judge-mode", type=click.Choice(["mock", "remote"]), default="mock", show_default=True)
@click.option("--render-only", is_flag=True, help="Print rendered prompts instead of judging.")
@click.option("--force", is_flag=True)
def judge(input_path, out_path, judge_mode, render_only, force):
    """Render judge prompts for a sample file and run the judge on them.

    Input lines: {"prompt", "response", "ground_truth"}.
    """
    _check_output(out_path, force)
    requests = []
    failures = 0
    for lineno, line in _read_jsonl(input_path):
        try:
            data = json.loads(line)
            requests.append(
                JudgeRequest(
                    prompt_str=data["prompt"],
                    response_str=data["response"],
                    ground_truth=data["ground_truth"],
                )
            )
        except (ValueError, KeyError, TypeError) as exc:
            click.echo(f"{input_path}:{lineno}: {exc}", err=True)
            failures += 1
    if failures:
        sys.exit(1)

    if render_only:
        lines = [json.dumps({"prompt": render_judge_prompt(r)}, ensure_ascii=False) for r in requests]
    else:
        backend = make_judge_backend(judge_mode)
        results = judge_batch(requests, backend)
        lines = []
        for result in results:
            if isinstance(result, JudgeProtocolError):
                lines.append(json.dumps({"error": str(result), "raw": result.raw}, ensure_ascii=False))
            else:
                lines.append(
                    json.dumps(
                        {"score": result.score, "rationale": result.rationale},
                        ensure_ascii=False,
                    )
                )
    if out_path:
        Path(out_path).write_text("\n".join(lines) + "\n")
        click.echo(f"wrote {len(lines)} line(s) -> {out_path}")
    else:
        for line in lines:
            click.echo(line)


if __name__ == "__main__":
    main()
