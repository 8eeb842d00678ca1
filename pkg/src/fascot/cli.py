"""Command-line front end. Thin argument handling only; logic lives in the
library modules so the service and the CLI share one code path."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__, manifests
from .cot import Strictness, validate_annotation
from .dataset import (
    SamplingPlan,
    dataset_stats,
    emit_stage_manifests,
    read_sample_manifest,
    render_stats_table,
    write_sample_manifest,
)
from .metrics import ThresholdPolicy, render_report_table, run_protocol
from .pipeline import (
    AnnotationAttempt,
    AttemptStatus,
    HardCase,
    OpenAICompatibleClient,
    PipelineConfig,
    ScriptedMockClient,
    annotate_batch,
    collect_hardcases,
    final_statuses,
)
from .prompts import PromptConfig
from .rewards import score_file, serialize_score_report


@click.group()
@click.version_option(version=__version__, prog_name="fascot")
def main():
    """Annotation pipeline, reward scoring, dataset manifests, and evaluation."""


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True), help="Samples manifest.")
@click.option("--client", "client_kind", type=click.Choice(["mock", "live"]), default="mock")
@click.option("--max-rounds", default=2, show_default=True)
@click.option("--max-in-flight", default=8, show_default=True)
@click.option("--max-transient-retries", default=2, show_default=True)
@click.option("--log", "log_path", type=click.Path(), help="Append-only attempt journal (resumable).")
@click.option("--out", type=click.Path(), help="Write all attempts as a manifest.")
@click.option("--hardcases-out", type=click.Path(), help="Write flagged hard cases for the review queue.")
@click.option("--prompt-config", type=click.Path(exists=True), help="JSON overrides for prompt texts.")
@click.option("--base-url", default="https://api.openai.com/v1", show_default=True, help="Live client endpoint.")
@click.option("--model", default="gpt-4o", show_default=True, help="Live client model name.")
def annotate(manifest, client_kind, max_rounds, max_in_flight, max_transient_retries,
             log_path, out, hardcases_out, prompt_config, base_url, model):
    """Annotate a sample manifest, verifying and retrying per the round loop."""
    samples = read_sample_manifest(manifest)
    prompts = PromptConfig.from_file(prompt_config) if prompt_config else PromptConfig()
    cfg = PipelineConfig(
        max_rounds=max_rounds,
        max_in_flight=max_in_flight,
        max_transient_retries=max_transient_retries,
        prompts=prompts,
        log_path=log_path,
    )
    if client_kind == "mock":
        client = ScriptedMockClient()
    else:
        client = OpenAICompatibleClient(base_url=base_url, model=model)
    attempts = annotate_batch(samples, client, cfg)
    finals = final_statuses(attempts)
    counts = {status: 0 for status in AttemptStatus}
    for status in finals.values():
        counts[status] += 1
    for status in (AttemptStatus.ACCEPTED, AttemptStatus.HARD_CASE, AttemptStatus.CLIENT_ERROR):
        click.echo(f"{status.value}: {counts[status]}")
    if out:
        manifests.write_manifest(out, manifests.ATTEMPTS_SCHEMA, (a.to_dict() for a in attempts))
        click.echo(f"wrote {len(attempts)} attempts to {out}")
    if hardcases_out:
        cases = collect_hardcases(attempts, samples)
        manifests.write_manifest(hardcases_out, manifests.HARDCASES_SCHEMA, (c.to_dict() for c in cases))
        click.echo(f"wrote {len(cases)} hard cases to {hardcases_out}")


@main.command()
@click.option("--pairs", required=True, type=click.Path(exists=True), help="Pairs manifest of raw_output/truth rows.")
@click.option("--json-out", type=click.Path(), help="Write the canonical machine-readable report.")
def score(pairs, json_out):
    """Score (raw_output, truth) pairs with the dual rewards."""
    payload, report = score_file(pairs)
    for item in payload["items"]:
        ident = item["id"] if item["id"] is not None else "-"
        click.echo(f"{ident} accuracy={item['accuracy']} format={item['format']}")
    click.echo(report.render())
    if json_out:
        Path(json_out).write_bytes(serialize_score_report(payload))


@main.command()
@click.option("--pool", required=True, type=click.Path(exists=True), help="Pool manifest to draw from.")
@click.option("--plan", "plan_path", required=True, type=click.Path(exists=True), help="Sampling plan JSON.")
@click.option("--seed", type=int, default=None, help="Overrides the plan file's seed.")
@click.option("--out", required=True, type=click.Path())
@click.option("--allow-shortfall", is_flag=True, help="Keep going when a category cannot reach its target.")
def sample(pool, plan_path, seed, out, allow_shortfall):
    """Draw a balanced manifest from a labeled pool."""
    from .dataset import sample_balanced

    records = read_sample_manifest(pool)
    plan = SamplingPlan.from_file(plan_path, seed=seed)
    selected, report = sample_balanced(records, plan, allow_shortfall=allow_shortfall)
    write_sample_manifest(out, selected)
    click.echo(f"selected {len(selected)} samples to {out}")
    for entry in report.entries:
        click.echo(
            f"shortfall: {entry.category.value}/{entry.subtype.value}"
            f" wanted {entry.quota}, had {entry.available}"
        )
    for cat, unmet in report.unmet.items():
        click.echo(f"unmet: {cat.value} short by {unmet}")


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--json-out", type=click.Path())
def stats(manifest, json_out):
    """Per-subtype counts for a samples manifest."""
    st = dataset_stats(manifest)
    click.echo(render_stats_table(st))
    if json_out:
        import json

        Path(json_out).write_text(json.dumps(st.to_payload(), indent=2, sort_keys=True), encoding="utf-8")


@main.command("emit-stages")
@click.option("--accepted", required=True, type=click.Path(exists=True), help="Attempts manifest.")
@click.option("--samples", required=True, type=click.Path(exists=True), help="Samples manifest.")
@click.option("--out-dir", required=True, type=click.Path())
def emit_stages(accepted, samples, out_dir):
    """Write the stage-1 (CoT) and stage-2 (CoT + label) training manifests."""
    attempts = [
        AnnotationAttempt.from_dict(row)
        for row in manifests.read_manifest(accepted, manifests.ATTEMPTS_SCHEMA)
    ]
    records = read_sample_manifest(samples)
    result = emit_stage_manifests(attempts, records, out_dir=out_dir)
    click.echo(f"stage1: {len(result.stage1)} rows; stage2: {len(result.stage2)} rows")


@main.command("eval")
@click.option("--scores", "scores_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--policy", default="eer", show_default=True,
              help="Threshold policy: eer, fixed:<t>, or dev:<path>.")
@click.option("--json-out", type=click.Path())
def eval_cmd(scores_dir, policy, json_out):
    """Evaluate every score file in a directory (benchmark per file)."""
    files = {p.stem: p for p in sorted(Path(scores_dir).iterdir()) if p.is_file()}
    if not files:
        raise click.ClickException(f"no score files in {scores_dir}")
    report = run_protocol(files, ThresholdPolicy.parse(policy))
    click.echo(render_report_table(report))
    if json_out:
        Path(json_out).write_text(report.to_json(), encoding="utf-8")
    if report.errors and not report.rows:
        sys.exit(1)


@main.command()
@click.option("--text", help="Annotation text; reads stdin when omitted.")
@click.option("--strictness", type=click.Choice(["strict", "lenient"]), default="strict", show_default=True)
def validate(text, strictness):
    """Validate one annotation and list every violation."""
    if text is None:
        text = sys.stdin.read()
    level = Strictness.STRICT if strictness == "strict" else Strictness.LENIENT
    report = validate_annotation(text, level)
    click.echo("ok" if report.ok else "invalid")
    for err in report.errors:
        d = err.as_dict()
        where = f" at {d['position']}" if "position" in d else ""
        click.echo(f"  {d['code']}{where}: {d['message']}")
    if not report.ok:
        sys.exit(1)


@main.command("load-hardcases")
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--cases", required=True, type=click.Path(exists=True), help="Hard-case manifest to flag.")
def load_hardcases(store_path, cases):
    """Seed a review-store event log from a hard-case manifest."""
    from .service.store import HardCaseStore

    store = HardCaseStore(store_path=store_path)
    n = 0
    for row in manifests.read_manifest(cases, manifests.HARDCASES_SCHEMA):
        store.flag(HardCase.from_dict(row))
        n += 1
    click.echo(f"flagged {n} cases; store revision {store.revision}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--store", "store_path", type=click.Path(), help="Event-log path (state is in-memory when omitted).")
@click.option("--manifest", type=click.Path(exists=True), help="Samples manifest backing /stats.")
@click.option("--token", envvar="FASCOT_TOKEN", default=None, help="Shared bearer token; unset disables auth.")
@click.option("--assets", type=click.Path(exists=True, file_okay=False), help="Directory served read-only at /assets for the review UI.")
def serve(host, port, store_path, manifest, token, assets):
    """Run the review service."""
    import uvicorn

    from .service import HardCaseStore, create_app

    store = HardCaseStore(store_path=store_path, samples_manifest=manifest)
    uvicorn.run(create_app(store, token=token, assets_dir=assets), host=host, port=port)


if __name__ == "__main__":
    main()
