"""Arabic answers: the primary SRL path, the dependency fallback, and
frames derived from a raw parse.

Arabic answers flow through the same pipeline as English ones, with two
twists.  When the role labeler returns no frames, the pipeline asks the
sidecar for a raw dependency parse instead and derives frames from it by
rule (subjects to ARG0, objects to ARG1, obliques to time/place adjuncts).
And a nominal sentence -- no verb at all, routine in Arabic -- is a
first-class outcome: no predicate means nothing to decompose, reported as
a note rather than an error.

Run:  python demos/05_arabic_pipeline.py
"""

import threading

from inference_sidecar.registry import ModelRegistry
from inference_sidecar.service import make_server
from span_sleuth.backends.clients import BackendConfig, SidecarClient
from span_sleuth.corpus import parse_record
from span_sleuth.decompose import srl_from_dependencies
from span_sleuth.detect import PipelineConfig, run_pipeline

VERBAL_LINE = (
    '{"id":"ar-001","lang":"AR",'
    '"question":"من فاز بجائزة نوبل في الأدب عام 1988؟",'
    '"model_output_text":"فاز طه حسين بجائزة نوبل في الأدب عام 1988.",'
    '"model_id":"demo-model-7b","model_output_tokens":[],"model_output_logits":[]}'
)
NOMINAL_LINE = (
    '{"id":"ar-002","lang":"AR","question":"ما عاصمة مصر؟",'
    '"model_output_text":"القاهرة عاصمة مصر.",'
    '"model_id":"demo-model-7b","model_output_tokens":[],"model_output_logits":[]}'
)


def banner(title: str) -> None:
    print(f"\n=== {title} " + "=" * max(0, 68 - len(title)))


def main() -> None:
    banner("1. a verbal Arabic answer takes the normal SRL path")
    verbal = parse_record(VERBAL_LINE)
    predictions, report = run_pipeline([verbal], PipelineConfig())
    status = report.statuses[0]
    print(f"answer: {verbal.answer}")
    print(f"ok={status.ok} units={status.n_units} flagged={status.n_flagged} "
          f"used_fallback={status.used_fallback}")
    for span in predictions[0].hard_spans:
        print(f"  flagged [{span.start},{span.end}) {verbal.answer[span.start:span.end]!r}")

    banner("2. a nominal sentence degrades gracefully, not fatally")
    nominal = parse_record(NOMINAL_LINE)
    predictions, report = run_pipeline([nominal], PipelineConfig())
    status = report.statuses[0]
    print(f"answer: {nominal.answer}")
    print(f"ok={status.ok} hard_spans={predictions[0].hard_spans}")
    for note in status.notes:
        print(f"  note: {note}")

    banner("3. frames straight from a raw dependency parse")
    print("The sidecar's Arabic capability exposes the raw parse; the pipeline")
    print("derives frames from it with srl_from_dependencies. Live, in-process:")
    registry = ModelRegistry().load()
    server = make_server(registry)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    host, port = server.server_address[:2]
    try:
        client = SidecarClient(
            BackendConfig(endpoint=f"http://{host}:{port}", model_name="builtin")
        )
        text = "فازت بيترا بميدالية فضية في أولمبياد 2008"
        nodes = client.dep_parse(text, "AR")
        print(f"\n  text: {text}")
        for node in nodes:
            print(f"  {node['index']:>2} {node['form']:<12} head={node['head']} "
                  f"{node['rel']:<9} {node['pos']}")
        frames, diagnostics = srl_from_dependencies(nodes, "AR")
        for frame in frames:
            print(f"\n  derived frame: predicate {frame.predicate!r}")
            for role, text_ in frame.arguments:
                print(f"    {role:<9} {text_!r}")
        for diag in diagnostics:
            print(f"  diagnostic: {diag}")
    finally:
        server.shutdown()
        server.server_close()


if __name__ == "__main__":
    main()
