"""Second opinions on flagged spans.

After detection flags spans, independent verifier models re-judge each
one: CONFIRMED (yes, hallucinated), REFUTED (actually supported), or
UNSURE.  This demo runs detection on one record, then asks three mock
verifiers for their verdicts: a yes-man that confirms everything, a
scripted skeptic with span-specific judgments, and a dead endpoint that
shows how verifier outages degrade to UNSURE instead of failing the run.

Run:  python demos/03_verification.py
"""

import json
import tempfile
from pathlib import Path

from span_sleuth.backends.clients import BackendConfig, ChatClient
from span_sleuth.corpus import parse_record
from span_sleuth.detect import PipelineConfig, run_pipeline
from span_sleuth.verify import format_verification_table, verify_predictions

RECORD_LINE = (
    '{"id":"en-001","lang":"EN",'
    '"question":"Who won a silver medal in the 2008 Summer Olympics?",'
    '"model_output_text":"Petra van Stoveren won a silver medal in the 2008 '
    'Summer Olympics in Beijing, China.",'
    '"model_id":"demo-model-7b","model_output_tokens":[],"model_output_logits":[]}'
)


def banner(title: str) -> None:
    print(f"\n=== {title} " + "=" * max(0, 68 - len(title)))


def main() -> None:
    record = parse_record(RECORD_LINE)
    banner("1. detection flags two spans")
    predictions, _ = run_pipeline([record], PipelineConfig())
    for span in predictions[0].hard_spans:
        print(f"[{span.start},{span.end}) {record.answer[span.start:span.end]!r}")

    banner("2. three verifiers")
    script = {
        "Petra van Stoveren": (
            "HALLUCINATION: the reference names a different medalist."
        ),
        "in Beijing, China": (
            "SUPPORTED: the 2008 Summer Olympics were indeed held in Beijing."
        ),
    }
    table_path = Path(tempfile.mkdtemp()) / "skeptic_table.json"
    table_path.write_text(json.dumps(script), encoding="utf-8")

    verifiers = [
        BackendConfig(
            endpoint="mock://chat?mode=verifier&confirm=all", model_name="yes-man"
        ),
        BackendConfig(
            endpoint=f"mock://chat?mode=verifier&table={table_path}",
            model_name="skeptic",
        ),
        BackendConfig(
            endpoint="mock://chat?mode=verifier&dead=1",
            model_name="offline-verifier",
            max_retries=0,
        ),
    ]
    retrieval = ChatClient(BackendConfig(endpoint="mock://chat?mode=retrieval"))
    reports = verify_predictions(
        predictions, [record], verifiers, retrieval=retrieval
    )
    print(format_verification_table(reports))

    banner("3. span-level verdicts, verifier by verifier")
    for report in reports:
        print(f"{report.verifier} (degraded verdicts: {report.n_degraded})")
        for verdict in report.verdicts:
            print(f"  {verdict.span_text!r:<24} {verdict.judgment:<10} {verdict.rationale}")

    banner("4. reading the match rate")
    print("match_rate is the share of flagged spans the verifier confirmed as")
    print("hallucinations. The yes-man pins it at 1.0, the skeptic's scripted")
    print("knowledge confirms only the fabricated medalist, and an unreachable")
    print("verifier answers UNSURE for every span rather than aborting the run.")


if __name__ == "__main__":
    main()
