"""Scoring predictions against gold labels.

Builds a tiny gold corpus, fabricates three qualities of prediction for
it -- exact, overlapping, and empty -- and walks through the two metrics:
span IoU over the hard labels and rank correlation over the per-character
soft profile.  Ends with the per-language summary table the CLI prints.

Run:  python demos/02_evaluation.py
"""

from span_sleuth.corpus import CharSpan, SoftSpan, parse_record
from span_sleuth.detect import PredictionRow
from span_sleuth.evaluation import (
    aggregate,
    evaluate,
    evaluate_by_language,
    format_summary_table,
    score_record,
)

GOLD_LINES = [
    '{"id":"en-001","lang":"EN","question":"Who wrote Dracula?",'
    '"model_output_text":"Bram Stoker wrote Dracula in 1890 in Paris.",'
    '"model_id":"demo-model-7b","model_output_tokens":[],"model_output_logits":[],'
    '"soft_labels":[{"start":29,"prob":0.85,"end":33},{"start":37,"prob":0.9,"end":42}],'
    '"hard_labels":[[29,33],[37,42]]}',
    '{"id":"en-002","lang":"EN","question":"Where does the Nile flow?",'
    '"model_output_text":"The Nile flows through Cairo and Khartoum.",'
    '"model_id":"demo-model-7b","model_output_tokens":[],"model_output_logits":[],'
    '"soft_labels":[],"hard_labels":[]}',
    '{"id":"ar-001","lang":"AR","question":"من فاز؟",'
    '"model_output_text":"فاز طه حسين '
    'بجائزة نوبل عام 1988.",'
    '"model_id":"demo-model-7b","model_output_tokens":[],"model_output_logits":[],'
    '"soft_labels":[{"start":4,"prob":0.9,"end":11}],"hard_labels":[[4,11]]}',
]


def banner(title: str) -> None:
    print(f"\n=== {title} " + "=" * max(0, 68 - len(title)))


def main() -> None:
    gold = [parse_record(line) for line in GOLD_LINES]

    banner("1. three predictions of different quality")
    exact = PredictionRow(
        record_id="en-001",
        hard_spans=[CharSpan(29, 33), CharSpan(37, 42)],
        soft_runs=[SoftSpan(29, 33, 0.85), SoftSpan(37, 42, 0.9)],
    )
    shifted = PredictionRow(  # right idea, sloppy boundaries on the year
        record_id="en-001",
        hard_spans=[CharSpan(26, 33), CharSpan(37, 42)],
        soft_runs=[SoftSpan(26, 33, 0.7), SoftSpan(37, 42, 0.7)],
    )
    phantom = PredictionRow(  # flags a span in a fully supported answer
        record_id="en-002",
        hard_spans=[CharSpan(23, 28)],
        soft_runs=[SoftSpan(23, 28, 0.6)],
    )
    for name, pred, gold_record in (
        ("exact", exact, gold[0]),
        ("shifted", shifted, gold[0]),
        ("phantom", phantom, gold[1]),
    ):
        score = score_record(pred, gold_record)
        print(
            f"{name:<8} vs {gold_record.id}:  iou={score.iou:.4f}  "
            f"soft correlation={score.cor:.4f}"
        )
    print("(empty-vs-empty hard labels count as IoU 1.0: agreeing that")
    print(" nothing is hallucinated is a correct prediction, not a missing one)")

    banner("2. corpus-level evaluation, one report per language")
    predictions = [
        exact,
        phantom,
        PredictionRow(
            record_id="ar-001",
            hard_spans=[CharSpan(4, 11)],
            soft_runs=[SoftSpan(4, 11, 0.9)],
        ),
    ]
    report = evaluate(predictions, gold)
    print(f"mixed-language report: lang={report.lang} n={report.n} "
          f"mean_iou={report.mean_iou:.4f} mean_cor={report.mean_cor:.4f}")
    for row in report.per_record:
        print(f"  {row.record_id}: iou={row.iou:.4f} cor={row.cor:.4f}")

    banner("3. the summary table the CLI renders")
    print(format_summary_table(aggregate(evaluate_by_language(predictions, gold))))


if __name__ == "__main__":
    main()
