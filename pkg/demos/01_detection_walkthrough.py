"""Anatomy of one detection, stage by stage.

Walks a single answer record through the full pipeline by hand -- role
frames, atomic units, retrieved context, entailment triples, token
confidence, fused scores, and finally the merged character spans -- and
prints what every stage produced.  Runs entirely against the in-process
mock backends; no network, no models.

Run:  python demos/01_detection_walkthrough.py
"""

from span_sleuth.corpus import parse_record
from span_sleuth.decompose import decompose_srl
from span_sleuth.detect import (
    PipelineConfig,
    build_clients,
    emit_prediction,
    prediction_to_line,
    runs_from_probs,
)
from span_sleuth.scoring import assess, logit_confidence

RECORD_LINE = (
    '{"id":"en-001","lang":"EN",'
    '"question":"Who won a silver medal in the 2008 Summer Olympics?",'
    '"model_output_text":"Petra van Stoveren won a silver medal in the 2008 '
    'Summer Olympics in Beijing, China.",'
    '"model_id":"demo-model-7b",'
    '"model_output_tokens":["Petra","▁van","▁Sto","veren","▁won",'
    '"▁a","▁silver","▁medal","▁in","▁the","▁2008",'
    '"▁Summer","▁Olympics","▁in","▁Beijing",",","▁China","."],'
    '"model_output_logits":[4.7729,1.9911,1.114,4.3545,3.5936,5.102,4.6153,5.0785,'
    '5.1689,2.3266,3.095,5.367,2.9466,1.0416,1.8961,4.025,3.4536,4.7462]}'
)


def banner(title: str) -> None:
    print(f"\n=== {title} " + "=" * max(0, 68 - len(title)))


def main() -> None:
    banner("1. the input record")
    record = parse_record(RECORD_LINE)
    print(f"id        : {record.id}  ({record.lang})")
    print(f"question  : {record.question}")
    print(f"answer    : {record.answer}")
    print(f"tokens    : {len(record.tokens)} subword tokens with logits")

    cfg = PipelineConfig()  # defaults talk to the in-process mocks
    clients = build_clients(cfg)

    banner("2. semantic role frames")
    frames = clients.sidecar.srl_parse(record.answer, record.lang)
    for frame in frames:
        print(f"predicate {frame.predicate!r}")
        for role, text in frame.arguments:
            print(f"  {role:<9} {text!r}")

    banner("3. atomic units anchored in the answer")
    units, notes = decompose_srl(record.answer, record.tokens, frames)
    for unit in units:
        print(
            f"[{unit.span.start:>2},{unit.span.end:>2})  {unit.role:<9} "
            f"{unit.text!r}  tokens={list(unit.token_indices)}"
        )
    for note in notes:
        print(f"note: {note}")

    banner("4. retrieved context (the premise for every unit)")
    context = clients.retrieval.retrieve_context(record.question, record.lang)
    print(context.text)

    banner("5. entailment x confidence -> refined score")
    alpha = cfg.scoring.alpha
    print(
        f"refined = {alpha} * p_entail + {1 - alpha:.1f} * confidence;"
        f" flag when refined < {cfg.scoring.threshold}"
    )
    assessments = []
    for unit in units:
        verdict = clients.sidecar.entail(context.text, unit.text)
        confidence = logit_confidence(
            [record.logits[i] for i in unit.token_indices],
            record.logits,
            cfg.scoring.normalization,
        )
        assessment = assess(unit, verdict, confidence, cfg.scoring)
        assessments.append(assessment)
        flag = "FLAG" if assessment.hallucinated else "keep"
        print(
            f"{flag}  {unit.text!r:<50} p_entail={verdict.p_entail:.3f} "
            f"conf={confidence:.3f} refined={assessment.refined_score:.3f}"
        )

    banner("6. merged spans and the soft profile")
    prediction = emit_prediction(record, assessments, cfg)
    for span in prediction.hard_spans:
        print(f"hard span [{span.start},{span.end}) -> {record.answer[span.start:span.end]!r}")
    for run in runs_from_probs(prediction.soft_probs):
        print(f"soft run  [{run.start},{run.end}) p(hallucination)={run.prob:.4f}")

    banner("7. the prediction line (what `span-sleuth detect` writes)")
    print(prediction_to_line(prediction))


if __name__ == "__main__":
    main()
