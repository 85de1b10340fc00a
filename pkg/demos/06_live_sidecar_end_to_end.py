"""Both packages together: live inference, then offline replay.

Starts the inference sidecar in-process, proves it speaks the wire
protocol (the same nine-probe conformance suite every backend must pass),
runs span detection against it live while caching every response, then
reruns the identical detection with the service gone -- the cache directory
alone reproduces the prediction byte for byte.  Finally the fixture
recorder captures a hand-written request file into the same cache layout.

Run:  python demos/06_live_sidecar_end_to_end.py
"""

import json
import tempfile
import threading
from pathlib import Path

from inference_sidecar.recorder import record_fixtures
from inference_sidecar.registry import ModelRegistry
from inference_sidecar.service import make_server
from span_sleuth.backends.cache import ResponseCache, now_iso
from span_sleuth.backends.clients import BackendConfig, ChatClient, SidecarClient
from span_sleuth.backends.transport import HttpTransport
from span_sleuth.conformance import run_conformance
from span_sleuth.corpus import parse_record
from span_sleuth.detect import ClientSet, PipelineConfig, prediction_to_line, run_pipeline

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

REFERENCE = (
    "Petra van Stoveren won a bronze medal in the 2012 Summer Olympics "
    "in London, United Kingdom."
)


def banner(title: str) -> None:
    print(f"\n=== {title} " + "=" * max(0, 68 - len(title)))


def main() -> None:
    record = parse_record(RECORD_LINE)
    cache_dir = Path(tempfile.mkdtemp(prefix="sidecar-demo-")) / "cache"

    registry = ModelRegistry().load()
    server = make_server(registry)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    host, port = server.server_address[:2]
    live_url = f"http://{host}:{port}"

    try:
        banner("1. the sidecar is conformant")
        print(f"serving {', '.join(registry.model_names())} at {live_url}")
        for check in run_conformance(HttpTransport(live_url, timeout=10.0)):
            print(f"  {'ok' if check.ok else 'FAIL'}  {check.name:<26} {check.detail}")

        banner("2. live detection against it")
        # The reference passage contradicts the answer on medal, year, venue.
        retrieval_cfg = BackendConfig(
            endpoint="https://chat.invalid",  # retrieval replays a recorded passage
            model_name="demo-retrieval",
            cache_dir=str(cache_dir),
        )
        ResponseCache(cache_dir).write_fixture(
            ChatClient.retrieval_key(record.question, record.lang, "demo-retrieval"),
            {"text": REFERENCE, "retrieved_at": now_iso()},
        )
        clients = ClientSet(
            sidecar=SidecarClient(
                BackendConfig(endpoint=live_url, model_name="builtin", cache_dir=str(cache_dir))
            ),
            retrieval=ChatClient(retrieval_cfg, fixture_mode=True),
        )
        cfg = PipelineConfig(parallelism=1)
        predictions, report = run_pipeline([record], cfg, clients=clients)
        print(f"reference: {REFERENCE}")
        print(f"answer   : {record.answer}")
        for span in predictions[0].hard_spans:
            print(f"flagged [{span.start},{span.end}) {record.answer[span.start:span.end]!r}")
        live_line = prediction_to_line(predictions[0])
        stats = clients.stats()["sidecar"]
        print(f"sidecar stats: {stats['network_calls']:.0f} network call(s), "
              f"{stats['cache_hits']:.0f} cache hit(s)")

        banner("3. replay with the service gone: same bytes, zero network")
        offline = ClientSet(
            sidecar=SidecarClient(
                BackendConfig(
                    endpoint="https://sidecar.invalid",
                    model_name="builtin",
                    cache_dir=str(cache_dir),
                ),
                fixture_mode=True,
            ),
            retrieval=ChatClient(retrieval_cfg, fixture_mode=True),
        )
        predictions, _ = run_pipeline([record], cfg, clients=offline)
        offline_line = prediction_to_line(predictions[0])
        stats = offline.stats()["sidecar"]
        print(f"sidecar stats: {stats['network_calls']:.0f} network call(s), "
              f"{stats['cache_hits']:.0f} cache hit(s)")
        print(f"byte-identical prediction: {offline_line == live_line}")

        banner("4. the fixture recorder does the same from a request file")
        requests_file = cache_dir.parent / "requests.jsonl"
        requests_file.write_text(
            "\n".join(
                json.dumps(line)
                for line in [
                    {"op": "srl", "text": record.answer, "lang": "EN"},
                    {"op": "nli", "premise": REFERENCE, "hypothesis": "a silver medal"},
                ]
            )
            + "\n",
            encoding="utf-8",
        )
        fixture_dir = cache_dir.parent / "recorded"
        summary = record_fixtures(requests_file, fixture_dir, live_url)
        print(f"recorded {summary.n_recorded} fixture(s):")
        for key in summary.keys:
            print(f"  {key}.json")
        print("each file name is the pipeline's cache key for that request, so")
        print("a detection run pointed at this directory replays these answers.")
    finally:
        server.shutdown()
        server.server_close()


if __name__ == "__main__":
    main()
