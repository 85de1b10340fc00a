"""Byte-reproducible runs: fixture mode, manifests, SOURCE_DATE_EPOCH.

Every `span-sleuth detect` run writes a manifest next to its predictions:
tool version, config digest, input/output digests, backend model names,
prompt versions, timestamp.  With a fixture directory the run replays
recorded responses instead of calling anything, and with a pinned epoch
even the manifest timestamp is reproducible -- two runs, identical bytes.

This demo shells out to the installed `span-sleuth` CLI exactly as CI
or a release pipeline would.

Run:  python demos/04_fixtures_and_determinism.py
"""

import hashlib
import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path

CORPUS = """\
{"id":"en-001","lang":"EN","question":"Who won a silver medal in the 2008 Summer Olympics?","model_output_text":"Petra van Stoveren won a silver medal in the 2008 Summer Olympics in Beijing, China.","model_id":"demo-model-7b","model_output_tokens":[],"model_output_logits":[]}
{"id":"en-002","lang":"EN","question":"Who wrote the novel Dracula?","model_output_text":"Bram Stoker wrote Dracula in 1890 in Paris.","model_id":"demo-model-7b","model_output_tokens":[],"model_output_logits":[]}
{"id":"ar-001","lang":"AR","question":"من فاز بجائزة نوبل في الأدب عام 1988؟","model_output_text":"فاز طه حسين بجائزة نوبل في الأدب عام 1988.","model_id":"demo-model-7b","model_output_tokens":[],"model_output_logits":[]}
"""

CONFIG = """\
scoring: {alpha: 0.6, threshold: 0.5, normalization: within-unit}
pipeline: {merge_gap: 1, parallelism: 4}
backends:
  sidecar: {endpoint: mock://sidecar, model_name: mock-sidecar}
  retrieval: {endpoint: "mock://chat?mode=retrieval", model_name: mock-retrieval}
"""


def banner(title: str) -> None:
    print(f"\n=== {title} " + "=" * max(0, 68 - len(title)))


def sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def detect(workdir: Path, out_name: str, epoch: str | None = None) -> Path:
    out = workdir / out_name
    env = dict(os.environ)
    env.pop("SOURCE_DATE_EPOCH", None)
    if epoch is not None:
        env["SOURCE_DATE_EPOCH"] = epoch
    result = subprocess.run(
        [
            "span-sleuth",
            "detect",
            "--input", str(workdir / "corpus.jsonl"),
            "--config", str(workdir / "config.yaml"),
            "--fixtures", str(workdir / "fixtures"),
            "--out", str(out),
        ],
        capture_output=True,
        text=True,
        env=env,
        check=False,
    )
    sys.stdout.write(result.stdout)
    if result.returncode != 0:
        sys.stderr.write(result.stderr)
        raise SystemExit(f"detect exited with {result.returncode}")
    return out


def main() -> None:
    workdir = Path(tempfile.mkdtemp(prefix="span-sleuth-demo-"))
    (workdir / "corpus.jsonl").write_text(CORPUS, encoding="utf-8")
    (workdir / "config.yaml").write_text(CONFIG, encoding="utf-8")

    banner("1. first run fills the fixture directory")
    first = detect(workdir, "run1.jsonl")
    n_fixtures = len(list((workdir / "fixtures").glob("*.json")))
    print(f"fixture directory now holds {n_fixtures} recorded response(s)")

    banner("2. second run replays it: identical prediction bytes")
    second = detect(workdir, "run2.jsonl")
    print(f"run1 sha256 {sha(first)}")
    print(f"run2 sha256 {sha(second)}")
    assert sha(first) == sha(second), "fixture replay must be byte-identical"
    print("predictions identical: yes")

    banner("3. the run manifest")
    manifest = json.loads((first.parent / (first.name + ".manifest.json")).read_text())
    for key in ("tool_version", "command", "timestamp", "backend_models", "prompt_versions"):
        print(f"{key:<16} {manifest[key]}")
    print(f"{'config_digest':<16} {manifest['config_digest'][:16]}…")

    banner("4. pinning the clock with SOURCE_DATE_EPOCH")
    pinned = detect(workdir, "pinned.jsonl", epoch="1700000000")
    manifest = json.loads((pinned.parent / (pinned.name + ".manifest.json")).read_text())
    print(f"timestamp with SOURCE_DATE_EPOCH=1700000000: {manifest['timestamp']}")
    print("(fixture mode without an epoch pins the timestamp to the Unix epoch,")
    print(" so manifests from fixture runs are byte-stable too)")


if __name__ == "__main__":
    main()
