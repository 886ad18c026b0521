"""Drive a labeling session end to end with simulated workers.

By default spins the service up in-process; pass --base-url to exercise a
separately running `crowdjoin serve` instead.  Workers answer truthfully
from the bundled running-example ground truth.
"""
import argparse
import json
from pathlib import Path

import httpx

DATA = Path(__file__).resolve().parent.parent / "data"


def load_inputs():
    from crowdjoin.ingestion import generate_candidates, load_csv, load_truth

    dataset = load_csv(DATA / "running_example.csv")
    truth = load_truth(DATA / "running_example_truth.csv")
    candidates = generate_candidates(dataset, 0.1).pairs
    records = {r.id: dict(r.attributes) for r in dataset.records}
    return candidates, records, truth


def make_client(base_url):
    if base_url:
        return httpx.Client(base_url=base_url)
    from fastapi.testclient import TestClient

    from crowdjoin.service import create_app

    return TestClient(create_app(sessions_dir="sessions"))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--base-url", default=None,
                        help="e.g. http://127.0.0.1:8080 (default: in-process)")
    parser.add_argument("--workers", type=int, default=2)
    args = parser.parse_args()

    candidates, records, truth = load_inputs()
    client = make_client(args.base_url)
    response = client.post("/api/sessions", json={
        "candidates": [
            {"pair_id": p.pair_id, "left": p.left, "right": p.right,
             "likelihood": p.likelihood} for p in candidates
        ],
        "records": records,
        "config": {"batch_size": 3, "replicas": 1, "instant_decision": True},
    })
    response.raise_for_status()
    session = response.json()
    sid = session["session_id"]
    print(f"session {sid}: published {session['published']}")

    by_id = {p.pair_id: p for p in candidates}
    workers = [f"sim-worker-{k}" for k in range(args.workers)]
    turn = 0
    while True:
        status = client.get(f"/api/sessions/{sid}/status").json()
        if status["complete"]:
            break
        worker = workers[turn % len(workers)]
        turn += 1
        hit = client.get(f"/api/sessions/{sid}/hits/next", params={"worker": worker})
        if hit.status_code != 200:
            continue
        view = hit.json()
        for pid in view["open"]:
            pair = by_id[pid]
            label = truth.pair_label(pair)
            out = client.post(
                f"/api/sessions/{sid}/hits/{view['hit_id']}/answers",
                json={"worker": worker, "pair_id": pid, "label": label.value},
            ).json()
            note = ""
            if out["newly_published"]:
                note += f"  -> published {out['newly_published']}"
            if out["newly_deduced"]:
                note += f"  -> deduced {out['newly_deduced']}"
            print(f"{worker} answered {pid}={label.value}{note}")

    report = client.get(f"/api/sessions/{sid}/results").json()
    print("savings:", json.dumps(report["savings"]))


if __name__ == "__main__":
    main()
