#!/usr/bin/env python3
"""Seed a running server with two demo reports and wait for them to finish.

Usage:
    python3 scripts/seed_demo.py [http://127.0.0.1:8080]
"""

import sys
import time

import httpx

REPORTS = [
    {
        "category": "MRI",
        "language": "en",
        "text": "Brain MRI shows a focal lesion in the cerebellum. No hydrocephalus.",
    },
    {
        "category": "Ultrasound",
        "language": "pt",
        "text": "Ecografia mostra derrame pleural à direita. Fígado sem alterações.",
    },
]


def main() -> int:
    base = sys.argv[1] if len(sys.argv) > 1 else "http://127.0.0.1:8080"
    client = httpx.Client(base_url=base, timeout=10.0)
    codes = []
    for doc in REPORTS:
        resp = client.post("/reports", json=doc)
        resp.raise_for_status()
        code = resp.json()["code"]
        codes.append(code)
        print(f"created report {code} ({doc['category']}, {doc['language']})")
        time.sleep(1.0)  # distinct creation times, so the dashboard order is visible

    deadline = time.time() + 60
    pending = set(codes)
    while pending and time.time() < deadline:
        for code in sorted(pending):
            doc = client.get(f"/reports/{code}").json()
            if doc["status"] in ("Done", "Failed"):
                pending.discard(code)
                print(f"report {code}: {doc['status']}"
                      + (f" ({doc['failure_reason']})" if doc["failure_reason"] else ""))
        time.sleep(0.5)
    if pending:
        print(f"still pending after 60s: {sorted(pending)}", file=sys.stderr)
        return 1

    for code in codes:
        doc = client.get(f"/reports/{code}").json()
        labels = [a["matched_text"] for a in doc["annotations"]]
        print(f"report {code} annotations: {labels}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
