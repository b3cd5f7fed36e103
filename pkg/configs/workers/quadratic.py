"""Deterministic worker: objective = -sum((x - 0.3)^2) over the raw params."""
import json
import sys

req = json.loads(sys.stdin.readline())
x = list(req["params"].values())
value = -sum((v - 0.3) ** 2 for v in x)
print(json.dumps({"objective": value, "failed": False, "eval_seconds": 0.25, "note": "extra"}))
