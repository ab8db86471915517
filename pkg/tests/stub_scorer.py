"""Scorer process stand-ins used by the tests: ``echo`` answers 0.5 for every
candidate, ``short`` drops one score, ``crash`` exits on the first request."""
import json
import sys

mode = sys.argv[1]
for line in sys.stdin:
    req = json.loads(line)
    if mode == "crash":
        sys.exit(3)
    scores = [0.5] * len(req["c"])
    if mode == "short":
        scores = scores[:-1]
    print(json.dumps({"scores": scores}), flush=True)
