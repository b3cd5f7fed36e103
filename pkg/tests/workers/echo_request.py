"""Replies with the objective 1.5 and writes the raw request to argv[1]."""
import sys

line = sys.stdin.buffer.readline()
with open(sys.argv[1], "wb") as fh:
    fh.write(line)
print('{"objective": 1.5, "failed": false, "eval_seconds": 0.1}')
