import sys
import time

sys.stdin.readline()
time.sleep(10)
print('{"objective": 1.0, "failed": false, "eval_seconds": 10.0}')
