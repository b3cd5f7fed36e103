"""Independent brute-force models of the two counter state machines."""

from __future__ import annotations


def trust_region_replay(seq, length0=0.8, succ_t=3, fail_t=5, min_len=0.03125, max_len=1.6):
    """Lengths after each step and the steps at which a restart fires."""
    length, s, f = length0, 0, 0
    lengths, restarts = [], []
    for i, ok in enumerate(seq):
        if ok:
            s += 1
            f = 0
        else:
            f += 1
            s = 0
        if s == succ_t:
            length = min(max_len, length * 2)
            s = 0
        if f == fail_t:
            length = length / 2
            f = 0
        if length < min_len:
            restarts.append(i)
            length, s, f = length0, 0, 0
        lengths.append(length)
    return lengths, restarts


def depth_replay(seq, depth0=1, succ_t=5, fail_t=3, limit=5, reset=1):
    """Depths after each step and the steps at which a restart fires."""
    depth, s, f = depth0, 0, 0
    depths, restarts = [], []
    for i, ok in enumerate(seq):
        if ok:
            s, f = s + 1, 0
        else:
            s, f = 0, f + 1
        if s == succ_t:
            depth = depth - 1 if depth > 1 else 1
            s = 0
        if f == fail_t:
            depth += 1
            f = 0
            if depth > limit:
                restarts.append(i)
                depth, s, f = reset, 0, 0
        depths.append(depth)
    return depths, restarts
