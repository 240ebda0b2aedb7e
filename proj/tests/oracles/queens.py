"""Counts N-queens solutions by brute force over column permutations."""
import itertools
import sys


def count(n):
    total = 0
    for perm in itertools.permutations(range(n)):
        if len({r + c for r, c in enumerate(perm)}) == n and \
           len({r - c for r, c in enumerate(perm)}) == n:
            total += 1
    return total


if __name__ == "__main__":
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 8
    print(count(n))
