"""Writes random byte strings and their hashlib SHA-1 digests, one per line."""
import hashlib
import random
import sys


def main(path, count=100, seed=20150501):
    rng = random.Random(seed)
    with open(path, "w") as out:
        for i in range(count):
            n = rng.choice([0, 1, 55, 56, 63, 64, 65]) if i < 14 else rng.randrange(0, 2000)
            data = bytes(rng.randrange(256) for _ in range(n))
            out.write(f"{data.hex()} {hashlib.sha1(data).hexdigest()}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "sha1_vectors.txt")
