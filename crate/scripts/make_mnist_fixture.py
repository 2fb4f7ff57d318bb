"""Build the bundled MNIST IDX fixture from the `mnist` npm package (MIT).

Usage: python3 scripts/make_mnist_fixture.py <path-to-npm-package-src-digits> <out-dir>

Writes `digits-images.idx3-ubyte` / `digits-labels.idx1-ubyte` holding the first
PER_DIGIT samples of every digit, interleaved round-robin (0,1,...,9,0,1,...).
Pixel values in the npm package are floats in [0,1]; they are mapped back to
bytes with round(v * 255).
"""
import json
import os
import struct
import sys

PER_DIGIT = 260


def main():
    src, out = sys.argv[1], sys.argv[2]
    digits = []
    for d in range(10):
        with open(os.path.join(src, f"{d}.json")) as f:
            raw = json.load(f)["data"]
        n = len(raw) // 784
        assert n >= PER_DIGIT, (d, n)
        digits.append([raw[i * 784:(i + 1) * 784] for i in range(PER_DIGIT)])

    images, labels = [], []
    for i in range(PER_DIGIT):
        for d in range(10):
            images.append(bytes(min(255, max(0, round(v * 255))) for v in digits[d][i]))
            labels.append(d)

    with open(os.path.join(out, "digits-images.idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(img)
    with open(os.path.join(out, "digits-labels.idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


if __name__ == "__main__":
    main()
