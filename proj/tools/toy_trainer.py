#!/usr/bin/env python3
# Copyright 2026 The enasfarm Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Toy trainer for the command backend.

Trains nothing. Reads the payload and settings files the command backend
writes, evaluates the same closed-form learning curve as the built-in
surrogate backend, prints one line per epoch and finishes with FITNESS=dd.dd.
Numbers must match the C++ surrogate bit for bit, so the arithmetic below
follows it operation by operation.
"""

import argparse
import json
import math
import sys

MASK = (1 << 64) - 1
TWO_TO_64 = 2.0 ** 64


def mix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return x ^ (x >> 31)


def clamp(v, lo, hi):
    return lo if v < lo else hi if v > hi else v


def asymptote(depth, params, identifier):
    u = float(int(identifier[:16], 16)) / TWO_TO_64
    a = (0.50 + 0.40 * (1.0 - math.exp(-float(depth) / 8.0)) + 0.08 * (u - 0.5)
         - 0.02 * math.log1p(float(params) / 1e6))
    return clamp(a, 0.0, 0.99)


def noise(sigma, seed, identifier):
    if sigma == 0.0:
        return 0.0
    v = float(mix64((seed ^ int(identifier[:16], 16)) & MASK)) / TWO_TO_64
    return sigma * (2.0 * v - 1.0)


def percent(a, epochs, tau, eps):
    acc = a * (1.0 - math.exp(-float(epochs) / tau)) + eps
    return 100.0 * clamp(acc, 0.0, 1.0)


def centi(p):
    # half away from zero, like llround
    x = p * 100.0
    c = math.floor(x)
    if x - c >= 0.5:
        c += 1
    return int(c)


def fmt(c):
    return "%d.%02d" % (c // 100, c % 100)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--payload", required=True)
    ap.add_argument("--settings", required=True)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fail", action="store_true", help="exit non-zero after the epoch logs")
    args = ap.parse_args(argv)

    with open(args.payload) as f:
        payload = json.load(f)
    with open(args.settings) as f:
        settings = json.load(f)
    backend = settings.get("backend", {})
    tau = float(backend.get("tau", 20.0))
    sigma = float(backend.get("noise", 0.0))
    epochs = int(settings["total_epoch"])

    ident = payload["identifier"]
    a = asymptote(payload["depth"], payload["params"], ident)
    eps = noise(sigma, args.seed & MASK, ident)
    for e in range(1, epochs + 1):
        print("epoch %d acc %s" % (e, fmt(centi(percent(a, e, tau, eps)))), flush=True)
    if args.fail:
        print("toy trainer: failing on request", file=sys.stderr)
        return 1
    print("FITNESS=" + fmt(centi(percent(a, epochs, tau, eps))), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
