#!/usr/bin/env python3
# Copyright 2026 The NSX Authors.
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

"""Writes the seeded 1,000-document fixture corpus used by the end-to-end test.

Output is a doc_id<TAB>title<TAB>text file. Re-running with the same seed
produces the same bytes.
"""

import argparse
import random

TOPICS = {
    "law": "court judge appeal contract liability statute verdict attorney plaintiff ruling",
    "finance": "market stock bond interest inflation bank credit equity dividend portfolio",
    "medicine": "patient clinical dose therapy symptom vaccine trial diagnosis cardiac tumor",
    "computing": "server network latency cache kernel compiler thread memory query index",
    "ecology": "forest river species habitat rainfall soil carbon wetland drought pollen",
    "energy": "solar turbine grid battery voltage reactor fuel wind emission storage",
}
FILLER = (
    "the of and a to in is that for on with as was by it from at this be are "
    "an which or have has were not but also their its more than other new"
).split()


def sentence(rng, topic_words):
    n = rng.randint(6, 18)
    words = []
    for _ in range(n):
        pool = topic_words if rng.random() < 0.35 else FILLER
        words.append(rng.choice(pool))
    words[0] = words[0].capitalize()
    return " ".join(words) + rng.choice([".", ".", ".", "!", "?"])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--docs", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=20260101)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    names = sorted(TOPICS)
    with open(args.out, "w", encoding="utf-8", newline="\n") as out:
        for i in range(args.docs):
            primary = names[rng.randrange(len(names))]
            secondary = names[rng.randrange(len(names))]
            words = TOPICS[primary].split() * 2 + TOPICS[secondary].split()
            body = " ".join(sentence(rng, words) for _ in range(rng.randint(3, 40)))
            title = f"{primary} note {i}"
            out.write(f"D{i:04d}\t{title}\t{body}\n")


if __name__ == "__main__":
    main()
