"""Train a post-editor on corrupted synthetic text and measure what it fixes.

A reduced version of the full experiment: 600 sentences and a single tuning
restart, so it runs in well under a minute. Pass ``--full`` for the
2000-sentence setup used by the acceptance tests (several minutes).

    python demos/synthetic_post_editing.py [--full]
"""

import argparse
import time

from apekit.errata import format_profile_table, profile_row
from apekit.mtmetrics import format_table, report_row
from apekit.pipeline import TrainParams, apply_ape, split_corpus, train_ape
from apekit.sigtest import paired_bootstrap
from apekit.textio import CorruptionSpec, corrupt, pair_corpora, synthetic_references

ap = argparse.ArgumentParser()
ap.add_argument("--full", action="store_true")
args = ap.parse_args()

size = 2000 if args.full else 600
params = TrainParams(seed=42) if args.full else TrainParams(seed=42, tune_restarts=1, tune_sweeps=1)

refs = synthetic_references(size, seed=0)
mt = corrupt(refs, CorruptionSpec(0.3, 0.2, 42))
train_ref, tune_ref, test_ref = split_corpus(refs)
train_mt, tune_mt, test_mt = split_corpus(mt)
print(f"{len(train_mt)} training, {len(tune_mt)} tuning, {len(test_mt)} test sentences")

start = time.perf_counter()
model = train_ape(train_mt, train_ref, pair_corpora(tune_mt, tune_ref), params)
edited = apply_ape(model, test_mt)
print(f"trained and applied in {time.perf_counter() - start:.1f}s; {len(model.phrase_table)} phrase pairs")
print("tuned weights:", model.weights)
print()

print(format_table({"corrupted": report_row(test_mt, test_ref), "post-edited": report_row(edited, test_ref)}))
print()
print(format_profile_table({"corrupted": profile_row(test_mt, test_ref),
                            "post-edited": profile_row(edited, test_ref)}))
print()
print(paired_bootstrap(test_mt, edited, test_ref, samples=1000, seed=7).verdict())
print()

shown = 0
for before, after, ref in zip(test_mt, edited, test_ref):
    if before != after and shown < 3:
        print("MT:     ", " ".join(before))
        print("edited: ", " ".join(after))
        print("ref:    ", " ".join(ref))
        print()
        shown += 1
