"""Break MT errors into particle and content-word categories.

Corrupts a small synthetic corpus the way a weak MT system might (particles
dropped, neighbours swapped), then reports how many tokens match, moved,
need inserting or deleting, and how far allowed repairs could push BLEU.

    python demos/particle_errors.py
"""

from apekit.errata import analyze, format_profile_table, profile_row
from apekit.textio import CorruptionSpec, corrupt, synthetic_references

refs = synthetic_references(200, seed=11)
mild = corrupt(refs, CorruptionSpec(particle_drop_prob=0.1, adjacent_swap_prob=0.05, seed=1))
harsh = corrupt(refs, CorruptionSpec(particle_drop_prob=0.5, adjacent_swap_prob=0.3, seed=1))

print(format_profile_table({"mild": profile_row(mild, refs), "harsh": profile_row(harsh, refs)}))
print()

# one sentence in detail
for hyp, ref in zip(harsh, refs):
    if hyp != ref:
        break
an = analyze(hyp, ref)
print("hypothesis:", " ".join(hyp))
print("reference: ", " ".join(ref))
print("profile:   ", an.profile.as_row())
print("particles to insert:", [ref[b] for b in an.inserted])
print("best repair:", " ".join(an.transform))
