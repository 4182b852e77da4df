"""Score a few hand-made Japanese hypotheses with BLEU and RIBES.

Shows the BLEU breakdown (precisions, brevity penalty, geometric mean) and
how RIBES reacts to reordering that BLEU barely notices.

    python demos/metrics_tour.py
"""

from apekit.mtmetrics import bleu_corpus, format_table, report_row, ribes_sentence

ref = ("先生", "は", "図書館", "で", "本", "を", "読み", "ました", "。")

systems = {
    "exact": ref,
    "dropped-particle": ("先生", "図書館", "で", "本", "を", "読み", "ました", "。"),
    "swapped-chunks": ("本", "を", "図書館", "で", "先生", "は", "読み", "ました", "。"),
    "short": ("先生", "は", "本", "を", "読み", "ました"),
}

rows = {name: report_row([hyp], [ref]) for name, hyp in systems.items()}
print(format_table(rows))
print()

for name, hyp in systems.items():
    nkt, precision, bp, score = ribes_sentence(hyp, ref)
    rep = bleu_corpus([hyp], [ref])
    print(f"{name:17s} NKT {nkt:.3f}  unigram P {precision:.3f}  RIBES {100 * score:6.2f}   "
          f"BLEU = BP {rep.brevity_penalty:.3f} x GeoMean {rep.geo_mean:.2f} = {rep.bleu:.2f}")
