"""
Paired evaluation and reporting
===============================

For each QP the image is searched exhaustively and with pruning. The run
reports time saving, SSIMV overhead, how often pruning kept the exhaustive
winner, and the BD-rate between the two rate/PSNR curves. The same report
is what the ``qtmt-ssimv search`` command writes to disk.
"""

import json
from pathlib import Path

from qtmt_ssimv.experiment import evaluate
from qtmt_ssimv.media_io import Plane, load_pgm
from qtmt_ssimv.reporting import build_report, input_entry
from qtmt_ssimv.search import SearchConfig

CORPUS = Path(__file__).resolve().parent.parent / "data" / "corpus"
OUT = Path("demo_out")
OUT.mkdir(exist_ok=True)

# A 128x128 crop keeps this under a minute
full = load_pgm(CORPUS / "chelsea.pgm")
plane = Plane(full.samples[64:192, 64:192])
cfg = SearchConfig()
ev = evaluate([plane], cfg, qps=(22, 27, 32, 37))

print(f"TS {ev.timing.ts_percent:.1f}%  OH {ev.timing.oh_percent:.1f}%  BD-rate {ev.bd_rate:.3f}%")
print(f"accuracy on multi-type winners: {ev.accuracy.overall.accuracy:.3f} "
      f"({ev.accuracy.overall.hits}/{ev.accuracy.overall.total})")
for size in ("32x32", "16x16"):
    t = ev.accuracy.by_size.get(size)
    if t:
        print(f"  {size}: {t.accuracy:.3f} over {t.total}")
for a, t in zip(ev.anchor, ev.test):
    print(f"  QP {a['qp']}: rate {a['rate']:.0f} -> {t['rate']:.0f} bits, "
          f"PSNR {a['psnr']:.2f} -> {t['psnr']:.2f} dB")

doc = build_report([input_entry("chelsea_crop", 128, 128, 8, 1, ev)], cfg, (22, 27, 32, 37))
(OUT / "report.json").write_text(json.dumps(doc, indent=1))
print("schema-valid report written to", OUT / "report.json")
