"""
A small end-to-end experiment
=============================

Generate a few dozen scenes, train the estimator briefly, post-filter its
maps, and print a mean, median and quartile comparison. The full acceptance
run uses 400 scenes at 64x64 and 300 epochs; this one is much smaller.
"""

import tempfile

from pwcc.bilateral import PAPER_DEFAULT
from pwcc.estimator import preset_config, train
from pwcc.evaluation import evaluate_method, format_table
from pwcc.synth import SynthConfig, generate_dataset, load_manifest

out = tempfile.mkdtemp(prefix="pwcc_demo_")
generate_dataset(SynthConfig(count=80, width=32, height=32, seed=1), out)
manifest = load_manifest(out + "/manifest.json")
print("dataset in", out)

# pwcc_v1 uses the smaller TV weight and no label smoothing.
cfg = preset_config("pwcc_v1", epochs=40, input_size=32)


def show(rec):
    if rec.epoch % 10 == 0:
        print("epoch %3d  loss %.5f  val %.2f deg" % (rec.epoch, rec.train_loss, rec.val_mean_angular_error))


params, log = train(manifest, cfg, callback=show)

rows = [
    evaluate_method(manifest, "val", "gray_world"),
    evaluate_method(manifest, "val", "white_patch"),
    evaluate_method(manifest, "val", "trained", params),
]
filtered = evaluate_method(manifest, "val", "trained", params, postfilter=PAPER_DEFAULT)
rows[-1].method = "pwcc_v1"
filtered.method = "pwcc_v1+bf"
print()
print(format_table(rows + [filtered]))
