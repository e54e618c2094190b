"""
A scene lit by two illuminants
==============================

Build one synthetic scene, look at its illumination map in log-chrominance,
and compare single-illuminant baselines with the exact answer.
"""

import numpy as np

from pwcc import formats
from pwcc.baselines import gray_world, white_patch
from pwcc.evaluation import image_error
from pwcc.imagecore import from_log_chroma, to_log_chroma
from pwcc.synth import make_alpha_map, procedural_base, synthesize

rng = np.random.default_rng(0)

# A procedural base image stands in for the white-balanced photograph.
base = 0.8 * procedural_base(rng, 64, 64)

# Warm light on the left, cool light on the right, mixed by a linear ramp.
warm = [1.5, 1.0, 0.6]
cool = [0.7, 1.0, 1.4]
alpha = make_alpha_map("linear", 64, 64, axis="x", reverse=True)
scene = synthesize(base, warm, cool, alpha)
print("illuminant at the left border :", scene.gt_map[32, 0])
print("illuminant at the right border:", scene.gt_map[32, -1])

# In (u, v) = (log R/G, log B/G) the illumination map is what the estimator
# regresses. Going back gives the G-anchored map again.
uv = to_log_chroma(scene.gt_map)
print("u range over the map: %.3f .. %.3f" % (uv[..., 0].min(), uv[..., 0].max()))
print("round trip max error:", np.abs(from_log_chroma(uv) - scene.gt_map).max())

# Gray World and White Patch assume one global light, so they can only be
# right on average. Their outputs are correction gains; the illumination is
# the reciprocal.
for name, fn in (("gray world", gray_world), ("white patch", white_patch)):
    est = 1.0 / fn(scene.input)
    print("%-12s mean angular error %.2f deg" % (name, image_error(scene.gt_map, est)))

# Dividing by the true map recovers the base exactly.
balanced = scene.input / scene.gt_map
print("recovered base max error:", np.abs(balanced - base).max())

formats.write_preview("demo_scene.png", np.concatenate([scene.input, balanced], axis=1))
print("wrote demo_scene.png (input | balanced)")
