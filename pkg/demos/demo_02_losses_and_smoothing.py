"""
Training objective and label smoothing
======================================

The loss is an L2 data term plus a total-variation penalty on the predicted
(u, v) map. Label smoothing jitters the mixing weights of the target.
"""

import numpy as np

from pwcc.losses import combined_loss, tv_loss
from pwcc.synth import make_alpha_map, smooth_alpha

rng = np.random.default_rng(1)

# A smooth ramp has little variation; the same ramp with noise has a lot.
ramp = np.linspace(-0.3, 0.3, 32)[None, :, None] * np.ones((32, 1, 2))
noisy = ramp + rng.normal(scale=0.05, size=ramp.shape)
print("TV of ramp       %.4f" % tv_loss(ramp)[0])
print("TV of noisy ramp %.4f" % tv_loss(noisy)[0])

# The two preset TV weights, applied to the noisy map against the clean target.
for lam in (2e-4, 2e-3):
    report, _ = combined_loss(noisy, ramp, lam)
    print("lambda_tv %.0e: l2 %.5f  tv %.4f  total %.5f" % (lam, report.l2, report.tv, report.total))

# Gradient descent on TV alone flattens the map.
p = noisy.copy()
for step in range(200):
    p -= 0.5 * tv_loss(p)[1]
print("TV after 200 descent steps %.4f" % tv_loss(p)[0])

# Label smoothing: noise with standard deviation alpha / 10, then a clamp.
alpha = make_alpha_map("radial", 64, 64, cx=0.5, cy=0.5, r=0.6)
smoothed = smooth_alpha(alpha, w_n=10, seed=3)
diff = smoothed - alpha
band = (alpha > 0.45) & (alpha < 0.55)
print("alpha near 0.5: noise std %.4f (about 0.05)" % diff[band].std())
print("alpha < 0.1:    noise std %.4f" % diff[alpha < 0.1].std())
# near alpha = 1 the clamp cuts off the upper tail
print("alpha > 0.9:    mean shift %+.4f" % diff[alpha > 0.9].mean())

# At fixed alpha the perturbation looks Gaussian.
d = (smooth_alpha(np.full((400, 400), 0.5), 10, seed=4) - 0.5).ravel()
m = d.mean()
s = d.std()
print("alpha = 0.5: mean %+.5f, std %.5f, skew %+.4f, excess kurtosis %+.4f"
      % (m, s, np.mean((d - m) ** 3) / s ** 3, np.mean((d - m) ** 4) / s ** 4 - 3))
