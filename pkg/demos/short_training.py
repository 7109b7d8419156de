"""A miniature adversarial run: 400 epochs, printed metric rows.

Full-protocol runs (4500 epochs, 100 samples, 1000 shots) live behind
the `hqgan` command line; this script trains the same pipeline at a
reduced scale so the mechanics are visible in under a minute:

  * both losses head toward their smoothed-equilibrium values
    (c_d -> -(0.9 ln 0.474 + ln 0.526) ~ 1.317, c_g -> ln(1.9/0.9) ~ 0.747),
  * the KL between target and generated histograms falls,
  * the three circuit angles drift from their initial values.

Run:  python demos/short_training.py
"""

import numpy as np

from hqgan.generator import EstimatorConfig
from hqgan.training import THETA_STAR, TrainConfig, make_target, train

cfg = TrainConfig(
    epochs=400,
    n_samples=50,
    estimator=EstimatorConfig(mode="shots", n_shots=250),
    seed=2,
    metric_sample_count=500,
)

target = make_target(THETA_STAR, 1000, EstimatorConfig(mode="shots", n_shots=1000),
                     np.random.default_rng(2024))
print("target: %d samples, mean % .4f, std %.4f" %
      (target.size, target.mean(), target.std()))
print("initial angles: %s   target angles: %s" % (list(cfg.theta_init), list(THETA_STAR)))
print()
print("epoch    kl     c_d    c_g    |dD|     |dG|     theta")


def show(rec):
    if rec.epoch % 50 == 0:
        print("%5d  %.4f  %.3f  %.3f  %.2e %.2e  [%.3f %.3f %.3f]"
              % (rec.epoch, rec.kl, rec.c_d, rec.c_g, rec.d_grad, rec.g_grad,
                 rec.theta[0], rec.theta[1], rec.theta[2]))


state, records = train(cfg, target, on_record=show)

kls = np.array([r.kl for r in records])
print()
print("KL: start %.4f, min %.4f (epoch %d), final %.4f"
      % (kls[0], kls.min(), int(np.argmin(kls)), kls[-1]))
print("equilibrium reference: c_d = 1.3170, c_g = 0.7472")
print("last-50-epoch averages: c_d = %.4f, c_g = %.4f"
      % (np.mean([r.c_d for r in records[-50:]]),
         np.mean([r.c_g for r in records[-50:]])))
