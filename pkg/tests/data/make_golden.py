"""Regenerate the frozen estimator forward output (run once; the result is committed)."""

import os

import numpy as np

from pwcc.estimator import forward, init_params

HERE = os.path.dirname(os.path.abspath(__file__))


def golden_input():
    return np.random.default_rng(2024).normal(scale=0.5, size=(16, 16, 2)).astype(np.float32)


if __name__ == "__main__":
    out, _ = forward(init_params(7), golden_input())
    np.save(os.path.join(HERE, "forward_seed7_16x16.npy"), out)
