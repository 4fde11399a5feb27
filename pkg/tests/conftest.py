"""Shared fixtures: seeded arrays and small synthetic corpora."""

import numpy as np
import pytest

from coastedge.synth import SynthSpec, generate_corpus, generate_scene


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def clean_scene():
    """Noise-free halfplane scene, boundary exactly at the center column."""
    return generate_scene(SynthSpec(size=64, seed=7, boundary="halfplane", noise_sigma=0.0))


@pytest.fixture
def noisy_scene():
    return generate_scene(SynthSpec(size=64, seed=11, boundary="sinusoid", noise_sigma=300.0))


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Four small scenes on disk with a manifest, for harness/CLI tests."""
    out = tmp_path_factory.mktemp("corpus")
    spec = SynthSpec(size=48, seed=500, boundary="sinusoid", noise_sigma=200.0,
                     sinusoid_amplitude=8.0, sinusoid_period=24.0)
    return generate_corpus(4, spec, out)
