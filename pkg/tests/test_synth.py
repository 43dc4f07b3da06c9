import numpy as np
import pytest

from cogres.connectome import pearson_connectome
from cogres.errors import ConfigError, DimensionError
from cogres.synth import MODALITY_KINDS, GroupProfile, synth_bold, synth_modality


def test_bold_shapes_and_determinism():
    a = synth_bold(3, rois=20, timepoints=50, profile=GroupProfile(1), seed=5)
    b = synth_bold(3, rois=20, timepoints=50, profile=GroupProfile(1), seed=5)
    assert all(s.data.shape == (50, 20) and np.all(np.isfinite(s.data)) for s in a)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.data, y.data)


def test_bold_subject_streams_independent_of_count():
    few = synth_bold(2, rois=10, timepoints=30, seed=1)
    many = synth_bold(5, rois=10, timepoints=30, seed=1)
    np.testing.assert_array_equal(few[1].data, many[1].data)


def test_noise_free_groups_separate():
    g1 = synth_bold(6, 25, 300, GroupProfile(base_seed=1, noise=0.0), seed=0)
    g2 = synth_bold(6, 25, 300, GroupProfile(base_seed=2, noise=0.0), seed=10)
    c1 = [pearson_connectome(s).weights for s in g1]
    c2 = [pearson_connectome(s).weights for s in g2]
    within = np.mean([np.linalg.norm(a - b) for i, a in enumerate(c1) for b in c1[i + 1 :]])
    across = np.mean([np.linalg.norm(a - b) for a in c1 for b in c2])
    assert within < across


def test_bold_invalid_dims():
    with pytest.raises(DimensionError):
        synth_bold(1, rois=1)
    with pytest.raises(DimensionError):
        synth_bold(1, timepoints=5)


def test_visual_mostly_constant():
    x = synth_modality("visual-like", 1000, 4, seed=3).data
    unchanged = np.all(np.diff(x, axis=0) == 0, axis=1)
    assert unchanged.mean() >= 0.85


@pytest.mark.parametrize("kind", MODALITY_KINDS)
def test_modalities_bounded_and_deterministic(kind):
    a = synth_modality(kind, 300, 5, seed=2).data
    assert a.shape == (300, 5)
    assert np.all((a >= -1) & (a <= 1))
    np.testing.assert_array_equal(a, synth_modality(kind, 300, 5, seed=2).data)
    assert not np.array_equal(a, synth_modality(kind, 300, 5, seed=3).data)


def test_modality_errors():
    with pytest.raises(ConfigError):
        synth_modality("smell-like", 100, 2)
    with pytest.raises(DimensionError):
        synth_modality("audio-like", 10, 2)
