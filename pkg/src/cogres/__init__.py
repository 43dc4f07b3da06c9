"""Reservoir-computing connectome templates with multi-sensory memory capacity.

Phase 1 encodes each subject's BOLD series with a fixed random reservoir,
correlates the resulting states into a functional connectome and averages a
group into a template. Phase 2 uses a template as the recurrent matrix of an
echo state network and measures how well it recalls delayed inputs.
"""

from .cognition import (
    build_cognitive_reservoir,
    make_delay_target,
    mc_suite,
    memory_capacity,
    predict_readout,
    train_readout,
)
from .connectome import aggregate_cbt, build_group_cbt, learn_signals, pearson_connectome
from .core import (
    CognitiveConfig,
    Connectome,
    EvalReport,
    MCReport,
    ReservoirConfig,
    ReservoirWeights,
    SubjectManifest,
    TimeSeries,
)
from .evaluation import centeredness, classify_cbt_shot, make_folds, run_full_evaluation
from .graphmetrics import (
    eigenvector_centrality,
    information_centrality,
    kl_divergence,
    laplacian_centrality,
    node_strength,
    pagerank,
    topology_report,
)
from .io import load_connectome, load_manifest, load_timeseries, save_connectome, save_timeseries
from .reservoir import check_echo_state, estimate_spectral_radius, init_reservoir, run_reservoir
from .synth import synth_bold, synth_cohort, synth_modality

__version__ = "0.1.0"
