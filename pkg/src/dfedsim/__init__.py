"""Deterministic simulator for device-edge federated learning studies.

Builds small fleets of devices around one aerial base station, forms
D2D clusters with elected heads, trains from-scratch neural models, and
compares conventional against cluster-routed federated learning on
accuracy and energy.
"""

from .aggregation import (
    AggregationMethod,
    ModelArtifact,
    ProbeSet,
    adaptive_average,
    aggregate_weighted,
    artifact_probabilities,
    closest_member,
    member_probabilities,
    optimize_adaptive_weights,
    retrain_pooled,
    train_meta,
)
from .clustering import (
    Cluster,
    ClusterAssignment,
    ClusterPolicy,
    DataSignature,
    check_homogeneity,
    form_clusters,
)
from .data import (
    DataPlan,
    DatasetSchema,
    DevicePartition,
    FeatureSubsetPlan,
    PartitionPlan,
    gen_ring_sectors,
    gen_synthetic,
    load_csv,
    partition,
    select_features,
    write_csv,
)
from .energy import EnergyParams, EnergyState, apply_round, round_energy
from .errors import (
    ConfigError,
    DimensionMismatch,
    EmptyDataset,
    EmptyMemberList,
    IndexOutOfRange,
    MissingLabels,
    NoConnectableDevice,
    NoEligibleHead,
    ParseError,
    SchemaMismatch,
    SignatureMismatch,
    SimulationError,
)
from .head_selection import HeadCandidateView, HeadPolicy, select_head
from .ml_core import (
    AutoencoderConfig,
    ClassifierConfig,
    DenseNetwork,
    Layer,
    encode,
    load_network,
    predict_proba,
    save_network,
    train_autoencoder,
    train_classifier,
)
from .scenarios import (
    RoundTrace,
    ScenarioConfig,
    ScenarioKind,
    default_devices,
    delay_sweep,
    run_scenario,
    total_energy,
)
from .topology import (
    DeviceNode,
    LinkModel,
    Position,
    can_connect,
    distance_m,
    random_step,
    transmission_delay,
)

__version__ = "0.1.0"
