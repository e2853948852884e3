"""Spectral and null-model analysis of weighted directed bilateral-flow
networks: per-period eigen decompositions, market-mode extraction, inverse
participation ratios, shuffled null ensembles, participation-vs-volume
tables, and dendrogram clustering."""

from .cluster import (
    Dendrogram,
    Merge,
    agglomerate,
    dendrogram_to_json,
    distance_matrix,
    leaf_order,
    to_newick,
)
from .errors import ConfigError, ConvergenceError, DataError, FlowspectraError
from .ingest import (
    BisConversion,
    BisMapping,
    FlowRecord,
    FlowRecordSet,
    convert_bis_file,
    convert_bis_lbs,
    derive_seed,
    generate_synthetic,
    generate_synthetic_series,
    load_bis_mapping,
    load_bis_mapping_file,
    parse_flow_csv,
    parse_flow_file,
    serialize_flow_csv,
    write_flow_file,
)
from .network import (
    NetworkSnapshot,
    SymmetricMatrix,
    build_snapshot,
    density,
    snapshot_from_json,
    snapshot_to_dot,
    snapshot_to_flow_csv,
    snapshot_to_json,
    symmetrize,
    total_volume,
    volume_share,
)
from .nullmodel import (
    MODE_LINK_SHUFFLE,
    MODE_WEIGHT_PERMUTE,
    NullEnsembleStats,
    null_ensemble,
    shuffle_snapshot,
)
from .pipeline import (
    PeriodResult,
    PipelineConfig,
    TimeSeriesResult,
    analyze_period,
    config_from_sources,
    dataset_fingerprint,
    export,
    run_timeseries,
    timeseries_from_json,
    timeseries_to_json,
)
from .spectral import (
    MODE_DIRECTED,
    MODE_SYMMETRIZED,
    SpectralSummary,
    full_spectrum,
    ipr,
    leading_eigenpair,
    mean_ipr,
    participation_percent,
    perron_summary,
    power_iteration,
    summary_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "BisConversion",
    "BisMapping",
    "ConfigError",
    "ConvergenceError",
    "DataError",
    "Dendrogram",
    "FlowRecord",
    "FlowRecordSet",
    "FlowspectraError",
    "MODE_DIRECTED",
    "MODE_LINK_SHUFFLE",
    "MODE_SYMMETRIZED",
    "MODE_WEIGHT_PERMUTE",
    "Merge",
    "NetworkSnapshot",
    "NullEnsembleStats",
    "PeriodResult",
    "PipelineConfig",
    "SpectralSummary",
    "SymmetricMatrix",
    "TimeSeriesResult",
    "agglomerate",
    "analyze_period",
    "build_snapshot",
    "config_from_sources",
    "convert_bis_file",
    "convert_bis_lbs",
    "dataset_fingerprint",
    "dendrogram_to_json",
    "density",
    "derive_seed",
    "distance_matrix",
    "export",
    "full_spectrum",
    "generate_synthetic",
    "generate_synthetic_series",
    "ipr",
    "leading_eigenpair",
    "leaf_order",
    "load_bis_mapping",
    "load_bis_mapping_file",
    "mean_ipr",
    "null_ensemble",
    "parse_flow_csv",
    "parse_flow_file",
    "participation_percent",
    "perron_summary",
    "power_iteration",
    "run_timeseries",
    "serialize_flow_csv",
    "shuffle_snapshot",
    "snapshot_from_json",
    "snapshot_to_dot",
    "snapshot_to_flow_csv",
    "snapshot_to_json",
    "summary_to_json",
    "symmetrize",
    "timeseries_from_json",
    "timeseries_to_json",
    "to_newick",
    "total_volume",
    "volume_share",
    "write_flow_file",
]
