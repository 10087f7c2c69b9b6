"""Co-occurrence networks of technology terms, cluster evolution, and break tests."""

from .breakcheck import (
    BreakTestResult,
    IndexSeries,
    OlsFit,
    SeriesPoint,
    chow_test,
    f_survival,
    index_series,
    ols_fit,
    pearson,
    regularized_incomplete_beta,
    term_trend,
)
from .cograph import (
    CoGraph,
    GraphEdge,
    GraphNode,
    build_cooccurrence,
    export_graph_json,
    export_graphml,
    import_graph_json,
    import_graphml,
    top_n_filter,
)
from .community import (
    ClusterLabel,
    Partition,
    export_partition_json,
    louvain,
    modularity,
    suggest_labels,
)
from .config import PipelineConfig, build_config, read_config_file
from .corpus import (
    Corpus,
    Document,
    TimeWindow,
    load_corpus,
    load_windows,
    normalize_tag,
    save_corpus,
    window_filter,
)
from .errors import (
    CommunityError,
    ConfigError,
    CorpusError,
    GraphError,
    LexiconError,
    StatsError,
    SynthError,
    TechfluxError,
    TransitionError,
)
from .lexicon import TermLexicon, compile_lexicon, extract_terms, lexicon_from_records
from .synth import (
    GroundTruth,
    PlantSpec,
    SplitMix64,
    generate_corpus,
    load_plant_spec,
    plant_spec_from_records,
)
from .transition import (
    SimilarityMatrix,
    TransitionEvent,
    TransitionReport,
    alluvial_export,
    biadjacency,
    classify_events,
    inheritance_indices,
    similarity_matrix,
    transition_report,
)

__version__ = "0.1.0"

__all__ = [
    "BreakTestResult",
    "ClusterLabel",
    "CoGraph",
    "CommunityError",
    "ConfigError",
    "Corpus",
    "CorpusError",
    "Document",
    "GraphEdge",
    "GraphError",
    "GraphNode",
    "GroundTruth",
    "IndexSeries",
    "LexiconError",
    "OlsFit",
    "Partition",
    "PipelineConfig",
    "PlantSpec",
    "SeriesPoint",
    "SimilarityMatrix",
    "SplitMix64",
    "StatsError",
    "SynthError",
    "TechfluxError",
    "TermLexicon",
    "TimeWindow",
    "TransitionError",
    "TransitionEvent",
    "TransitionReport",
    "alluvial_export",
    "biadjacency",
    "build_config",
    "build_cooccurrence",
    "chow_test",
    "classify_events",
    "compile_lexicon",
    "export_graph_json",
    "export_graphml",
    "export_partition_json",
    "extract_terms",
    "f_survival",
    "generate_corpus",
    "import_graph_json",
    "import_graphml",
    "index_series",
    "inheritance_indices",
    "lexicon_from_records",
    "load_corpus",
    "load_plant_spec",
    "load_windows",
    "louvain",
    "modularity",
    "normalize_tag",
    "ols_fit",
    "pearson",
    "plant_spec_from_records",
    "read_config_file",
    "regularized_incomplete_beta",
    "save_corpus",
    "similarity_matrix",
    "suggest_labels",
    "term_trend",
    "top_n_filter",
    "transition_report",
    "window_filter",
]
