"""Multi-objective evolutionary search over phase-wise binary network encodings."""
from .boa import PhaseBayesNet, fit_bn, sample_bn
from .complexity import ComplexityReport, count_structure, estimate_complexity
from .dedup import canonical_network, canonical_phase, connectivity_matrix, is_duplicate, redundancy_census
from .encoding import (
    EncodingConfig,
    GenomeParseError,
    NetworkArchitecture,
    NetworkGenome,
    PhaseGenome,
    PhaseGraph,
    decode_network,
    decode_phase,
    format_genome,
    genotype_configurations,
    parse_genome,
    parse_phase,
    random_genome,
    search_space_size,
)
from .engine import (
    SearchArchive,
    SearchConfig,
    SearchEngine,
    SearchResult,
    load_config,
    paired_normalized_hv,
    resume,
    run_random_search,
    run_search,
)
from .evaluators import (
    ExternalEvaluator,
    ObjectiveCache,
    ObjectiveVector,
    SurrogateEvaluator,
    evaluate_with_cache,
    external_evaluate,
    surrogate_error,
)
from .metrics import hypervolume_2d, normalized_hv, survival_rate
from .moea import crowding_distance, dominates, environmental_selection, fast_nondominated_sort, tournament_select
from .operators import crossover, mutate

__all__ = [
    "ComplexityReport",
    "EncodingConfig",
    "ExternalEvaluator",
    "GenomeParseError",
    "NetworkArchitecture",
    "NetworkGenome",
    "ObjectiveCache",
    "ObjectiveVector",
    "PhaseBayesNet",
    "PhaseGenome",
    "PhaseGraph",
    "SearchArchive",
    "SearchConfig",
    "SearchEngine",
    "SearchResult",
    "SurrogateEvaluator",
    "canonical_network",
    "canonical_phase",
    "connectivity_matrix",
    "count_structure",
    "crossover",
    "crowding_distance",
    "decode_network",
    "decode_phase",
    "dominates",
    "environmental_selection",
    "estimate_complexity",
    "evaluate_with_cache",
    "external_evaluate",
    "fast_nondominated_sort",
    "fit_bn",
    "format_genome",
    "genotype_configurations",
    "hypervolume_2d",
    "is_duplicate",
    "load_config",
    "mutate",
    "normalized_hv",
    "paired_normalized_hv",
    "parse_genome",
    "parse_phase",
    "random_genome",
    "redundancy_census",
    "resume",
    "run_random_search",
    "run_search",
    "sample_bn",
    "search_space_size",
    "surrogate_error",
    "survival_rate",
    "tournament_select",
]

__version__ = "0.1.0"
