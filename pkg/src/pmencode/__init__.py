"""Turn process-mining event logs into feature matrices.

The main entry points:

- :func:`parse_xes`, :func:`parse_csv` read logs; :func:`validate` checks them.
- :func:`extract_variants` groups cases by trace.
- :func:`apply_encoding` with a spec from :func:`builtin_specs` (or
  :func:`parse_encoder`) produces a :class:`FeatureMatrix`.
- :mod:`pmencode.stats` has coverage, power-law and normality diagnostics
  and variant balancing; :mod:`pmencode.flow` has directly-follows,
  dependency and concurrency relations.
"""

from .encode import (
    EncodingSpec,
    GroupedTable,
    Valuation,
    activity_profile,
    apply_encoding,
    build_dimensions,
    builtin_specs,
    group_by_case,
    kgram,
    numstats,
    one_hot,
    parse_encoder,
    positional,
    valuate,
)
from .errors import ConfigError, DataError, ParseError, PredicateError, ValidationError, ValuationError
from .flow import (
    ConcurrencyRelation,
    DependencyMatrix,
    DirectlyFollows,
    canonicalize,
    concurrency_pairs,
    dependency_matrix,
    directly_follows,
    parallelism_features,
)
from .ingest import CsvMapping, ValidationReport, parse_csv, parse_xes, read_log, validate, write_csv
from .log import (
    ABSENT,
    Case,
    Event,
    EventLog,
    Timestamp,
    Variant,
    VariantTable,
    attribute_value,
    extract_variants,
    make_log,
    subsequence,
)
from .matrix import DimensionIndex, DimensionLabel, FeatureMatrix
from .predicate import FilterPredicate, Term, apply_filter, parse_predicate
from .stats import (
    BalanceStrategy,
    CoverageTable,
    NormalityReport,
    ParetoFit,
    balance,
    coverage_table,
    dependency_frequency_samples,
    normality_diagnostic,
    pareto_fit,
)

__version__ = "0.1.0"
