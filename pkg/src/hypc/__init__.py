"""hypc: compile deterministic hypotheses into uncertain relational data.

The pipeline takes a complete equation system, extracts its causal
ordering as functional dependencies, folds the dependency chains,
synthesizes a normalized trial schema, and finally introduces the
theoretical and empirical uncertainty of loaded trial data as condition
columns over discrete random variables.
"""

from .errors import (
    CapacityError,
    DomainError,
    IntegrityError,
    PipelineError,
    PreconditionError,
)
from .fd import (
    FD,
    FDSet,
    PHI,
    TID,
    UPSILON,
    attribute_closure,
    closure_oracle,
    fd,
    is_canonical,
    is_parsimonious,
    left_reduce,
    member,
    parse_fds,
    union_rule,
)
from .folding import fold, fold_attribute, is_folded
from .structures import (
    CausalMapping,
    Structure,
    causal_graph,
    causal_mapping,
    check_complete,
    classify,
    encode_structure,
    minimal_substructures,
    structure_from_dict,
)
from .synthesis import (
    RelScheme,
    Schema,
    chase_oracle,
    is_3nf,
    is_bcnf,
    lossless_join,
    preserves,
    synthesize,
)
from .uintro import (
    ProjectionMap,
    UFactorGroups,
    build_explanation,
    introduce_uncertainty,
    learn_u_factors,
    u_factorize,
    u_propagate,
)
from .urelations import (
    CertainRelation,
    RandVar,
    URelation,
    WorldTable,
    confidence,
    decode,
    enumerate_worlds,
    repair_key,
    u_join,
    u_project,
    u_select,
)

__version__ = "0.1.0"
