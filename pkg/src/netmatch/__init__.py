"""One-sided matching mechanisms on social networks.

Library surface: instance model and validation (:mod:`netmatch.core`), the
four allocation rules (:mod:`netmatch.mechanisms`), brute-force property
verification (:mod:`netmatch.verifier`), random instance generation
(:mod:`netmatch.generators`), the rank-ascension metric
(:mod:`netmatch.metrics`), and the experiment presets behind the CLI
(:mod:`netmatch.experiments`).
"""

from .core import (
    AgentType,
    Instance,
    InstanceFormatError,
    ReportProfile,
    favorite,
    instance_digest,
    load_instance,
    make_instance,
    qualified_set,
    rank,
    report_graph,
    save_instance,
    truthful_reports,
    validate_instance,
    with_preference,
    with_report,
)
from .generators import GenSpec, gen_er, gen_girg, gen_prefs, gen_smallworld, gen_tree
from .mechanisms import (
    LsResult,
    Mechanism,
    MechanismError,
    allocate,
    ls,
    run_mechanism,
    shortest_path_ordering,
    swc,
    swn,
    ttc,
)
from .metrics import AscensionResult, ascension, ascension_result, avg_ascension
from .verifier import (
    Budget,
    BudgetExceededError,
    CoalitionFamily,
    PropertyReport,
    check_ic,
    check_ir,
    classify_allocations,
    enumerate_coalitions,
    enumerate_misreports,
    find_blocking_coalition,
    is_pareto_optimal,
)

__version__ = "0.1.0"
