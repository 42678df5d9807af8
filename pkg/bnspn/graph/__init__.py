from .dag import (
    Dag,
    Edge,
    NodeId,
    Ordering,
    Relatives,
    d_separated,
    d_separated_by_paths,
    default_elimination_order,
    is_topological,
    moral_closure,
    moralization_edges,
    relatives,
    reverse_topological_orderings,
    reversed_ordering,
    v_structures,
    validate_ordering,
)

__all__ = [
    "Dag",
    "Edge",
    "NodeId",
    "Ordering",
    "Relatives",
    "d_separated",
    "d_separated_by_paths",
    "default_elimination_order",
    "is_topological",
    "moral_closure",
    "moralization_edges",
    "relatives",
    "reverse_topological_orderings",
    "reversed_ordering",
    "v_structures",
    "validate_ordering",
]
