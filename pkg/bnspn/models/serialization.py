"""
JSON formats for Bayesian networks and circuits.

BN:  {"variables": [{"name", "cardinality", "kind"}], "edges": [[from, to]],
      "cpts": {"<name>": {"parents": [names], "table": [[...]]}}}
SPN: {"stage", "root", "variables": [...], "nodes": [{"id", "type", ...}],
      "provenance": {"<id>": variable index}}
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from ..graph.dag import Dag
from ..utils.errors import BnSpnError, ModelFormatError
from .bayesnet import BayesNet, Cpt, Variable, VariableKind
from .circuit import (
    Circuit,
    CircuitNode,
    IndicatorNode,
    OneNode,
    ParamNode,
    ProductNode,
    Stage,
    SumNode,
    TerminalNode,
    children_of,
)

PathLike = Union[str, Path]


def _variables_to_list(variables) -> List[Dict[str, Any]]:
    return [v.to_dict() for v in variables]


def _variables_from_list(raw) -> List[Variable]:
    if not isinstance(raw, list):
        raise ModelFormatError("'variables' must be a list")
    variables = []
    for entry in raw:
        try:
            kind = VariableKind(entry.get("kind", VariableKind.OBSERVABLE.value))
            variables.append(Variable(str(entry["name"]), int(entry.get("cardinality", 2)), kind))
        except (KeyError, TypeError, ValueError) as e:
            raise ModelFormatError(f"bad variable entry {entry!r}: {e}") from e
    return variables


def bn_to_dict(bn: BayesNet) -> Dict[str, Any]:
    names = bn.names
    return {
        "variables": _variables_to_list(bn.variables),
        "edges": [[names[u], names[v]] for u, v in bn.dag.sorted_edges()],
        "cpts": {
            names[cpt.child]: {
                "parents": [names[p] for p in cpt.parents],
                "table": cpt.table.tolist(),
            }
            for cpt in bn.cpts
        },
    }


def bn_from_dict(data: Dict[str, Any]) -> BayesNet:
    """Parse a BN; edge endpoints and parents may be names or indices"""
    if not isinstance(data, dict):
        raise ModelFormatError("BN document must be a JSON object")
    try:
        variables = _variables_from_list(data["variables"])
        names = [v.name for v in variables]

        def resolve(ref) -> int:
            if isinstance(ref, int):
                if not 0 <= ref < len(names):
                    raise ModelFormatError(f"variable index {ref} out of range")
                return ref
            if ref not in names:
                raise ModelFormatError(f"unknown variable {ref!r}")
            return names.index(ref)

        dag = Dag.from_edges(len(variables), [(resolve(u), resolve(v)) for u, v in data.get("edges", [])])
        raw_cpts = data["cpts"]
        cpts = []
        for node, name in enumerate(names):
            if name not in raw_cpts:
                raise ModelFormatError(f"missing CPT for {name!r}")
            entry = raw_cpts[name]
            parents = tuple(resolve(p) for p in entry.get("parents", []))
            cpts.append(Cpt(node, parents, np.array(entry["table"], dtype=float)))
        return BayesNet(tuple(variables), dag, tuple(cpts))
    except ModelFormatError:
        raise
    except (KeyError, TypeError) as e:
        raise ModelFormatError(f"malformed BN document: {e}") from e
    except BnSpnError as e:
        raise ModelFormatError(f"invalid BN: {e}") from e


def _node_to_dict(ref: int, node: CircuitNode) -> Dict[str, Any]:
    if isinstance(node, SumNode):
        return {"id": ref, "type": "sum", "children": list(node.children), "weights": list(node.weights)}
    if isinstance(node, ProductNode):
        return {"id": ref, "type": "product", "children": list(node.children)}
    if isinstance(node, IndicatorNode):
        return {"id": ref, "type": "indicator", "variable": node.variable, "value": node.value}
    if isinstance(node, ParamNode):
        return {"id": ref, "type": "param", "value": node.value}
    if isinstance(node, TerminalNode):
        return {"id": ref, "type": "terminal", "variable": node.variable, "distribution": list(node.distribution)}
    return {"id": ref, "type": "one"}


def circuit_to_dict(c: Circuit) -> Dict[str, Any]:
    return {
        "stage": c.stage.value,
        "root": c.root,
        "variables": _variables_to_list(c.variables),
        "nodes": [_node_to_dict(ref, node) for ref, node in enumerate(c.nodes)],
        "provenance": {str(ref): var for ref, var in sorted(c.provenance.items())},
    }


def _node_from_dict(entry: Dict[str, Any], children: List[int]) -> CircuitNode:
    kind = entry["type"]
    if kind == "sum":
        return SumNode(tuple(children), tuple(float(w) for w in entry["weights"]))
    if kind == "product":
        return ProductNode(tuple(children))
    if kind == "indicator":
        return IndicatorNode(int(entry["variable"]), int(entry["value"]))
    if kind == "param":
        return ParamNode(float(entry["value"]))
    if kind == "terminal":
        return TerminalNode(int(entry["variable"]), tuple(float(p) for p in entry["distribution"]))
    if kind == "one":
        return OneNode()
    raise ModelFormatError(f"unknown node type {kind!r}")


def circuit_from_dict(data: Dict[str, Any]) -> Circuit:
    """Parse a circuit; node ids are arbitrary and get renumbered children-first"""
    if not isinstance(data, dict):
        raise ModelFormatError("SPN document must be a JSON object")
    try:
        variables = _variables_from_list(data["variables"])
        entries = {int(entry["id"]): entry for entry in data["nodes"]}
        if len(entries) != len(data["nodes"]):
            raise ModelFormatError("duplicate node ids")
        root_id = int(data["root"])

        order: List[int] = []
        state: Dict[int, int] = {}  # 1 = on stack, 2 = done
        stack = [(root_id, False)]
        while stack:
            node_id, expanded = stack.pop()
            if node_id not in entries:
                raise ModelFormatError(f"dangling node id {node_id}")
            if expanded:
                state[node_id] = 2
                order.append(node_id)
                continue
            if state.get(node_id) == 2:
                continue
            if state.get(node_id) == 1:
                raise ModelFormatError(f"cycle through node {node_id}")
            state[node_id] = 1
            stack.append((node_id, True))
            for child in reversed(entries[node_id].get("children", [])):
                if state.get(int(child)) == 1:
                    raise ModelFormatError(f"cycle through node {child}")
                if state.get(int(child)) != 2:
                    stack.append((int(child), False))

        # keep the document's numbering when it already lists children first
        if all(int(c) < node_id for node_id in order for c in entries[node_id].get("children", [])):
            order.sort()
        renumber = {node_id: ref for ref, node_id in enumerate(order)}
        nodes = [
            _node_from_dict(entries[node_id], [renumber[int(c)] for c in entries[node_id].get("children", [])])
            for node_id in order
        ]
        provenance = {
            renumber[int(node_id)]: int(var)
            for node_id, var in data.get("provenance", {}).items()
            if int(node_id) in renumber
        }
        stage = Stage(data.get("stage", Stage.SPN.value))
        return Circuit(tuple(nodes), renumber[root_id], stage, tuple(variables), provenance)
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"malformed SPN document: {e}") from e


def _read_json(path: PathLike) -> Any:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{path}: invalid JSON ({e})") from e


def _write_json(data: Any, path: PathLike) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=False) + "\n")


def load_bn(path: PathLike) -> BayesNet:
    return bn_from_dict(_read_json(path))


def save_bn(bn: BayesNet, path: PathLike) -> None:
    _write_json(bn_to_dict(bn), path)


def load_circuit(path: PathLike) -> Circuit:
    return circuit_from_dict(_read_json(path))


def save_circuit(c: Circuit, path: PathLike) -> None:
    _write_json(circuit_to_dict(c), path)


def load_model(path: PathLike) -> Union[BayesNet, Circuit]:
    """BN or circuit, told apart by the presence of a node list"""
    data = _read_json(path)
    if isinstance(data, dict) and "nodes" in data:
        return circuit_from_dict(data)
    return bn_from_dict(data)
