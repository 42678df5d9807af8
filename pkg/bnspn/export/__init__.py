from .dot import bn_to_dot, circuit_to_dot, dag_to_dot

__all__ = ["bn_to_dot", "circuit_to_dot", "dag_to_dot"]
