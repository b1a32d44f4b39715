"""relgraph: explore relational databases as typed graphs with enriched tables."""

from .model import InstanceGraph, SchemaGraph

__all__ = ["InstanceGraph", "SchemaGraph"]
__version__ = "0.1.0"
