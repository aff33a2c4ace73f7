"""Dynamics on networks: Laplacian dynamics, external equitable partitions,
structural balance and Markov Stability community detection."""

__version__ = "0.1.0"

from .errors import InputError, NetdynError, NotEEPError, NumericalError, UnbalancedGraphError
from .graph import Graph, Partition, load_graph

__all__ = [
    "__version__",
    "Graph",
    "Partition",
    "load_graph",
    "NetdynError",
    "InputError",
    "NumericalError",
    "NotEEPError",
    "UnbalancedGraphError",
]
