"""
Superlocality Toolkit

Exact analysis of tripartite nonsignaling boxes with binary inputs and
outputs: Bell-type expressions, polytope membership, Svetlichny and Mermin
strengths, superlocality verdicts and quantum realizations.

Version: 1.0.0
"""

__version__ = "1.0.0"

# Import main components for easy access
from .box_core import BipartiteBox, Cut, Family, SingleBox, TripartiteBox, VertexLabel, make_family, make_vertex
from .config import Config
from .data_loader import DataLoader
from .exact_scalar import ExactScalar
from .membership import Polytope, membership_report
from .strengths import canonical_decomposition
from .superlocality import genuine_report, superlocality_verdict

__all__ = [
    "BipartiteBox",
    "Config",
    "Cut",
    "DataLoader",
    "ExactScalar",
    "Family",
    "Polytope",
    "SingleBox",
    "TripartiteBox",
    "VertexLabel",
    "canonical_decomposition",
    "genuine_report",
    "make_family",
    "make_vertex",
    "membership_report",
    "superlocality_verdict",
]
