"""scikit-learn style wrappers around the query structures.

``fit`` builds the structure, ``predict`` answers a batch of edge-point
queries. Parameters follow the estimator conventions so the wrappers work with
``clone`` and ``get_params``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .mesh import SurfaceMesh, point_on_edge
from .queries import build_edge_structure, build_one_point, one_point_query, two_point_query


def _rows(X, width: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != width:
        raise ValueError(f"expected an array of shape (n, {width})")
    return X


class OnePointDistance(BaseEstimator):
    """Distances from one source s = point(edge, u) to points on edges.

    ``predict`` takes rows (target edge, target parameter).
    """

    def __init__(self, mesh: SurfaceMesh | None = None, edge: int = 0, u: float = 0.5):
        self.mesh = mesh
        self.edge = edge
        self.u = u

    def fit(self, X=None, y=None):
        self.structure_ = build_one_point(self.mesh, point_on_edge(self.mesh, self.edge, self.u))
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "structure_")
        X = _rows(X, 2)
        return np.array([one_point_query(self.structure_, point_on_edge(self.mesh, int(E), lam))[0] for E, lam in X])


class EdgeToEdgeDistance(BaseEstimator):
    """Distances from points of one source edge to points on any edge.

    ``predict`` takes rows (source parameter, target edge, target parameter).
    """

    def __init__(self, mesh: SurfaceMesh | None = None, edge: int = 0):
        self.mesh = mesh
        self.edge = edge

    def fit(self, X=None, y=None):
        self.structure_ = build_edge_structure(self.mesh, self.edge)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "structure_")
        X = _rows(X, 3)
        mesh = self.mesh
        return np.array([
            two_point_query(self.structure_, point_on_edge(mesh, self.edge, u), point_on_edge(mesh, int(E), lam))[0]
            for u, E, lam in X
        ])
