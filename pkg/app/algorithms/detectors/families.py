"""Statistical detector families.

Each class keeps its fitted state in trailing-underscore attributes and
computes raw scores where larger means more anomalous.
"""

import numpy as np
import pandas as pd
from sklearn.cluster import KMeans
from sklearn.decomposition import PCA
from sklearn.ensemble import IsolationForest
from sklearn.neighbors import LocalOutlierFactor, NearestNeighbors

from app.algorithms.detectors.base import AnomalyDetector
from app.core.exceptions import InvalidParameterError
from app.models.detector import DetectorFamily


class KnnDetector(AnomalyDetector):
    """Distance to the k-th nearest training point."""

    family = DetectorFamily.KNN

    @property
    def k(self) -> int:
        return self.config.param("k", 10)

    def min_rows(self) -> int:
        return self.k + 1

    def _fit(self, values: np.ndarray) -> None:
        self.neighbors_ = NearestNeighbors(n_neighbors=self.k).fit(values)

    def _raw_scores(self, values: np.ndarray) -> np.ndarray:
        distances, _ = self.neighbors_.kneighbors(values, n_neighbors=self.k)
        return distances[:, -1]


class LofDetector(AnomalyDetector):
    """Local outlier factor of each query against the training neighbourhoods."""

    family = DetectorFamily.LOF

    @property
    def k(self) -> int:
        return self.config.param("k", 20)

    def min_rows(self) -> int:
        return self.k + 1

    def _fit(self, values: np.ndarray) -> None:
        self.lof_ = LocalOutlierFactor(n_neighbors=self.k, novelty=True).fit(values)

    def _raw_scores(self, values: np.ndarray) -> np.ndarray:
        return -self.lof_.score_samples(values)


class MahalanobisDetector(AnomalyDetector):
    family = DetectorFamily.MD

    def _fit(self, values: np.ndarray) -> None:
        d = values.shape[1]
        self.mean_ = values.mean(axis=0)
        covariance = np.atleast_2d(np.cov(values, rowvar=False))
        trace = float(np.trace(covariance))
        loading = 1e-6 * trace / d if trace > 0 else 1e-6
        self.precision_ = np.linalg.inv(covariance + loading * np.eye(d))

    def _raw_scores(self, values: np.ndarray) -> np.ndarray:
        centered = values - self.mean_
        squared = np.einsum("ij,jk,ik->i", centered, self.precision_, centered)
        return np.sqrt(np.maximum(squared, 0.0))


class RollingMeanDetector(AnomalyDetector):
    """|x_t - mean(x_{t-w}..x_{t-1})|, max over features; the first row scores 0."""

    family = DetectorFamily.RM

    @property
    def window(self) -> int:
        return self.config.param("window", 20)

    def _fit(self, values: np.ndarray) -> None:
        # Stateless apart from calibration.
        return None

    def _raw_scores(self, values: np.ndarray) -> np.ndarray:
        frame = pd.DataFrame(values)
        trailing = frame.rolling(self.window, min_periods=1).mean().shift(1)
        trailing.iloc[0] = frame.iloc[0]
        return np.abs(frame.to_numpy() - trailing.to_numpy()).max(axis=1)


class HbosDetector(AnomalyDetector):
    """Histogram-based outlier score: sum over features of -log(relative bin height)."""

    family = DetectorFamily.HBOS
    alpha = 0.1

    @property
    def bins(self) -> int:
        return self.config.param("bins", 10)

    def _fit(self, values: np.ndarray) -> None:
        self.edges_: list[np.ndarray] = []
        self.heights_: list[np.ndarray] = []
        for j in range(values.shape[1]):
            counts, edges = np.histogram(values[:, j], bins=self.bins)
            heights = (counts + self.alpha) / (counts.max() + self.alpha)
            self.edges_.append(edges)
            self.heights_.append(heights)

    def _raw_scores(self, values: np.ndarray) -> np.ndarray:
        total = np.zeros(values.shape[0])
        for j, (edges, heights) in enumerate(zip(self.edges_, self.heights_, strict=True)):
            column = values[:, j]
            idx = np.clip(np.searchsorted(edges, column, side="right") - 1, 0, len(heights) - 1)
            h = heights[idx]
            outside = (column < edges[0]) | (column > edges[-1])
            h = np.where(outside, heights.min() * self.alpha / (1 + self.alpha), h)
            total += -np.log(h)
        return total


class PcaDetector(AnomalyDetector):
    """Reconstruction error after projecting onto the top principal components."""

    family = DetectorFamily.PCA

    @property
    def components(self) -> int:
        return self.config.param("components", 1)

    def min_rows(self) -> int:
        return max(2, self.components)

    def _fit(self, values: np.ndarray) -> None:
        if self.components > values.shape[1]:
            raise InvalidParameterError(
                f"PCA detector {self.id}: {self.components} components exceed d={values.shape[1]}"
            )
        self.pca_ = PCA(n_components=self.components).fit(values)

    def _raw_scores(self, values: np.ndarray) -> np.ndarray:
        reconstructed = self.pca_.inverse_transform(self.pca_.transform(values))
        return np.linalg.norm(values - reconstructed, axis=1)


class IsolationForestDetector(AnomalyDetector):
    family = DetectorFamily.IFOREST

    def _fit(self, values: np.ndarray) -> None:
        self.forest_ = IsolationForest(
            n_estimators=self.config.param("trees", 100),
            max_samples=min(self.config.param("subsample", 256), values.shape[0]),
            random_state=self.config.seed,
        ).fit(values)

    def _raw_scores(self, values: np.ndarray) -> np.ndarray:
        return -self.forest_.score_samples(values)


class KMeansDetector(AnomalyDetector):
    """Distance to the nearest centroid."""

    family = DetectorFamily.KMEANS

    def _fit(self, values: np.ndarray) -> None:
        distinct = np.unique(values, axis=0).shape[0]
        clusters = max(1, min(self.config.param("clusters", 8), distinct))
        self.kmeans_ = KMeans(n_clusters=clusters, n_init=10, random_state=self.config.seed).fit(values)

    def _raw_scores(self, values: np.ndarray) -> np.ndarray:
        return self.kmeans_.transform(values).min(axis=1)


DETECTOR_CLASSES: dict[DetectorFamily, type[AnomalyDetector]] = {
    cls.family: cls
    for cls in (
        KnnDetector,
        LofDetector,
        MahalanobisDetector,
        RollingMeanDetector,
        HbosDetector,
        PcaDetector,
        IsolationForestDetector,
        KMeansDetector,
    )
}
