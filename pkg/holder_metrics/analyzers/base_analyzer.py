import logging
from abc import ABC, abstractmethod
from typing import List

from pydantic import BaseModel

from holder_metrics.catalog import DomainSpec
from holder_metrics.config import Config
from holder_metrics.geometry.riemann_sphere import BoundaryNet

logger = logging.getLogger(__name__)


class BaseAnalyzer(ABC):
    """Base class for analyzers bound to one catalog domain"""

    def __init__(self, domain: DomainSpec, mesh: float = Config.MESH):
        self.domain = domain
        self.mesh = mesh
        self.notes: List[str] = []
        self._boundary = None

    @property
    def boundary(self) -> BoundaryNet:
        """Boundary net of the domain at this analyzer's chordal mesh"""
        if self._boundary is None:
            self._boundary = self.domain.boundary_sampler(self.mesh)
            logger.debug(f"{self.domain.name}: boundary net of {self._boundary.points.size} points, gap {self._boundary.delta:.3g}")
        return self._boundary

    def note(self, message: str):
        """Record a non-fatal condition for the report"""
        logger.warning(f"{self.domain.name}: {message}")
        self.notes.append(message)

    @abstractmethod
    def analyze(self) -> BaseModel:
        """Run the analysis and return its report model"""
        pass

    def get_notes(self) -> List[str]:
        return list(self.notes)
