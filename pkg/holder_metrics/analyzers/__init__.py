from holder_metrics.analyzers.holder_analyzer import HolderAnalyzer
from holder_metrics.analyzers.hardy_estimator import HardyEstimator
from holder_metrics.analyzers.bounded_reduction import ReductionAnalyzer

__all__ = ['HolderAnalyzer', 'HardyEstimator', 'ReductionAnalyzer']
