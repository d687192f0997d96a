"""Average-joint generalization bounds: discrete enumeration and a Gaussian example."""

from . import avgjoint, bounds, gaussian, measures
from .avgjoint import LearnerSpec, LossTable, average_joint, gen_error_direct, gen_error_via_avg
from .bounds import BoundReport, LossRegularity, discrete_report, gaussian_report
from .measures import DiscreteDist, JointTable, js, kl, tv, wasserstein1

__all__ = [
    "avgjoint", "bounds", "gaussian", "measures",
    "LearnerSpec", "LossTable", "average_joint", "gen_error_direct", "gen_error_via_avg",
    "BoundReport", "LossRegularity", "discrete_report", "gaussian_report",
    "DiscreteDist", "JointTable", "js", "kl", "tv", "wasserstein1",
]
