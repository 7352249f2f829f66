from .bounds import LipschitzEstimator
from .channels import ChannelGenerator
from .collector import Collector
from .quantizer import Quantizer
from .solvers import SOLVERS

__all__ = ["ChannelGenerator", "LipschitzEstimator", "Quantizer", "Collector", "SOLVERS"]
