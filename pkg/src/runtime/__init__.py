# Runtime module initialization
from .exchange import WeightExchange, WeightSnapshot
from .online import DualNetworkPredictor

__all__ = ['WeightExchange', 'WeightSnapshot', 'DualNetworkPredictor']
