# Observability module initialization
from .tracker import RunTracker, get_tracker

__all__ = ['RunTracker', 'get_tracker']
