# CLI module initialization
from .files import RunManifest, prepare_output_dir

__all__ = ['RunManifest', 'prepare_output_dir']
