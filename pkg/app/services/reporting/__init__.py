from .artifacts import ArtifactWriter, config_header, format_cell, read_artifact
from .cache import EnvelopeCache, cache_key
