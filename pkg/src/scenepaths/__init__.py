"""Indoor scene generation from a scene-type prompt over a partitioned asset catalog."""

from .catalog import Asset, Catalog, ingest, similarity
from .errors import InputError, NoRootError, OracleError, PipelineError, ScenePathsError
from .evalkit import SceneSpec, check_scene, compare
from .layout import PlacedScene, Room, place, validate
from .organizer import LayoutTree, Limits, organize
from .pipeline import SceneRequest, generate
from .retriever import RetrievalConfig, access_filter, retrieve
from .splitter import CategorySet, KnowledgePaths, split

__version__ = "0.1.0"

__all__ = [
    "Asset", "Catalog", "CategorySet", "InputError", "KnowledgePaths", "LayoutTree", "Limits",
    "NoRootError", "OracleError", "PipelineError", "PlacedScene", "RetrievalConfig", "Room",
    "SceneRequest", "SceneSpec", "ScenePathsError", "access_filter", "check_scene", "compare",
    "generate", "ingest", "organize", "place", "retrieve", "similarity", "split", "validate",
]
