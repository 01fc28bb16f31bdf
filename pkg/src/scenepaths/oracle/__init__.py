from .base import KINDS, Oracle, OracleQuery, OracleReply, parse_answer
from .remote import RemoteOracle
from .rule import RuleOracle
from .rulebook import RuleBook, SceneRules, default_rulebook_path, load_rulebook, rulebook_from_dict

__all__ = [
    "KINDS",
    "Oracle",
    "OracleQuery",
    "OracleReply",
    "RemoteOracle",
    "RuleBook",
    "RuleOracle",
    "SceneRules",
    "default_rulebook_path",
    "load_rulebook",
    "parse_answer",
    "rulebook_from_dict",
]
