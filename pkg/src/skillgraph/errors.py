"""Exception hierarchy shared across the package."""


class SkillGraphError(Exception):
    """Base class for all user-facing errors."""


class IngestError(SkillGraphError):
    """Malformed or inconsistent corpus input."""


class GraphError(SkillGraphError):
    """Graph construction or invariant violation."""


class CommunityError(SkillGraphError):
    """Flow computation or community detection failure."""


class QueryError(SkillGraphError):
    """Invalid or unresolvable ranking query."""


class EvalError(SkillGraphError):
    """Judgment/metric input problem."""


class ConfigError(SkillGraphError):
    """Bad pipeline configuration."""
