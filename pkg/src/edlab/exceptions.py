"""Exception types raised across the package."""


class EdlabError(ValueError):
    """Base class for input errors raised by edlab."""


class DimensionError(EdlabError):
    """Shapes are incompatible or exceed the configured dimension limit."""


class NotHermitianError(EdlabError):
    """An operator that must be self-adjoint is not, beyond tolerance."""


class NotPositiveError(EdlabError):
    """An operator that must be positive semidefinite has a negative eigenvalue."""


class AlgebraMismatchError(EdlabError):
    """Objects living on different algebras were combined."""


class MembershipError(EdlabError):
    """An ambient operator that must lie in the algebra does not."""


class OutcomeSpaceError(EdlabError):
    """Outcome labels have the wrong arity or do not match."""


class ScenarioError(EdlabError):
    """A scenario description could not be resolved; names the offending field."""

    def __init__(self, scenario: str, field: str, message: str):
        self.scenario = scenario
        self.field = field
        super().__init__(f"scenario {scenario!r}, field {field!r}: {message}")
