"""Exception types shared across the package."""


class SingularityError(ArithmeticError):
    """Evaluation hit a singular point of a superpotential or potential."""

    pole_kind = "seed_pole"

    def __init__(self, message, x=None, level=None, pole_kind=None):
        super().__init__(message)
        self.x = x
        self.level = level
        if pole_kind is not None:
            self.pole_kind = pole_kind


class SingularPoint(SingularityError):
    """x lies within ``pole_guard`` of a pole."""


class DenominatorZero(SingularityError):
    """The Backlund denominator vanished (a movable singularity)."""

    pole_kind = "denominator_zero"


class ChainError(ValueError):
    """Invalid chain construction (duplicate energies, empty seed list)."""


class SingularPotential(SingularityError):
    """A potential has a genuine pole inside an integration box."""


class AsymptoteNotReached(ValueError):
    """The potential has not decayed at the edges of the scattering box."""
