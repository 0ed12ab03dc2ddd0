"""Exception hierarchy shared by all modules."""


class HolevoLabError(Exception):
    """Base class for every error raised by the package."""


class InvalidOperatorError(HolevoLabError, ValueError):
    """Operator is not Hermitian, not positive, or not a state."""


class DimensionError(HolevoLabError, ValueError):
    """Operand dimensions are incompatible."""


class ChannelError(HolevoLabError, ValueError):
    """Channel parameters do not define a valid CPTP map."""


class InfeasibleError(HolevoLabError, ValueError):
    """A constraint set is empty or a point lies outside it."""


class SlaterError(InfeasibleError):
    """Linear constraint set has empty interior.

    Multipliers are not guaranteed to exist in this case; relax the constraints
    (``alpha_k + 1/m``) and take the limit of the relaxed capacities instead,
    see :func:`holevolab.additivity.relaxation_sequence`.
    """


class ParameterError(HolevoLabError, ValueError):
    """Numerical parameter outside its admissible range."""


class SupportError(InvalidOperatorError):
    """Support of one state is not contained in the support of another."""
