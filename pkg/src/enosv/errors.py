"""Exception hierarchy shared by the solver stack.

Configuration problems raise :class:`ConfigError`; anything that goes wrong
while number crunching derives from :class:`NumericalError` so the CLI can
map the two families to distinct exit codes.
"""


class ConfigError(ValueError):
    """Invalid run configuration (bad parameter combination, bad case name)."""


class NumericalError(RuntimeError):
    """Base class for failures occurring during a computation."""


class CgError(NumericalError):
    """Conjugate gradient failure (non-convergence or loss of definiteness)."""

    def __init__(self, message, best_x=None, best_residual=None, iterations=0):
        super().__init__(message)
        self.best_x = best_x
        self.best_residual = best_residual
        self.iterations = iterations


class ActiveSetError(NumericalError):
    """Active-set iteration failed to terminate (cycle guard tripped)."""


class NonPhysicalState(NumericalError):
    """Density or pressure lost positivity; carries location context."""

    def __init__(self, message, macrocell=None, subcell=None, variable=None):
        super().__init__(message)
        self.macrocell = macrocell
        self.subcell = subcell
        self.variable = variable
