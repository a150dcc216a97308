"""Exception types.  Every error carries a stable ``code`` used in CLI error records."""


class CrosslabError(Exception):
    code = "crosslab_error"


class ResolutionError(CrosslabError):
    code = "set_not_resolved"


class ExhaustionError(CrosslabError):
    code = "exhaustion"


class ConvergenceError(CrosslabError):
    code = "no_convergence"

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class MonteCarloError(CrosslabError):
    code = "monte_carlo"


class RootFindingError(CrosslabError):
    code = "root_finding"

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class SamplingError(CrosslabError):
    code = "sampling"


class RankDeficientError(CrosslabError):
    code = "rank_deficient"

    def __init__(self, message, conditioning=None):
        super().__init__(message)
        self.conditioning = conditioning


class QuadratureError(CrosslabError):
    code = "quadrature"


class ConfigError(CrosslabError):
    code = "config_schema"
