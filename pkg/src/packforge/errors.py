"""Exception hierarchy shared by all packing stages."""


class PackforgeError(Exception):
    pass


class InputError(PackforgeError):
    """Caller violated a documented precondition."""


class OracleScaleError(PackforgeError):
    """An exact oracle was asked to run above its size cap."""


class StaleCertificateError(PackforgeError):
    """Certificate fingerprint does not match the host it is checked against."""


class Infeasible(PackforgeError):
    """No object satisfying the contract was found.

    ``proved`` is True only when an exhaustive procedure established
    nonexistence; otherwise the search budget ran out.
    """

    def __init__(self, message, *, proved=False, witness=None):
        super().__init__(message)
        self.proved = proved
        self.witness = witness


class BudgetExhausted(Infeasible):
    def __init__(self, message, *, witness=None):
        super().__init__(message, proved=False, witness=witness)


class RegularityAssumptionViolated(PackforgeError):
    """A caller-asserted regularity hypothesis failed a post-hoc check."""


class ContractViolation(PackforgeError):
    """An internal construction failed its own validator: a bug, not bad input."""


class PartitionFailure(PackforgeError):
    """Randomised partition retries exhausted; names the first violated claim."""


class EmbedFailure(PackforgeError):
    """Sequential embedding ran out of candidates; carries the stuck vertex."""

    def __init__(self, message, *, vertex=None):
        super().__init__(message)
        self.vertex = vertex


class PackFailure(PackforgeError):
    """A packing engine exhausted its retries."""


class SplitFailure(PackforgeError):
    """Randomised edge split failed validation after all retries."""


class StagedError(PackforgeError):
    """A multi-stage pipeline operation failed; names the stage."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
