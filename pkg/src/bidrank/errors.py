"""Exception types shared across the package."""


class BidRankError(Exception):
    """Base class for all bidrank errors."""


class EmptyAuctionError(BidRankError):
    """An auction (or training set) has no candidates."""


class UnknownCandidateError(BidRankError):
    """An advertiser id is not present in the auction it was looked up in."""


class InvalidMetricError(BidRankError):
    """A metric value is NaN or infinite."""


class IncompleteCandidateError(BidRankError):
    """A candidate is missing required raw metrics."""


class InvalidWeightsError(BidRankError):
    """A weight vector violates the simplex constraints."""


class InconsistentCandidatesError(BidRankError):
    """Candidate key sets or aligned selection lists disagree."""


class DegenerateBaselineError(BidRankError):
    """A baseline metric sums to zero, so its change ratio is undefined."""


class InvalidGridStepError(BidRankError):
    """A grid step is not 1/M for a positive integer M."""


class TooFewAuctionsError(BidRankError):
    """The dataset is too small for the requested fold count."""


class InvalidConfigError(BidRankError):
    """A generator or run configuration field is out of range."""


class DatasetFormatError(BidRankError):
    """A dataset file fails to parse or violates the schema."""
