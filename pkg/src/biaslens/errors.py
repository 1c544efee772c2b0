"""Exception types shared across the package."""


class BiaslensError(Exception):
    """Base class for every error this package raises on purpose."""


class MalformedRecord(BiaslensError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class DuplicateId(BiaslensError):
    def __init__(self, description_id: str):
        self.description_id = description_id
        super().__init__(f"duplicate description id {description_id!r}")


class UnknownLabel(BiaslensError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"unknown code label {label!r}")


class OffsetOutOfRange(BiaslensError):
    def __init__(self, description_id: str, detail: str = ""):
        self.description_id = description_id
        super().__init__(f"annotation offsets out of range for {description_id!r}"
                         + (f": {detail}" if detail else ""))


class EmptyText(BiaslensError):
    def __init__(self, description_id: str):
        self.description_id = description_id
        super().__init__(f"description {description_id!r} has empty text")


class OverlapConflict(BiaslensError):
    def __init__(self, description_id: str, offsets: tuple[int, int]):
        self.description_id = description_id
        self.offsets = offsets
        super().__init__(
            f"different-label spans overlap in {description_id!r} at {offsets}")


class TooFewDescriptions(BiaslensError):
    pass


class EmptyCorpus(BiaslensError):
    pass


class NotFitted(BiaslensError):
    pass


class AlignmentError(BiaslensError):
    pass


class EmptyTrainingSet(BiaslensError):
    pass


class FeatureShapeMismatch(BiaslensError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"feature vector has {got} columns, model expects {expected}")


class ForeignSpan(BiaslensError):
    def __init__(self, description_id: str):
        self.description_id = description_id
        super().__init__(f"injected span does not fit description {description_id!r}")


class CorpusMismatch(BiaslensError):
    pass


class TooFewAnnotators(BiaslensError):
    pass
