"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 1); numerical
preconditions from :class:`StatsError`.
"""


class SmellscapeError(Exception):
    pass


class InputError(SmellscapeError, ValueError):
    pass


class DuplicateWord(InputError):
    def __init__(self, word):
        super().__init__(f"duplicate word: {word!r}")
        self.word = word


class UnknownCategory(InputError):
    def __init__(self, name):
        super().__init__(f"unknown category: {name!r}")
        self.name = name


class MalformedRow(InputError):
    def __init__(self, line, reason=""):
        msg = f"malformed row at line {line}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.line = line
        self.reason = reason


class MalformedRecord(InputError):
    def __init__(self, line_no, reason):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateSegmentId(InputError):
    def __init__(self, segment_id):
        super().__init__(f"duplicate segment id: {segment_id!r}")
        self.segment_id = segment_id


class DegenerateGeometry(InputError):
    def __init__(self, segment_id, reason="fewer than 2 distinct points"):
        super().__init__(f"segment {segment_id!r}: {reason}")
        self.segment_id = segment_id


class UnknownLayer(InputError):
    pass


class StatsError(SmellscapeError, ValueError):
    pass


class ZeroVariance(StatsError):
    pass


class LengthMismatch(StatsError):
    pass


class TooFewPoints(StatsError):
    pass


class NotADistribution(StatsError):
    pass


class SeriesTooShort(StatsError):
    pass


class MonthEmpty(SmellscapeError, ValueError):
    pass


class NoQualifyingColors(SmellscapeError, ValueError):
    pass


class EmptyCategory(SmellscapeError, ValueError):
    pass


class EmptyGraph(SmellscapeError, ValueError):
    pass
