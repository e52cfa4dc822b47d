"""Exception hierarchy.

Every error raised by the library derives from :class:`CrucError`, and the
CLI maps that base class to exit code 2 (data/model error).
"""


class CrucError(Exception):
    """Base class for all library errors."""


class EmptyMatrix(CrucError):
    def __init__(self, what="rating matrix"):
        super().__init__(f"{what} is empty")


class DuplicateRating(CrucError):
    def __init__(self, user, item):
        self.user, self.item = user, item
        super().__init__(f"duplicate rating for user {user!r}, item {item!r}")


class RatingOutOfScale(CrucError):
    def __init__(self, user, item, value, scale=None):
        self.user, self.item, self.value = user, item, value
        bounds = f" outside [{scale.min}, {scale.max}]" if scale is not None else ""
        super().__init__(f"rating {value!r} for user {user!r}, item {item!r}{bounds}")


class UnknownUser(CrucError):
    def __init__(self, user):
        self.user = user
        super().__init__(f"unknown user {user!r}")


class UnknownItem(CrucError):
    def __init__(self, item):
        self.item = item
        super().__init__(f"unknown item {item!r}")


class ZeroVariance(CrucError):
    """One side of a PCC pair set is constant; the pair carries no similarity evidence."""

    def __init__(self):
        super().__init__("zero variance in correlation input")


class TooManyClusters(CrucError):
    def __init__(self, c, member_count):
        self.c, self.member_count = c, member_count
        super().__init__(f"cannot form {c} clusters from {member_count} users")


class MalformedLine(CrucError):
    def __init__(self, line_no, content):
        self.line_no, self.content = line_no, content
        super().__init__(f"malformed line {line_no}: {content!r}")


class IoFailure(CrucError):
    pass


class ZeroTotalDwell(CrucError):
    def __init__(self, user):
        self.user = user
        super().__init__(f"user {user!r} has zero total dwell time")


class DegenerateSplit(CrucError):
    pass


class EmptyInput(CrucError):
    def __init__(self, what="input"):
        super().__init__(f"{what} is empty")
