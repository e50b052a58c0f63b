class ValidationError(ValueError):
    """Input data failed validation.

    ``location`` is an optional human-readable pointer such as ``"line 7"``
    or ``"answers[12]"``; it is prepended to the message.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class SchemaMismatchError(ValidationError):
    """A file was produced against a different feature schema version."""
