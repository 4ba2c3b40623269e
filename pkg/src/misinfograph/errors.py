"""Exception hierarchy shared across the toolkit.

Two roots so the CLI can map failures to exit codes: ``InputError`` for
anything wrong with files, schemas or arguments (exit 2) and
``ModelError`` for checkpoint/vocab mismatches and numerical blow-ups
(exit 3).
"""


class MisinfoError(Exception):
    pass


class InputError(MisinfoError):
    """Bad input data or arguments (CLI exit code 2)."""


class ModelError(MisinfoError):
    """Model loading or numerical failure (CLI exit code 3)."""


class UnknownSourceError(InputError):
    def __init__(self, source_kind, known):
        self.source_kind = source_kind
        self.known = sorted(known)
        super().__init__(
            f"unknown source kind {source_kind!r}; registered kinds: {', '.join(self.known)}"
        )


class LabelMappingError(InputError):
    def __init__(self, source_kind, label, valid):
        self.source_kind = source_kind
        self.label = label
        self.valid = sorted(valid)
        super().__init__(
            f"label {label!r} not in mapping table for source {source_kind!r}; "
            f"valid labels: {', '.join(self.valid)}"
        )


class TweetParseError(InputError):
    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")
