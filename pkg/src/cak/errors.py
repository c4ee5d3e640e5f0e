"""Exception hierarchy shared by every module of the toolkit."""

from __future__ import annotations


class CakError(Exception):
    """Base class for all toolkit errors."""


class UnsupportedLanguage(CakError):
    def __init__(self, language: object):
        super().__init__(f"unsupported language: {language!r}")
        self.language = language


class ProjectPathNotFound(CakError):
    def __init__(self, path: object):
        super().__init__(f"project path does not exist or is not a directory: {path}")
        self.path = path


class IoFailure(CakError):
    pass


class SchemaVersionMismatch(CakError):
    def __init__(self, found: object, expected: str):
        super().__init__(f"snapshot schema_version {found!r} is not supported (expected {expected!r})")
        self.found = found
        self.expected = expected


class MalformedSnapshot(CakError):
    pass


class NotFound(CakError):
    """Lookup failure; the CLI maps every subclass to exit code 3."""


class TypeNotFound(NotFound):
    def __init__(self, qualified_name: str):
        super().__init__(f"type not found: {qualified_name}")
        self.qualified_name = qualified_name


class MethodNotFound(NotFound):
    def __init__(self, signature: str, qualified_class: str = ""):
        where = f" in {qualified_class}" if qualified_class else ""
        super().__init__(f"method not found: {signature}{where}")
        self.signature = signature
        self.qualified_class = qualified_class


class FileNotInSession(NotFound):
    def __init__(self, file_path: object):
        super().__init__(f"file was not analyzed in this session: {file_path}")
        self.file_path = file_path


class NotAFocalMethod(CakError):
    def __init__(self, signature: str):
        super().__init__(f"not a focal method (private or constructor): {signature}")
        self.signature = signature


class InvalidFeedback(CakError):
    pass


class UnresolvedPlaceholder(CakError):
    def __init__(self, path: str):
        super().__init__(f"unresolved placeholder: {{{path}}}")
        self.path = path


class EndpointError(CakError):
    """Any failure talking to an LLM completion endpoint (CLI exit code 4)."""


class EndpointUnreachable(EndpointError):
    pass


class HttpStatus(EndpointError):
    def __init__(self, status: int, body: str = ""):
        super().__init__(f"endpoint returned HTTP {status}")
        self.status = status
        self.body = body


class MalformedResponse(EndpointError):
    pass


class Timeout(EndpointError):
    pass
