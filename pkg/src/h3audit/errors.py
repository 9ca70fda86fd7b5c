"""Error type shared by every module.

Each error carries a short machine-readable ``code`` (``OUT_OF_RANGE``,
``MODE_TOO_LARGE``, ...) so the CLI and the experiment harness can report
and map failures without string matching.
"""


class H3Error(ValueError):
    def __init__(self, code: str, message: str = ""):
        self.code = code
        self.message = message
        super().__init__(f"{code}: {message}" if message else code)
