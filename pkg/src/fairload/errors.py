"""Error type shared by every module.

Diagnoses that are part of a normal answer (infeasible LPs, violated
theorem checks) are returned as data; only misuse raises.
"""


class FairloadError(Exception):
    """Raised on invalid input. ``code`` is a stable machine-readable tag."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message
