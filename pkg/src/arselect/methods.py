"""Labels for the two ways of producing a multistep forecast."""

from enum import IntEnum


class Method(IntEnum):
    """How an h-step-ahead forecast is built from a fitted autoregression.

    ``PLUGIN`` fits a one-step model and iterates it h times through the
    companion matrix; ``DIRECT`` regresses the h-step-ahead value on the
    lag window in a single least-squares pass.  The numeric codes (1 for
    plug-in, 2 for direct) are part of the reporting format.
    """

    PLUGIN = 1
    DIRECT = 2

    @property
    def label(self) -> str:
        """Lower-case name used in reports and on the command line."""
        return "plugin" if self is Method.PLUGIN else "direct"

    @classmethod
    def from_label(cls, text: str) -> "Method":
        try:
            return {"plugin": cls.PLUGIN, "plug-in": cls.PLUGIN,
                    "direct": cls.DIRECT}[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown method {text!r}; use 'plugin' or 'direct'") from None
