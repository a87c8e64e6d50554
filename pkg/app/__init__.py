# Triangle counting engine - core package (trigraph)


class TrigraphError(Exception):
    """Base class for errors raised by the counting engine."""
