"""Exception hierarchy shared across the package."""


class PortcastError(Exception):
    """Base class for every error raised by this package."""


class DataError(PortcastError):
    """Invalid input data: CSV content, config values, unknown names."""


class MalformedLine(DataError):
    """A CSV line with the wrong arity or an unparseable field."""


class MissingLabel(MalformedLine):
    """A training-schema line without the destination/arrival labels."""


class DuplicatePort(DataError):
    """Two ports with the same name in one registry."""


class UnknownPort(DataError):
    """A destination counter or lookup references a port absent from the registry."""


class ConfigError(DataError):
    """Bad key or value in a configuration file."""


class LengthMismatch(DataError):
    """Prediction and ground-truth streams do not line up trip by trip."""


class PlacementFailure(DataError):
    """Synthetic port placement could not satisfy the separation constraint."""


class OutOfBounds(PortcastError):
    """A position falls outside the grid bounding box."""


class NoModel(PortcastError):
    """Destination prediction requested before any record was trained."""


class NoEtaModel(PortcastError):
    """No arrival-time statistics exist for the requested destination."""


class MissingPrediction(PortcastError):
    """A trip ended without any destination ever reported for the ship."""


class SnapshotError(DataError):
    """Model snapshot file is missing, corrupt, or has the wrong version."""
