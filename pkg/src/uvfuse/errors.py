"""Exception types shared across the package."""


class MeshError(Exception):
    """Base class for mesh loading and validation failures."""


class MeshParseError(MeshError):
    """The mesh file could not be parsed."""


class MissingUVError(MeshError):
    """A face lacks texture coordinates."""


class DegenerateMeshError(MeshError):
    """Every face of the mesh has zero area."""


class OracleUnsetError(RuntimeError):
    """Mock denoiser was asked to predict without an oracle target."""


class RemoteServiceError(RuntimeError):
    """Transport or protocol failure talking to the denoiser service."""
