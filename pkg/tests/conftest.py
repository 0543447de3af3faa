import numpy as np
import pytest

from uvfuse import geometry, procmesh


@pytest.fixture(scope="session")
def cube_path(tmp_path_factory):
    return procmesh.write_obj("cube", tmp_path_factory.mktemp("mesh") / "cube.obj")


@pytest.fixture(scope="session")
def cube_mesh(cube_path):
    return geometry.load_mesh(cube_path)


@pytest.fixture(scope="session")
def tetra_path(tmp_path_factory):
    return procmesh.write_obj(
        "tetrahedron", tmp_path_factory.mktemp("mesh") / "tetra.obj")


@pytest.fixture(scope="session")
def sphere_path(tmp_path_factory):
    return procmesh.write_obj(
        "sphere", tmp_path_factory.mktemp("mesh") / "sphere.obj")


@pytest.fixture(scope="session")
def quad_mesh():
    """Unit quad in the z=0 plane facing +z, already normalized scale."""
    verts = np.array([[-0.5, -0.5, 0.0], [0.5, -0.5, 0.0],
                      [0.5, 0.5, 0.0], [-0.5, 0.5, 0.0]])
    tris = np.array([[0, 1, 2], [0, 2, 3]])
    uv = np.array([[[0, 0], [1, 0], [1, 1]],
                   [[0, 0], [1, 1], [0, 1]]], dtype=float)
    return geometry.build_mesh(verts, tris, uv, normalize=False)


@pytest.fixture(params=["numba", "numpy"])
def kernel_backend(request):
    """Run a test under each kernel backend."""
    from uvfuse import _kernels

    previous = _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(previous)


def pytest_terminal_summary(terminalreporter):
    """One verdict line per acceptance criterion at the end of the run."""
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None) if mod else None
    if results:
        terminalreporter.section("acceptance criteria")
        for status, name in results:
            terminalreporter.write_line(f"[{status}] {name}")
