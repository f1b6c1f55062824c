import numpy as np
import pytest

from frameless.scene import CameraKey, CameraPath, Keyframe, Scene, Sphere


def static_sphere(center=(0.0, 0.0, 0.0), radius=1.0, albedo=(0.8, 0.3, 0.2), specular=0.0):
    return Sphere(radius, albedo, (Keyframe(0.0, center),), specular)


@pytest.fixture
def unit_scene():
    return Scene((static_sphere(),), light_direction=(0, 0, 1), light_intensity=0.8,
                 ambient=0.2, background=(0.1, 0.2, 0.3))


@pytest.fixture
def front_path():
    return CameraPath.still((0.0, 0.0, 5.0), (0.0, 0.0, 0.0))


@pytest.fixture
def constant_scene():
    # every primary ray misses, so every sample shares the background color
    return Scene((), background=(0.3, 0.6, 0.9))


@pytest.fixture
def moving_scene():
    s = Sphere(0.8, (0.9, 0.9, 0.9),
               (Keyframe(0.0, (-2.0, 0.0, 0.0)), Keyframe(2.0, (2.0, 0.0, 0.0))))
    back = static_sphere((0.0, 0.0, -30.0), 20.0, (0.2, 0.4, 0.2))
    return Scene((s, back), light_direction=(0.3, 0.5, 1), background=(0.05, 0.05, 0.1))


def linear_path(t1=1.0, dx=1.0):
    return CameraPath((CameraKey(0.0, (0.0, 0.0, 6.0), (0.0, 0.0, 0.0)),
                       CameraKey(t1, (dx, 0.0, 6.0), (dx, 0.0, 0.0))))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed after the run whatever the capture mode
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
