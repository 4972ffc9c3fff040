import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from sceneloc.geometry import Intrinsics, Pose, rotation_from_axis_angle
from sceneloc.synthetic import SceneConfig, SyntheticScene

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_rotation(rng):
    q = rng.standard_normal(4)
    return Pose.from_quaternion(q / np.linalg.norm(q), np.zeros(3)).R


def random_pose(rng, scale=1000.0):
    return Pose(random_rotation(rng), rng.uniform(-scale, scale, 3))


@st.composite
def poses(draw, scale=2000.0):
    aa = draw(st.lists(st.floats(-3.0, 3.0), min_size=3, max_size=3))
    t = draw(st.lists(st.floats(-scale, scale), min_size=3, max_size=3))
    return Pose(rotation_from_axis_angle(np.array(aa)), np.array(t))


@pytest.fixture(scope="session")
def K():
    return Intrinsics.seven_scenes()


@pytest.fixture(scope="session")
def scene():
    return SyntheticScene.generate(SceneConfig())


@pytest.fixture(scope="session")
def frame(scene, K):
    """One rendered view: (pose, depth, coords, rgb)."""
    pose = scene.random_poses(1, np.random.default_rng(7))[0]
    depth, coords, rgb = scene.render(pose, K)
    return pose, depth, coords, rgb


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request, capsys):
    """``criterion(n, ok, detail)`` prints and records one PASS/FAIL line."""
    def report(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        request.config._acceptance_lines.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok
    return report
