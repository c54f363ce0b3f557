"""
Fixtures dùng chung: mesh mặt phẳng, hộp, phòng demo và camera
"""

import numpy as np
import pytest

from raydist.geometry import Ray, TriangleMesh, default_camera
from raydist.scene_io import AxisBox, demo_room_spec, gen_scene


def square_mesh(z: float = 2.0, half: float = 0.5) -> TriangleMesh:
    """Hình vuông trên mặt phẳng z = const, 2 tam giác chung đường chéo qua tâm"""
    vertices = np.array([[-half, -half, z], [half, -half, z], [half, half, z], [-half, half, z]])
    return TriangleMesh(vertices, np.array([[0, 1, 2], [0, 2, 3]]))


def random_mesh(seed: int, count: int = 200) -> TriangleMesh:
    """Tam giác ngẫu nhiên rời nhau trong hộp [-1, 1]^2 x [1, 5]"""
    rng = np.random.default_rng(seed)
    centers = np.column_stack([rng.uniform(-1, 1, count), rng.uniform(-1, 1, count),
                               rng.uniform(1, 5, count)])
    offsets = rng.normal(0.0, 0.3, size=(count, 3, 3))
    vertices = (centers[:, None, :] + offsets).reshape(-1, 3)
    return TriangleMesh(vertices, np.arange(3 * count).reshape(count, 3))


@pytest.fixture
def plane_mesh():
    return square_mesh()


@pytest.fixture
def box_mesh():
    # mặt trước z = 2.5, mặt sau z = 3.5
    return AxisBox(center=(0.0, 0.0, 3.0), size=(1.0, 1.0, 1.0)).to_mesh()


@pytest.fixture
def room_mesh():
    # tia trục quang cắt tại 2, 3.5, 4.5, 6
    return gen_scene(demo_room_spec())


@pytest.fixture
def camera():
    return default_camera(64)


@pytest.fixture
def axis_ray():
    return Ray(origin=[0.0, 0.0, 0.0], direction=[0.0, 0.0, 1.0])
