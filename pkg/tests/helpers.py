import numpy as np

from gppc.geometry import PlaneBasis, PlaneModel
from gppc.gridmap import GridMap


def make_grid(cells, cell_size=0.05, origin=(0.0, 0.0)):
    plane = PlaneModel([0.0, 0.0, 1.0], [0.0, 0.0, 0.0])
    return GridMap(cell_size, origin, np.asarray(cells, dtype=np.uint8), plane,
                   PlaneBasis([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]))


def random_planes(rng, n):
    normals = rng.normal(size=(n, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    anchors = rng.uniform(-5, 5, size=(n, 3))
    return [PlaneModel(nrm, a) for nrm, a in zip(normals, anchors)]
