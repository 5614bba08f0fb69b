"""A-priori growth bound for the exterior cocycle on a compact region."""

import numpy as np

from ..system_model import Region, SystemSpec, lattice


def wazewski_rate(spec: SystemSpec, region: Region, levels: int = None, points_per_axis: int = 9) -> float:
    """
    d * max(0, max lambda_max((J + J^T)/2)) over a region grid and control lattice.

    Every singular value of (d phi_t)_x grows at most like exp(t * lambda_max),
    so alpha_t / t stays below this rate along trajectories confined to the region.
    """
    points = region.grid(points_per_axis)
    letters = lattice(spec.control_lo, spec.control_hi, levels or spec.levels)
    X = np.repeat(points, len(letters), axis=0)
    U = np.tile(letters, (len(points), 1))
    J = spec.jacobian(X, U)
    symmetric = 0.5 * (J + np.transpose(J, (0, 2, 1)))
    top = float(np.linalg.eigvalsh(symmetric)[:, -1].max())
    return spec.dim * max(0.0, top)
