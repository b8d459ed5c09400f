"""Shared problem instances used across the test modules.

Each builder returns a fresh RdoInstance; closed-form facts asserted in the
tests are stated next to the data they belong to.
"""

import math

import numpy as np

from rdolp import validate_instance


def corner_box():
    """2-D box-with-corner-cut, single stable G (rho ~ 0.787).

    The exact feasible set is reached by the outer hierarchy at level 2,
    with min -x1 equal to -1.1492 (4 s.f.).
    """
    A = np.array([[-1.0, 0.0], [0.0, -1.0], [0.0, 1.0], [1.0, 1.0]])
    b = np.array([1.0, 1.0, 1.0, 3.0])
    c = np.array([-1.0, 0.0])
    G = np.array([[0.6, -0.4], [0.8, 0.5]])
    return validate_instance(c, A, b, [G])


def rotation_scale():
    """Contractive rotation (rho = 0.8, 30 degrees) in a pentagon."""
    th = math.pi / 6.0
    G = 0.8 * np.array(
        [[math.cos(th), math.sin(th)], [-math.sin(th), math.cos(th)]]
    )
    A = np.array(
        [[1.0, 0.0], [-1.5, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0]]
    )
    return validate_instance(np.array([-0.5, -1.0]), A, np.ones(5), [G])


def switched_pair(scale=0.254):
    """Two-matrix family in the same pentagon; at scale 0.254 no common
    ellipsoid exists but a two-form family does."""
    G1 = scale * np.array([[-1.0, -1.0], [-4.0, 0.0]])
    G2 = scale * np.array([[3.0, 3.0], [-2.0, 1.0]])
    A = np.array(
        [[1.0, 0.0], [-1.5, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0]]
    )
    return validate_instance(np.array([0.5, 1.0]), A, np.ones(5), [G1, G2])


def pure_rotation():
    """Norm-preserving rotation in the unit box: the feasible set is the
    unit disk, which no finite level attains."""
    G = np.array([[0.8, 0.6], [-0.6, 0.8]])
    A = np.vstack([np.eye(2), -np.eye(2)])
    return validate_instance(np.array([1.0, 0.0]), A, np.ones(4), [G])


def stretch_split(a=2.0):
    """Unstable diagonal stretch in the unit box.

    Level r cuts the box to |x1| <= a^-r, |x2| <= 1, so the hierarchy never
    terminates finitely.
    """
    G = np.array([[a, 0.0], [0.0, 1.0 / a]])
    A = np.vstack([np.eye(2), -np.eye(2)])
    return validate_instance(np.array([0.0, -1.0]), A, np.ones(4), [G])


def corner_touch():
    """Stable G with the origin on the boundary of P = [0,1]^2.

    Level r adds exactly the wedge |x1 - x2| <= 3^-r (x1 + x2).
    """
    G = 0.5 * np.array([[2.0 / 3.0, -1.0 / 3.0], [-1.0 / 3.0, 2.0 / 3.0]])
    A = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    b = np.array([1.0, 1.0, 0.0, 0.0])
    return validate_instance(np.array([1.0, 1.0]), A, b, [G])


def one_hot_pair(gamma=0.7):
    """Rank-one pair where a single quadratic form already certifies decay."""
    G1 = gamma * np.array([[1.0, 0.0], [1.0, 0.0]])
    G2 = gamma * np.array([[0.0, 1.0], [0.0, -1.0]])
    A = np.vstack([np.eye(2), -np.eye(2)])
    return validate_instance(np.array([1.0, 1.0]), A, np.ones(4), [G1, G2])


def zero_dynamics():
    """G = 0: every trajectory jumps to the origin after one step."""
    A = np.vstack([np.eye(2), -np.eye(2)])
    return validate_instance(np.zeros(2), A, np.ones(4), [np.zeros((2, 2))])
