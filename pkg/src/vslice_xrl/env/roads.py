"""Road grid and gNB placement.

The area is crossed by two horizontal and two vertical roads at one and two
thirds of the side length, giving four intersections. Vehicles enter and leave
through the eight road ends on the area boundary.
"""
import math

import numpy as np


def road_coordinates(area_side):
    """Fixed coordinate of the two roads along each axis."""
    return np.array([area_side / 3.0, 2.0 * area_side / 3.0])


def intersections(area_side):
    c = road_coordinates(area_side)
    return np.array([(x, y) for x in c for y in c])


def default_gnb_layout(num_gnbs, area_side):
    """Fixed gNB coordinates.

    One gNB sits at the centre. Three form the triangle (A/4, A/4), (3A/4, A/4),
    (A/2, 3A/4), one site per third of the area. Any other count is spread evenly
    on a circle of radius A/(2 sqrt 2) around the centre, which for four sites
    gives the quadrant centres.
    """
    a = float(area_side)
    if num_gnbs == 1:
        return np.array([[a / 2, a / 2]])
    if num_gnbs == 3:
        return np.array([[a / 4, a / 4], [3 * a / 4, a / 4], [a / 2, 3 * a / 4]])
    radius = a / (2 * math.sqrt(2))
    angles = math.pi / 4 + 2 * math.pi * np.arange(num_gnbs) / num_gnbs
    return np.stack([a / 2 + radius * np.cos(angles), a / 2 + radius * np.sin(angles)], axis=1)


def gnb_layout(config):
    if config.gnb_positions is not None:
        return np.array(config.gnb_positions, dtype=float)
    return default_gnb_layout(config.num_gnbs, config.area_side)


def to_xy(axis, lane, along):
    """Cartesian coordinates from road-frame mobility arrays, shape (..., 2)."""
    x = np.where(axis == 0, along, lane)
    y = np.where(axis == 0, lane, along)
    return np.stack([x, y], axis=-1)
