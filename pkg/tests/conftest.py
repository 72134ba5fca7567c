"""Shared example configurations used across the test suite."""

from k2reg.config import LineConfiguration


def cfg_a(**param):
    """Groups {x}, {y}, {y-x+1}; genus 1."""
    param = param or {"lam": 1}
    return LineConfiguration(
        [(1, 0, [0]), (0, 1, [0]), (-1, 1, [1])], **param)


def cfg_b(**param):
    """Groups {x, x+1}, {y, y+1}; genus 1."""
    param = param or {"lam": 1}
    return LineConfiguration([(1, 0, [0, 1]), (0, 1, [0, 1])], **param)


def cfg_c(**param):
    """Groups {x, x+1}, {y, y+1}, {y-x+3}; genus 4."""
    param = param or {"lam": 1}
    return LineConfiguration(
        [(1, 0, [0, 1]), (0, 1, [0, 1]), (-1, 1, [3])], **param)


def cfg_rel4(**param):
    """Four directions, sizes (2,2,1,1); genus 8."""
    param = param or {"lam": 1}
    return LineConfiguration(
        [(1, 0, [0, 1]), (0, 1, [0, 1]), (-1, 1, [3]), (1, 1, [7])], **param)


def cfg_big3(**param):
    """Groups {x, x+1, x+2}, {y, y+1, y+2}; genus 4."""
    param = param or {"lam": 1}
    return LineConfiguration([(1, 0, [0, 1, 2]), (0, 1, [0, 1, 2])], **param)
