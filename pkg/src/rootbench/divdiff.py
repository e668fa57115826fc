"""Divided differences and the cubic Hermite interpolant on (x, y, z).

The interpolant H matches f at three nodes and f' at the first node.  Its
derivative at the last node has a closed divided-difference form,

    H'(z) = 2 f[x,z] + f[y,z] - f[x,y] + (x - z) f[y,x,x] - f'(x),

algebraically equal to 2 f[x,z] + f[y,z] - 2 f[x,y] + (y - z) f[y,x,x],
the denominator used by the Wang-style third steps.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mpreal import BigReal, NumericError

__all__ = [
    "DegenerateNodesError",
    "NodeTriple",
    "dd1",
    "dd2_confluent",
    "dd2_distinct",
    "hermite_basis",
    "hermite_eval",
    "hermite_deriv_at_z",
    "hermite_deriv_at_z_alt",
]


class DegenerateNodesError(NumericError):
    """Interpolation nodes too close for the working precision."""


def _require_separated(a: BigReal, b: BigReal, what: str = "nodes") -> None:
    # distinct iff |a-b| > 10^-(digits-10) * max(1, |a|, |b|)
    digits = max(a.precision.decimal_digits, b.precision.decimal_digits)
    prec = a.precision if a.precision.decimal_digits == digits else b.precision
    scale = max(abs(a), abs(b), prec.tol(digits))  # tol(digits) == 1
    if abs(a - b) <= prec.tol(10) * scale:
        raise DegenerateNodesError(f"{what} coincide at this precision")


@dataclass(frozen=True)
class NodeTriple:
    """Interpolation data: nodes x, y, z with f values and f'(x)."""

    x: BigReal
    y: BigReal
    z: BigReal
    f_x: BigReal
    f_y: BigReal
    f_z: BigReal
    fprime_x: BigReal

    def __post_init__(self) -> None:
        _require_separated(self.x, self.y, "x, y")
        _require_separated(self.x, self.z, "x, z")
        _require_separated(self.y, self.z, "y, z")


def dd1(a: BigReal, fa: BigReal, b: BigReal, fb: BigReal) -> BigReal:
    """First-order divided difference f[a,b] = (f(a) - f(b)) / (a - b)."""
    _require_separated(a, b)
    return (fa - fb) / (a - b)


def dd2_confluent(y: BigReal, x: BigReal, fy: BigReal, fx: BigReal, fprime_x: BigReal) -> BigReal:
    """f[y,x,x] = (f[y,x] - f'(x)) / (y - x), the doubled-node form."""
    _require_separated(y, x)
    return (dd1(y, fy, x, fx) - fprime_x) / (y - x)


def dd2_distinct(
    a: BigReal, b: BigReal, c: BigReal, fa: BigReal, fb: BigReal, fc: BigReal
) -> BigReal:
    """f[a,b,c] = (f[b,c] - f[a,b]) / (c - a) over pairwise-distinct nodes."""
    _require_separated(a, c)
    return (dd1(b, fb, c, fc) - dd1(a, fa, b, fb)) / (c - a)


def hermite_basis(nodes: NodeTriple, t: BigReal):
    """Values at t of the four cubic basis polynomials (w0, w1, w2, wbar0).

    w_i is 1 at its own node and 0 at the others with zero slope at x;
    wbar0 vanishes at all three nodes and has unit slope at x.
    """
    x, y, z = nodes.x, nodes.y, nodes.z
    dxy, dxz = x - y, x - z
    w0 = ((t - y) * (t - z) / (dxy * dxz)) * (1 - (t - x) * (dxy + dxz) / (dxy * dxz))
    w1 = (t - x) ** 2 * (t - z) / ((y - x) ** 2 * (y - z))
    w2 = (t - x) ** 2 * (t - y) / ((z - x) ** 2 * (z - y))
    wbar0 = (t - x) * (t - y) * (t - z) / (dxy * dxz)
    return w0, w1, w2, wbar0


def hermite_eval(nodes: NodeTriple, t: BigReal) -> BigReal:
    """H(t) for the interpolant matching f at x, y, z and f' at x."""
    w0, w1, w2, wbar0 = hermite_basis(nodes, t)
    return w0 * nodes.f_x + w1 * nodes.f_y + w2 * nodes.f_z + wbar0 * nodes.fprime_x


def hermite_deriv_at_z(nodes: NodeTriple) -> BigReal:
    """H'(z) in divided-difference form."""
    x, y, z = nodes.x, nodes.y, nodes.z
    fx, fy, fz, dfx = nodes.f_x, nodes.f_y, nodes.f_z, nodes.fprime_x
    return (
        2 * dd1(x, fx, z, fz)
        + dd1(y, fy, z, fz)
        - dd1(x, fx, y, fy)
        + (x - z) * dd2_confluent(y, x, fy, fx, dfx)
        - dfx
    )


def hermite_deriv_at_z_alt(nodes: NodeTriple) -> BigReal:
    """Equivalent H'(z) form with doubled f[x,y] weight; see module docstring."""
    x, y, z = nodes.x, nodes.y, nodes.z
    fx, fy, fz, dfx = nodes.f_x, nodes.f_y, nodes.f_z, nodes.fprime_x
    return (
        2 * dd1(x, fx, z, fz)
        + dd1(y, fy, z, fz)
        - 2 * dd1(x, fx, y, fy)
        + (y - z) * dd2_confluent(y, x, fy, fx, dfx)
    )
