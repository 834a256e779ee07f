"""Lie algebra and matrix Lie group arithmetic for the built-in symmetry groups.

Supported groups are the abelian translation groups R^n, the rotation groups
SO(2) and SO(3), and finite direct products of these.  Algebra elements and
covectors are coordinate vectors in a fixed basis; dual bases are the
coordinate duals, so the pairing is always the plain dot product.  Group
elements of rotation factors are stored as orthogonal matrices in the
defining representation, translation factors as plain vectors (their matrix
block is the identity by convention).

All values are immutable after construction and every operation is a pure
function, so everything here is safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import RANK_RCOND, null_space

GROUP_ORTHOGONALITY_TOL = 1e-12
_STRUCTURE_TOL = 1e-12


class UnsupportedAlgebraError(ValueError):
    """Group-level operation requested for an algebra with no attached group."""


class SpecMismatchError(ValueError):
    """Two operands refer to different Lie algebra specifications."""


def _float_array(x) -> np.ndarray:
    return np.array(x, dtype=float, copy=True)


# ---------------------------------------------------------------------------
# Algebra specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LieAlgebraSpec:
    """Structure constants c[i,j,k] with [e_i, e_j] = sum_k c[i,j,k] e_k.

    ``factors`` records the product decomposition into primitive factors
    ("so3",), ("so2",) and ("abelian", n); it is None for algebras loaded
    from a raw structure-constant table, which then support algebra-level
    operations only.
    """

    name: str
    dimension: int
    structure_constants: np.ndarray
    factors: tuple[tuple, ...] | None = None

    def __post_init__(self):
        c = _float_array(self.structure_constants)
        d = self.dimension
        if c.shape != (d, d, d):
            raise ValueError(f"structure constants must have shape {(d, d, d)}, got {c.shape}")
        anti = c + np.swapaxes(c, 0, 1)
        if np.max(np.abs(anti)) > _STRUCTURE_TOL:
            raise ValueError("structure constants are not antisymmetric in the first two slots")
        t1 = np.einsum("ijm,mlk->ijlk", c, c)
        t2 = np.einsum("jlm,mik->ijlk", c, c)
        t3 = np.einsum("lim,mjk->ijlk", c, c)
        if np.max(np.abs(t1 + t2 + t3)) > _STRUCTURE_TOL:
            raise ValueError("structure constants violate the Jacobi identity")
        object.__setattr__(self, "structure_constants", c)

    def factor_dims(self) -> tuple[int, ...]:
        if self.factors is None:
            raise UnsupportedAlgebraError(
                f"algebra {self.name!r} carries no group factors; only bracket-level "
                "operations are available"
            )
        return tuple(_factor_dim(f) for f in self.factors)


def _factor_dim(factor: tuple) -> int:
    kind = factor[0]
    if kind == "so3":
        return 3
    if kind == "so2":
        return 1
    if kind == "abelian":
        return int(factor[1])
    raise UnsupportedAlgebraError(f"unknown group factor {factor!r}")


def _levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    return eps


_SO3 = LieAlgebraSpec("so3", 3, _levi_civita(), (("so3",),))
_SO2 = LieAlgebraSpec("so2", 1, np.zeros((1, 1, 1)), (("so2",),))


def so3() -> LieAlgebraSpec:
    """so(3) with [e_i, e_j] = eps_ijk e_k (hat map: xi^ v = xi x v)."""
    return _SO3


def so2() -> LieAlgebraSpec:
    """so(2), one-dimensional and abelian."""
    return _SO2


def abelian(n: int) -> LieAlgebraSpec:
    """The abelian translation algebra R^n."""
    return LieAlgebraSpec(f"R^{n}", n, np.zeros((n, n, n)), (("abelian", n),))


def direct_sum(*specs: LieAlgebraSpec, name: str | None = None) -> LieAlgebraSpec:
    """Direct product of the given algebras, structure constants block-diagonal."""
    if not specs:
        raise ValueError("direct_sum needs at least one factor")
    dims = [s.dimension for s in specs]
    total = sum(dims)
    c = np.zeros((total, total, total))
    off = 0
    factors: list[tuple] = []
    for s in specs:
        d = s.dimension
        c[off:off + d, off:off + d, off:off + d] = s.structure_constants
        if s.factors is None:
            raise UnsupportedAlgebraError("direct_sum needs factor information on every summand")
        factors.extend(s.factors)
        off += d
    label = name or "+".join(s.name for s in specs)
    return LieAlgebraSpec(label, total, c, tuple(factors))


def same_spec(a: LieAlgebraSpec, b: LieAlgebraSpec) -> bool:
    return a is b or (
        a.name == b.name
        and a.dimension == b.dimension
        and np.array_equal(a.structure_constants, b.structure_constants)
    )


def _require_same_spec(a: LieAlgebraSpec, b: LieAlgebraSpec) -> None:
    if not same_spec(a, b):
        raise SpecMismatchError(f"mismatched algebra specs: {a.name!r} vs {b.name!r}")


# ---------------------------------------------------------------------------
# Vectors, covectors and elementary operations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AlgebraVector:
    coords: np.ndarray
    spec: LieAlgebraSpec

    def __post_init__(self):
        v = _float_array(self.coords).reshape(-1)
        if v.shape != (self.spec.dimension,):
            raise ValueError(f"expected {self.spec.dimension} coordinates, got {v.shape}")
        object.__setattr__(self, "coords", v)


@dataclass(frozen=True, eq=False)
class CoalgebraCovector:
    coords: np.ndarray
    spec: LieAlgebraSpec

    def __post_init__(self):
        v = _float_array(self.coords).reshape(-1)
        if v.shape != (self.spec.dimension,):
            raise ValueError(f"expected {self.spec.dimension} coordinates, got {v.shape}")
        object.__setattr__(self, "coords", v)


def pairing(mu: CoalgebraCovector, xi: AlgebraVector) -> float:
    """<mu, xi> in the dual-basis convention (coordinate dot product)."""
    _require_same_spec(mu.spec, xi.spec)
    return float(np.dot(mu.coords, xi.coords))


def bracket_coords(spec: LieAlgebraSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ijk,i,j->k", spec.structure_constants, a, b)


def bracket(xi: AlgebraVector, eta: AlgebraVector) -> AlgebraVector:
    """[xi, eta] through the structure constants."""
    _require_same_spec(xi.spec, eta.spec)
    return AlgebraVector(bracket_coords(xi.spec, xi.coords, eta.coords), xi.spec)


def coadjoint_algebra_coords(spec: LieAlgebraSpec, xi: np.ndarray, mu: np.ndarray) -> np.ndarray:
    # <ad*_xi mu, e_j> = <mu, [xi, e_j]>
    return np.einsum("ijk,i,k->j", spec.structure_constants, xi, mu)


def coadjoint_algebra(xi: AlgebraVector, mu: CoalgebraCovector) -> CoalgebraCovector:
    """ad*_xi mu, defined by <ad*_xi mu, eta> = <mu, [xi, eta]>."""
    _require_same_spec(xi.spec, mu.spec)
    return CoalgebraCovector(coadjoint_algebra_coords(xi.spec, xi.coords, mu.coords), xi.spec)


# ---------------------------------------------------------------------------
# Hat maps and rotation formulas
# ---------------------------------------------------------------------------

def hat3(w: np.ndarray) -> np.ndarray:
    """3x3 antisymmetric matrix with hat3(w) @ v == cross(w, v)."""
    w = np.asarray(w, dtype=float).reshape(3)
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def unhat3(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def rodrigues(w: np.ndarray) -> np.ndarray:
    """Closed-form exp of hat3(w) on SO(3)."""
    w = np.asarray(w, dtype=float).reshape(3)
    theta = float(np.linalg.norm(w))
    k = hat3(w)
    if theta < 1e-8:
        # second-order series; truncation error below 1e-24 in this regime
        return np.eye(3) + k + 0.5 * (k @ k)
    return np.eye(3) + (np.sin(theta) / theta) * k + ((1.0 - np.cos(theta)) / theta**2) * (k @ k)


def rotation2(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotation_taking(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """A rotation matrix R with R @ (a/|a|) = b/|b| (deterministic choice)."""
    a = np.asarray(a, dtype=float).reshape(3)
    b = np.asarray(b, dtype=float).reshape(3)
    ah = a / np.linalg.norm(a)
    bh = b / np.linalg.norm(b)
    c = np.cross(ah, bh)
    d = float(np.dot(ah, bh))
    nc = float(np.linalg.norm(c))
    if nc < 1e-12:
        if d > 0.0:
            return np.eye(3)
        # antipodal: rotate by pi about any axis orthogonal to a
        trial = np.array([1.0, 0.0, 0.0])
        if abs(np.dot(trial, ah)) > 0.9:
            trial = np.array([0.0, 1.0, 0.0])
        axis = trial - np.dot(trial, ah) * ah
        axis /= np.linalg.norm(axis)
        return rodrigues(np.pi * axis)
    axis = c / nc
    angle = float(np.arctan2(nc, d))
    return rodrigues(angle * axis)


# ---------------------------------------------------------------------------
# Group elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroupElement:
    """One ndarray block per primitive factor: rotation matrix or translation."""

    spec: LieAlgebraSpec
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        factors = self.spec.factors
        if factors is None:
            raise UnsupportedAlgebraError(f"algebra {self.spec.name!r} has no group structure")
        if len(self.blocks) != len(factors):
            raise ValueError("one block per group factor required")
        blocks = []
        for factor, blk in zip(factors, self.blocks):
            b = _float_array(blk)
            kind = factor[0]
            if kind in ("so2", "so3"):
                n = 2 if kind == "so2" else 3
                if b.shape != (n, n):
                    raise ValueError(f"{kind} block must be {n}x{n}")
                if np.max(np.abs(b.T @ b - np.eye(n))) > GROUP_ORTHOGONALITY_TOL:
                    raise ValueError(f"{kind} block is not orthogonal within {GROUP_ORTHOGONALITY_TOL}")
                if abs(np.linalg.det(b) - 1.0) > 1e-9:
                    raise ValueError(f"{kind} block must have determinant +1")
            else:
                b = b.reshape(-1)
                if b.shape != (factor[1],):
                    raise ValueError("translation block has wrong length")
            blocks.append(b)
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def matrix(self) -> np.ndarray:
        """Block-diagonal defining representation; identity blocks for translations."""
        mats = []
        for factor, blk in zip(self.spec.factors, self.blocks):
            if factor[0] in ("so2", "so3"):
                mats.append(blk)
            else:
                mats.append(np.eye(factor[1]))
        out = np.zeros((sum(m.shape[0] for m in mats),) * 2)
        off = 0
        for m in mats:
            n = m.shape[0]
            out[off:off + n, off:off + n] = m
            off += n
        return out

    @property
    def translation(self) -> np.ndarray:
        """Concatenated translation parts (empty array for pure rotation groups)."""
        parts = [blk for factor, blk in zip(self.spec.factors, self.blocks) if factor[0] == "abelian"]
        return np.concatenate(parts) if parts else np.zeros(0)


def identity_element(spec: LieAlgebraSpec) -> GroupElement:
    blocks = []
    for factor in spec.factors if spec.factors is not None else ():
        if factor[0] == "so3":
            blocks.append(np.eye(3))
        elif factor[0] == "so2":
            blocks.append(np.eye(2))
        else:
            blocks.append(np.zeros(factor[1]))
    if spec.factors is None:
        raise UnsupportedAlgebraError(f"algebra {spec.name!r} has no group structure")
    return GroupElement(spec, tuple(blocks))


def group_multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    _require_same_spec(g.spec, h.spec)
    blocks = []
    for factor, bg, bh in zip(g.spec.factors, g.blocks, h.blocks):
        if factor[0] in ("so2", "so3"):
            blocks.append(bg @ bh)
        else:
            blocks.append(bg + bh)
    return GroupElement(g.spec, tuple(blocks))


def group_inverse(g: GroupElement) -> GroupElement:
    blocks = []
    for factor, blk in zip(g.spec.factors, g.blocks):
        if factor[0] in ("so2", "so3"):
            blocks.append(blk.T.copy())
        else:
            blocks.append(-blk)
    return GroupElement(g.spec, tuple(blocks))


def _split_by_factors(spec: LieAlgebraSpec, coords: np.ndarray) -> list[np.ndarray]:
    dims = spec.factor_dims()
    out = []
    off = 0
    for d in dims:
        out.append(coords[off:off + d])
        off += d
    return out


def exponential(xi: AlgebraVector) -> GroupElement:
    """Group exponential, factor by factor (Rodrigues for so(3))."""
    spec = xi.spec
    blocks = []
    for factor, part in zip(spec.factors if spec.factors is not None else (), _split_by_factors(spec, xi.coords)):
        if factor[0] == "so3":
            blocks.append(rodrigues(part))
        elif factor[0] == "so2":
            blocks.append(rotation2(float(part[0])))
        else:
            blocks.append(part.copy())
    if spec.factors is None:
        raise UnsupportedAlgebraError(f"algebra {spec.name!r} has no group structure")
    return GroupElement(spec, tuple(blocks))


def adjoint(g: GroupElement, xi: AlgebraVector) -> AlgebraVector:
    """Ad_g xi; rotation factors act by their matrix, abelian factors trivially."""
    _require_same_spec(g.spec, xi.spec)
    parts = []
    for factor, blk, part in zip(g.spec.factors, g.blocks, _split_by_factors(g.spec, xi.coords)):
        if factor[0] == "so3":
            parts.append(blk @ part)
        else:
            parts.append(part.copy())
    return AlgebraVector(np.concatenate(parts), g.spec)


def coadjoint_group(g: GroupElement, mu: CoalgebraCovector) -> CoalgebraCovector:
    """Ad*_{g^{-1}} mu, defined by <Ad*_{g^{-1}} mu, xi> = <mu, Ad_{g^{-1}} xi>."""
    _require_same_spec(g.spec, mu.spec)
    parts = []
    for factor, blk, part in zip(g.spec.factors, g.blocks, _split_by_factors(g.spec, mu.coords)):
        if factor[0] == "so3":
            # <mu, R^T xi> = <R mu, xi>
            parts.append(blk @ part)
        else:
            parts.append(part.copy())
    return CoalgebraCovector(np.concatenate(parts), g.spec)


# ---------------------------------------------------------------------------
# Affine coadjoint machinery (two-cocycle correction)
# ---------------------------------------------------------------------------

def affine_generator_coords(
    spec: LieAlgebraSpec, xi: np.ndarray, nu: np.ndarray, two_cocycle: np.ndarray | None = None
) -> np.ndarray:
    """Coordinates of -ad*_xi nu + Sigma(xi, .) on the dual."""
    out = -coadjoint_algebra_coords(spec, xi, nu)
    if two_cocycle is not None:
        out = out + np.asarray(two_cocycle, dtype=float).T @ np.asarray(xi, dtype=float)
    return out


def affine_generator(
    xi: AlgebraVector, nu: CoalgebraCovector, two_cocycle: np.ndarray | None = None
) -> CoalgebraCovector:
    """Infinitesimal generator of the affine action on the dual at nu."""
    _require_same_spec(xi.spec, nu.spec)
    return CoalgebraCovector(affine_generator_coords(xi.spec, xi.coords, nu.coords, two_cocycle), xi.spec)


def affine_generator_matrix(
    spec: LieAlgebraSpec, nu: np.ndarray, two_cocycle: np.ndarray | None = None
) -> np.ndarray:
    """Matrix of xi -> -ad*_xi nu + Sigma(xi, .), columns over the algebra basis."""
    d = spec.dimension
    cols = [affine_generator_coords(spec, e, np.asarray(nu, dtype=float), two_cocycle) for e in np.eye(d)]
    return np.column_stack(cols)


def affine_isotropy_basis(
    spec: LieAlgebraSpec, nu: np.ndarray, two_cocycle: np.ndarray | None = None,
    rcond: float = RANK_RCOND,
) -> np.ndarray:
    """Orthonormal basis (columns) of the isotropy algebra of nu under the affine action."""
    return null_space(affine_generator_matrix(spec, nu, two_cocycle), rcond)


# ---------------------------------------------------------------------------
# Sampling helpers
# ---------------------------------------------------------------------------

def random_algebra_vector(spec: LieAlgebraSpec, rng: np.random.Generator, scale: float = 1.0) -> AlgebraVector:
    return AlgebraVector(scale * rng.uniform(-1.0, 1.0, size=spec.dimension), spec)


def random_group_element(spec: LieAlgebraSpec, rng: np.random.Generator, scale: float = 1.0) -> GroupElement:
    return exponential(random_algebra_vector(spec, rng, scale))


# ---------------------------------------------------------------------------
# Structure-constant tables (text serialization used by the test suite)
# ---------------------------------------------------------------------------

def structure_constants_table(spec: LieAlgebraSpec) -> str:
    """Plain-text table: header lines then one `i j k value` line per nonzero entry."""
    lines = [f"name {spec.name}", f"dimension {spec.dimension}"]
    c = spec.structure_constants
    for (i, j, k), value in np.ndenumerate(c):
        if value != 0.0:
            lines.append(f"{i} {j} {k} {value!r}")
    return "\n".join(lines) + "\n"


def algebra_from_table(text: str) -> LieAlgebraSpec:
    """Parse the table format produced by :func:`structure_constants_table`.

    The result has no group factors attached, so only bracket-level operations
    are available on it.
    """
    name = None
    dim = None
    entries = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("name "):
            name = line[5:].strip()
        elif line.startswith("dimension "):
            dim = int(line.split()[1])
        else:
            i, j, k, value = line.split()
            entries.append((int(i), int(j), int(k), float(value)))
    if name is None or dim is None:
        raise ValueError("table must declare `name` and `dimension`")
    c = np.zeros((dim, dim, dim))
    for i, j, k, value in entries:
        c[i, j, k] = value
    return LieAlgebraSpec(name, dim, c, factors=None)
