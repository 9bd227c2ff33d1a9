"""Bounded complexes of finite free modules over a localized PID.

Grading is homological: the differential in degree n maps C_n to C_{n-1}.
Conventions fixed once here and relied on everywhere:

  * shift(C, k)_n = C_{n-k} with differential (-1)^k d; chain-map components
    shift without signs.
  * cone(f: a -> b)_n = a_{n-1} (+) b_n with differential [[-d_a, 0], [f, d_b]].
  * (C (x) D)_n = sum of C_p (x) D_q over p+q = n, with
    d(x (x) y) = dx (x) y + (-1)^p x (x) dy.
  * dual(C)_n = (C_{-n})^* with differential (-1)^(n+1) times the transpose.

Every constructor validates its defining identities, so objects that exist
are certified: d*d = 0, chain maps commute with differentials, homotopy
equivalences carry explicit homotopies.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rings import (
    DimensionMismatch,
    Matrix,
    PresentedModule,
    kernel_basis,
    matrix_solve,
    smith_cached,
    solve_linear,
)


class InvalidSplit(Exception):
    pass


# ---------------------------------------------------------------------------
# module descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModuleDescriptor:
    """Isomorphism type of a f.g. module: free rank plus invariant factors."""

    spec: object
    free_rank: int
    invariant_factors: tuple

    def is_zero(self):
        return self.free_rank == 0 and not self.invariant_factors

    def localize(self, spec2):
        """The descriptor of the same module after inverting more primes."""
        factors = []
        for d in self.invariant_factors:
            d2 = spec2.coerce(d)
            if not d2.is_unit():
                factors.append(spec2.el(d2.sfree_part()))
        return ModuleDescriptor(spec2, self.free_rank, tuple(factors))

    def __repr__(self):
        parts = []
        if self.free_rank:
            parts.append(f"free^{self.free_rank}")
        parts.extend(f"tors({d!r})" for d in self.invariant_factors)
        return "Mod(" + (" + ".join(parts) if parts else "0") + ")"


# ---------------------------------------------------------------------------
# complexes and chain maps
# ---------------------------------------------------------------------------


class Complex:
    __slots__ = ("spec", "ranks", "diffs")

    def __init__(self, spec, ranks, diffs, validate=True):
        self.spec = spec
        self.ranks = {n: r for n, r in ranks.items() if r > 0}
        ds = {}
        for n, m in diffs.items():
            if self.rank(n) > 0 and self.rank(n - 1) > 0:
                if not isinstance(m, Matrix):
                    m = Matrix(spec, m)
                if m.rows != self.rank(n - 1) or m.cols != self.rank(n):
                    raise DimensionMismatch(
                        f"differential at degree {n} has shape "
                        f"{m.rows}x{m.cols}, expected {self.rank(n-1)}x{self.rank(n)}")
                if not m.is_zero():
                    ds[n] = m
        self.diffs = ds
        if validate:
            for n in list(ds):
                if self.rank(n - 2) > 0:
                    prod = self.d(n - 1) * self.d(n)
                    if not prod.is_zero():
                        raise ValueError(f"d*d != 0 between degrees {n} and {n-2}")

    def rank(self, n):
        return self.ranks.get(n, 0)

    def d(self, n):
        m = self.diffs.get(n)
        if m is not None:
            return m
        return Matrix.zero(self.spec, self.rank(n - 1), self.rank(n))

    def degrees(self):
        return sorted(self.ranks)

    def min_degree(self):
        return min(self.ranks) if self.ranks else 0

    def max_degree(self):
        return max(self.ranks) if self.ranks else 0

    def is_zero_object(self):
        return not self.ranks

    def total_rank(self):
        return sum(self.ranks.values())

    def change_spec(self, spec2):
        return Complex(spec2, dict(self.ranks),
                       {n: m.change_spec(spec2) for n, m in self.diffs.items()},
                       validate=False)

    def __eq__(self, other):
        return (isinstance(other, Complex) and self.spec == other.spec
                and self.ranks == other.ranks and self.diffs == other.diffs)

    def __hash__(self):
        return hash((tuple(sorted(self.ranks.items())),
                     tuple(sorted((n, m) for n, m in self.diffs.items()))))

    def __repr__(self):
        if not self.ranks:
            return "Complex(0)"
        return "Complex(" + ", ".join(f"{n}:{self.rank(n)}" for n in self.degrees()) + ")"


def zero_complex(spec):
    return Complex(spec, {}, {})


def free_complex(spec, n, rank=1):
    return Complex(spec, {n: rank}, {})


def cyclic_complex(spec, element, n=0):
    """[R --e--> R] in degrees (n+1, n); the cone of multiplication by e."""
    e = spec.coerce(element)
    return Complex(spec, {n + 1: 1, n: 1}, {n + 1: Matrix(spec, [[e]])})


class ChainMap:
    __slots__ = ("source", "target", "comps")

    def __init__(self, source, target, comps, validate=True):
        if source.spec != target.spec:
            raise ValueError("chain map between different ring specs")
        self.source = source
        self.target = target
        cs = {}
        for n, m in comps.items():
            if source.rank(n) == 0 or target.rank(n) == 0:
                continue
            if not isinstance(m, Matrix):
                m = Matrix(source.spec, m)
            if m.rows != target.rank(n) or m.cols != source.rank(n):
                raise DimensionMismatch(f"component at degree {n} has wrong shape")
            if not m.is_zero():
                cs[n] = m
        self.comps = cs
        if validate:
            for n in set(source.ranks) | {k + 1 for k in cs}:
                lhs = self.comp(n - 1) * source.d(n)
                rhs = target.d(n) * self.comp(n)
                if lhs != rhs:
                    raise ValueError(f"does not commute with d at degree {n}")

    def comp(self, n):
        m = self.comps.get(n)
        if m is not None:
            return m
        return Matrix.zero(self.source.spec, self.target.rank(n), self.source.rank(n))

    @staticmethod
    def identity(c):
        return ChainMap(c, c, {n: Matrix.identity(c.spec, c.rank(n))
                               for n in c.degrees()}, validate=False)

    @staticmethod
    def zero(source, target):
        return ChainMap(source, target, {}, validate=False)

    def is_zero(self):
        return not self.comps

    def __mul__(self, other):
        """Composition self o other."""
        if isinstance(other, ChainMap):
            if other.target != self.source:
                raise DimensionMismatch("composition mismatch")
            comps = {}
            for n in other.comps:
                if self.source.rank(n) and self.target.rank(n):
                    comps[n] = self.comp(n) * other.comp(n)
            return ChainMap(other.source, self.target, comps, validate=False)
        return self.scale(other)

    def scale(self, scalar):
        return ChainMap(self.source, self.target,
                        {n: m.scale(scalar) for n, m in self.comps.items()},
                        validate=False)

    def __add__(self, other):
        if self.source != other.source or self.target != other.target:
            raise DimensionMismatch("chain map addition mismatch")
        comps = {}
        for n in set(self.comps) | set(other.comps):
            comps[n] = self.comp(n) + other.comp(n)
        return ChainMap(self.source, self.target, comps, validate=False)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return (isinstance(other, ChainMap) and self.source == other.source
                and self.target == other.target and self.comps == other.comps)

    def __repr__(self):
        return f"ChainMap({self.source!r} -> {self.target!r})"

    def change_spec(self, spec2):
        return ChainMap(self.source.change_spec(spec2), self.target.change_spec(spec2),
                        {n: m.change_spec(spec2) for n, m in self.comps.items()},
                        validate=False)


@dataclass
class Homotopy:
    """Components h_n : source_n -> target_{n+1} witnessing f - g = dh + hd."""

    source: Complex
    target: Complex
    comps: dict

    def comp(self, n):
        m = self.comps.get(n)
        if m is not None:
            return m
        return Matrix.zero(self.source.spec, self.target.rank(n + 1), self.source.rank(n))

    def witnesses(self, f, g):
        for n in set(self.source.ranks) | set(self.target.ranks):
            lhs = f.comp(n) - g.comp(n)
            rhs = self.target.d(n + 1) * self.comp(n) + self.comp(n - 1) * self.source.d(n)
            if lhs != rhs:
                return False
        return True


def shift(c, k=1):
    """shift(C, k)_n = C_{n-k}; odd shifts negate the differentials."""
    sign = -1 if k % 2 else 1
    ranks = {n + k: r for n, r in c.ranks.items()}
    diffs = {n + k: (m.scale(c.spec.from_int(sign)) if sign < 0 else m)
             for n, m in c.diffs.items()}
    return Complex(c.spec, ranks, diffs, validate=False)


def shift_map(f, k=1):
    return ChainMap(shift(f.source, k), shift(f.target, k),
                    {n + k: m for n, m in f.comps.items()}, validate=False)


def direct_sum(cs):
    """Direct sum of complexes; summand order fixes the coordinate blocks."""
    cs = list(cs)
    if not cs:
        raise ValueError("empty direct sum needs a spec; use zero_complex")
    spec = cs[0].spec
    degrees = sorted({n for c in cs for n in c.ranks})
    ranks = {n: sum(c.rank(n) for c in cs) for n in degrees}
    diffs = {}
    for n in degrees:
        if ranks.get(n - 1, 0) and ranks.get(n, 0):
            blocks = [c.d(n) for c in cs]
            diffs[n] = _diag_blocks(spec, blocks)
    return Complex(spec, ranks, diffs, validate=False)


def _diag_blocks(spec, blocks):
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = Matrix.zero(spec, rows, cols).to_lists()
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                out[r0 + i][c0 + j] = b.e(i, j)
        r0 += b.rows
        c0 += b.cols
    return Matrix(spec, out, rows=rows, cols=cols)


def sum_inclusion(cs, idx):
    """Inclusion of the idx-th summand into direct_sum(cs)."""
    total = direct_sum(cs)
    c = cs[idx]
    comps = {}
    for n in c.degrees():
        m = Matrix.zero(c.spec, total.rank(n), c.rank(n)).to_lists()
        off = sum(x.rank(n) for x in cs[:idx])
        for i in range(c.rank(n)):
            m[off + i][i] = c.spec.one()
        comps[n] = Matrix(c.spec, m, rows=total.rank(n), cols=c.rank(n))
    return ChainMap(c, total, comps, validate=False)


def sum_projection(cs, idx):
    """Projection of direct_sum(cs) onto its idx-th summand."""
    total = direct_sum(cs)
    c = cs[idx]
    comps = {}
    for n in c.degrees():
        m = Matrix.zero(c.spec, c.rank(n), total.rank(n)).to_lists()
        off = sum(x.rank(n) for x in cs[:idx])
        for i in range(c.rank(n)):
            m[i][off + i] = c.spec.one()
        comps[n] = Matrix(c.spec, m, rows=c.rank(n), cols=total.rank(n))
    return ChainMap(total, c, comps, validate=False)


def sum_map(maps):
    """Block-diagonal chain map between the direct sums of sources/targets."""
    src = direct_sum([f.source for f in maps])
    tgt = direct_sum([f.target for f in maps])
    spec = src.spec
    comps = {}
    for n in src.degrees():
        if tgt.rank(n):
            comps[n] = _diag_blocks(spec, [f.comp(n) for f in maps])
    return ChainMap(src, tgt, comps, validate=False)


# ---------------------------------------------------------------------------
# cones and triangles
# ---------------------------------------------------------------------------


def cone_complex(f):
    """cone(f)_n = source_{n-1} (+) target_n, d = [[-d_a, 0], [f, d_b]]."""
    a, b = f.source, f.target
    spec = a.spec
    ranks = {}
    for n in set(k + 1 for k in a.ranks) | set(b.ranks):
        r = a.rank(n - 1) + b.rank(n)
        if r:
            ranks[n] = r
    diffs = {}
    for n in ranks:
        if ranks.get(n - 1, 0):
            top = Matrix.hstack([-a.d(n - 1), Matrix.zero(spec, a.rank(n - 2), b.rank(n))])
            bot = Matrix.hstack([f.comp(n - 1), b.d(n)])
            diffs[n] = Matrix.vstack([top, bot])
    return Complex(spec, ranks, diffs, validate=False)


def cone_inclusion(f, c=None):
    c = c if c is not None else cone_complex(f)
    b = f.target
    spec = b.spec
    comps = {}
    for n in b.degrees():
        m = Matrix.zero(spec, c.rank(n), b.rank(n)).to_lists()
        off = f.source.rank(n - 1)
        for i in range(b.rank(n)):
            m[off + i][i] = spec.one()
        comps[n] = Matrix(spec, m, rows=c.rank(n), cols=b.rank(n))
    return ChainMap(b, c, comps, validate=False)


def cone_projection(f, c=None):
    c = c if c is not None else cone_complex(f)
    ta = shift(f.source, 1)
    spec = ta.spec
    comps = {}
    for n in ta.degrees():
        m = Matrix.zero(spec, ta.rank(n), c.rank(n)).to_lists()
        for i in range(ta.rank(n)):
            m[i][i] = spec.one()
        comps[n] = Matrix(spec, m, rows=ta.rank(n), cols=c.rank(n))
    return ChainMap(c, ta, comps, validate=False)


@dataclass
class Triangle:
    """a --f--> b --g--> c --h--> shift(a, 1), cone-normal or normalized.

    When norm is None, c must literally be cone(f) with canonical g and h.
    Otherwise norm is a homotopy equivalence cone(f) ~ c compatible with
    g and h up to homotopy.
    """

    a: Complex
    b: Complex
    c: Complex
    f: ChainMap
    g: ChainMap
    h: ChainMap
    norm: object = None

    def verify(self):
        cn = cone_complex(self.f)
        if self.norm is None:
            if self.c != cn:
                return False
            return (self.g == cone_inclusion(self.f, cn)
                    and self.h == cone_projection(self.f, cn))
        if not self.norm.verify():
            return False
        if self.norm.source != cn or self.norm.target != self.c:
            return False
        gg = self.norm.fwd * cone_inclusion(self.f, cn)
        if is_null_homotopic(self.g - gg) is None:
            return False
        hh = cone_projection(self.f, cn) * self.norm.bwd
        return is_null_homotopic(self.h - hh) is not None


def cone_triangle(f):
    c = cone_complex(f)
    return Triangle(f.source, f.target, c, f,
                    cone_inclusion(f, c), cone_projection(f, c), None)


# ---------------------------------------------------------------------------
# tensor, dual, internal hom
# ---------------------------------------------------------------------------


def _tensor_slots(a, b, n):
    """Ordered (p, q) blocks with p+q = n and both ranks positive."""
    return [(p, n - p) for p in sorted(a.ranks) if b.rank(n - p) > 0]


def tensor(a, b):
    spec = a.spec
    ranks = {}
    degs = set()
    for p in a.ranks:
        for q in b.ranks:
            degs.add(p + q)
    for n in degs:
        r = sum(a.rank(p) * b.rank(q) for p, q in _tensor_slots(a, b, n))
        if r:
            ranks[n] = r
    diffs = {}
    for n in ranks:
        if ranks.get(n - 1, 0) == 0:
            continue
        src_slots = _tensor_slots(a, b, n)
        tgt_slots = _tensor_slots(a, b, n - 1)
        tgt_off = {}
        off = 0
        for (p, q) in tgt_slots:
            tgt_off[(p, q)] = off
            off += a.rank(p) * b.rank(q)
        m = Matrix.zero(spec, ranks[n - 1], ranks[n]).to_lists()
        col = 0
        for (p, q) in src_slots:
            ra, rb = a.rank(p), b.rank(q)
            da = a.d(p)
            if (p - 1, q) in tgt_off and a.rank(p - 1):
                base = tgt_off[(p - 1, q)]
                for i in range(a.rank(p - 1)):
                    for ii in range(ra):
                        x = da.e(i, ii)
                        if x.is_zero():
                            continue
                        for j in range(rb):
                            m[base + i * rb + j][col + ii * rb + j] = x
            db = b.d(q)
            sign = spec.from_int(-1 if p % 2 else 1)
            if (p, q - 1) in tgt_off and b.rank(q - 1):
                base = tgt_off[(p, q - 1)]
                for j in range(b.rank(q - 1)):
                    for jj in range(rb):
                        x = db.e(j, jj)
                        if x.is_zero():
                            continue
                        xs = x * sign
                        for i in range(ra):
                            m[base + i * b.rank(q - 1) + j][col + i * rb + jj] = xs
            col += ra * rb
        diffs[n] = Matrix(spec, m, rows=ranks[n - 1], cols=ranks[n])
    return Complex(spec, ranks, diffs)


def dual(c):
    spec = c.spec
    ranks = {-n: r for n, r in c.ranks.items()}
    diffs = {}
    for n in ranks:
        if ranks.get(n - 1, 0):
            # dual_n -> dual_{n-1} is (-1)^(n+1) (d_{-n+1})^T
            m = c.d(-n + 1).transpose()
            if n % 2 == 0:
                m = -m
            diffs[n] = m
    return Complex(spec, ranks, diffs, validate=False)


def internal_hom(a, b):
    return tensor(dual(a), b)


# ---------------------------------------------------------------------------
# homology
# ---------------------------------------------------------------------------


def homology(c, n):
    """ModuleDescriptor of H_n(c)."""
    return homology_module(c, n).descriptor()


def homology_module(c, n):
    """Presented module ker d_n / im d_{n+1}, with cycle anchors retained."""
    spec = c.spec
    if c.rank(n) == 0:
        return _HomologyData(spec, Matrix.zero(spec, 0, 0),
                             PresentedModule.free(spec, 0))
    z = kernel_basis(c.d(n))
    if c.rank(n + 1) == 0:
        return _HomologyData(spec, z, PresentedModule.free(spec, z.cols))
    x = matrix_solve(z, c.d(n + 1))
    if x is None:
        raise ArithmeticError("image does not lie in the kernel")
    return _HomologyData(spec, z, PresentedModule(spec, x))


class _HomologyData:
    """Kernel basis (cycles) plus the presentation of the homology quotient."""

    def __init__(self, spec, cycles, pres):
        self.spec = spec
        self.cycles = cycles  # rank_n x z matrix
        self.pres = pres

    def descriptor(self):
        return self.pres.descriptor()

    def coords_of_cycle(self, vec):
        """Class coordinates (over the presentation) of a cycle vector."""
        sol = solve_linear(self.cycles, vec)
        if sol is None:
            raise ArithmeticError("vector is not a cycle")
        return self.pres.reduce(sol)

    def class_generators(self):
        """Vectors in the chain group generating the homology, Smith-aligned."""
        if self.pres.snf is None:
            li = Matrix.identity(self.spec, self.pres.ngens)
        else:
            li = self.pres.snf.left_inv
        gens = []
        diag = self.pres.snf.diagonal if self.pres.snf else []
        for i in range(self.pres.ngens):
            d = diag[i] if i < len(diag) else None
            if d is not None and d.is_unit():
                continue
            gens.append(self.cycles.apply_vec(li.col(i)))
        return gens


# ---------------------------------------------------------------------------
# hom complexes: derived homs with explicit generators
# ---------------------------------------------------------------------------


class HomModule:
    """Hom_K(a, shift(b, n)) with a presentation and generator chain maps.

    Internally: degree-m part of the hom complex has basis indexed by
    (k, i, j) for maps a_k -> b_{k+m}; m = -n.  The differential is
    D(phi) = d_b o phi - (-1)^m phi o d_a.  Chain maps modulo homotopy in
    the given shift are the homology of this complex at m.
    """

    def __init__(self, a, b, n):
        self.a, self.b, self.n = a, b, n
        self.spec = a.spec
        m = -n
        self.m = m
        self.slots = self._slots(m)
        self.pos = {s: i for i, s in enumerate(self.slots)}
        d_in = self._diff_matrix(m + 1)   # H_{m+1} -> H_m
        d_out = self._diff_matrix(m)      # H_m -> H_{m-1}
        self.z = kernel_basis(d_out)
        x = matrix_solve(self.z, d_in)
        if x is None:
            raise ArithmeticError("hom complex differential failure")
        self.pres = PresentedModule(self.spec, x)
        self._d_in = d_in

    def _slots(self, m):
        out = []
        for k in sorted(self.a.ranks):
            if self.b.rank(k + m) > 0:
                for i in range(self.b.rank(k + m)):
                    for j in range(self.a.rank(k)):
                        out.append((k, i, j))
        return out

    def _dim(self, m):
        return sum(self.b.rank(k + m) * self.a.rank(k) for k in self.a.ranks)

    def _diff_matrix(self, m):
        """Matrix of D: H_m -> H_{m-1} in the slot bases."""
        a, b, spec = self.a, self.b, self.spec
        src = []
        for k in sorted(a.ranks):
            if b.rank(k + m) > 0:
                for i in range(b.rank(k + m)):
                    for j in range(a.rank(k)):
                        src.append((k, i, j))
        tgt = []
        for k in sorted(a.ranks):
            if b.rank(k + m - 1) > 0:
                for i in range(b.rank(k + m - 1)):
                    for j in range(a.rank(k)):
                        tgt.append((k, i, j))
        tpos = {s: i for i, s in enumerate(tgt)}
        rows = Matrix.zero(spec, len(tgt), len(src)).to_lists()
        sign = spec.from_int(-1 if m % 2 else 1)
        for c_idx, (k, i, j) in enumerate(src):
            db = b.d(k + m)
            for i2 in range(b.rank(k + m - 1)):
                x = db.e(i2, i)
                if not x.is_zero() and (k, i2, j) in tpos:
                    r = tpos[(k, i2, j)]
                    rows[r][c_idx] = rows[r][c_idx] + x
            da = a.d(k + 1)
            for j2 in range(a.rank(k + 1)):
                x = da.e(j, j2)
                if not x.is_zero() and (k + 1, i, j2) in tpos:
                    r = tpos[(k + 1, i, j2)]
                    rows[r][c_idx] = rows[r][c_idx] + x * sign
        return Matrix(spec, rows, rows=len(tgt), cols=len(src))

    # -- conversions -------------------------------------------------------

    def flatten(self, f):
        """Slot vector of a chain map a -> shift(b, n)."""
        vec = [self.spec.zero()] * len(self.slots)
        for k in sorted(self.a.ranks):
            comp = f.comp(k)
            for i in range(comp.rows):
                for j in range(comp.cols):
                    x = comp.e(i, j)
                    if not x.is_zero():
                        vec[self.pos[(k, i, j)]] = x
        return vec

    def unflatten(self, vec):
        """Chain map a -> shift(b, n) from a slot vector (assumed a cycle)."""
        tgt = shift(self.b, self.n)
        comps = {}
        for k in sorted(self.a.ranks):
            if self.b.rank(k + self.m) == 0:
                continue
            m = Matrix.zero(self.spec, self.b.rank(k + self.m), self.a.rank(k)).to_lists()
            for i in range(self.b.rank(k + self.m)):
                for j in range(self.a.rank(k)):
                    m[i][j] = vec[self.pos[(k, i, j)]]
            comps[k] = Matrix(self.spec, m, rows=self.b.rank(k + self.m),
                              cols=self.a.rank(k))
        return ChainMap(self.a, tgt, comps)

    def descriptor(self):
        return self.pres.descriptor()

    def coords(self, f):
        """Canonical class coordinates of a chain map a -> shift(b, n)."""
        vec = self.flatten(f)
        sol = solve_linear(self.z, vec)
        if sol is None:
            raise ArithmeticError("map is not a cycle in the hom complex")
        return self.pres.reduce(sol)

    def element(self, reduced_coords):
        """A chain map representing the class with given canonical coords."""
        if self.pres.snf is None:
            y = list(reduced_coords)
        else:
            y = self.pres.snf.left_inv.apply_vec(reduced_coords)
        return self.unflatten(self.z.apply_vec(y))

    def generators(self):
        """(index, chain map) for each cyclic summand of the hom module."""
        out = []
        diag = self.pres.snf.diagonal if self.pres.snf else []
        for i in range(self.pres.ngens):
            d = diag[i] if i < len(diag) else None
            if d is not None and d.is_unit():
                continue
            coords = [self.spec.zero()] * self.pres.ngens
            coords[i] = self.spec.one()
            out.append((i, self.element(coords)))
        return out

    def classes_equal(self, f, g):
        ca, cb = self.coords(f), self.coords(g)
        return all((x - y).is_zero() for x, y in zip(ca, cb))

    def is_zero_class(self, f):
        return all(x.is_zero() for x in self.coords(f))


def hom_derived(a, b, n):
    """The group of chain maps a -> shift(b, n) modulo homotopy."""
    return HomModule(a, b, n)


# ---------------------------------------------------------------------------
# homotopies and equivalences
# ---------------------------------------------------------------------------


def is_null_homotopic(f):
    """A Homotopy with f = dh + hd, or None when no homotopy exists."""
    a, b = f.source, f.target
    spec = a.spec
    # unknowns h_k : a_k -> b_{k+1}
    slots = []
    for k in sorted(a.ranks):
        if b.rank(k + 1) > 0:
            for i in range(b.rank(k + 1)):
                for j in range(a.rank(k)):
                    slots.append((k, i, j))
    pos = {s: i for i, s in enumerate(slots)}
    eqs = []
    for k in sorted(set(a.ranks)):
        if b.rank(k) == 0:
            if not f.comp(k).is_zero():
                return None
            continue
        db = b.d(k + 1)
        da = a.d(k)
        fk = f.comp(k)
        for i in range(b.rank(k)):
            for j in range(a.rank(k)):
                row = [spec.zero()] * len(slots)
                for l in range(b.rank(k + 1)):
                    x = db.e(i, l)
                    if not x.is_zero():
                        row[pos[(k, l, j)]] = row[pos[(k, l, j)]] + x
                for l in range(a.rank(k - 1)):
                    x = da.e(l, j)
                    if not x.is_zero() and (k - 1, i, l) in pos:
                        row[pos[(k - 1, i, l)]] = row[pos[(k - 1, i, l)]] + x
                eqs.append((row, fk.e(i, j)))
    if not slots:
        if any(not rhs.is_zero() for _row, rhs in eqs):
            return None
        return Homotopy(a, b, {})
    mat = Matrix(spec, [row for row, _ in eqs], rows=len(eqs), cols=len(slots))
    rhs = [r for _, r in eqs]
    sol = solve_linear(mat, rhs)
    if sol is None:
        return None
    comps = {}
    for k in sorted(a.ranks):
        if b.rank(k + 1) == 0:
            continue
        m = Matrix.zero(spec, b.rank(k + 1), a.rank(k)).to_lists()
        for i in range(b.rank(k + 1)):
            for j in range(a.rank(k)):
                m[i][j] = sol[pos[(k, i, j)]]
        comps[k] = Matrix(spec, m, rows=b.rank(k + 1), cols=a.rank(k))
    return Homotopy(a, b, comps)


def homotopic(f, g):
    return is_null_homotopic(f - g) is not None


@dataclass
class HtpyEquiv:
    """fwd/bwd with homotopies: bwd*fwd - 1 = d h_src + h_src d, same for tgt."""

    fwd: ChainMap
    bwd: ChainMap
    h_src: Homotopy
    h_tgt: Homotopy

    @property
    def source(self):
        return self.fwd.source

    @property
    def target(self):
        return self.fwd.target

    @staticmethod
    def identity(c):
        i = ChainMap.identity(c)
        return HtpyEquiv(i, i, Homotopy(c, c, {}), Homotopy(c, c, {}))

    @staticmethod
    def strict(fwd, bwd):
        eq = HtpyEquiv(fwd, bwd, Homotopy(fwd.source, fwd.source, {}),
                       Homotopy(fwd.target, fwd.target, {}))
        return eq

    def verify(self):
        ids = ChainMap.identity(self.source)
        idt = ChainMap.identity(self.target)
        return (self.h_src.witnesses(self.bwd * self.fwd, ids)
                and self.h_tgt.witnesses(self.fwd * self.bwd, idt))

    def inverse(self):
        return HtpyEquiv(self.bwd, self.fwd, self.h_tgt, self.h_src)

    def compose(self, other):
        """self: A ~ B composed with other: B ~ C, giving A ~ C."""
        fwd = other.fwd * self.fwd
        bwd = self.bwd * other.bwd
        h_src = _homotopy_add(
            self.h_src,
            _homotopy_conjugate(other.h_src, self.fwd, self.bwd))
        h_tgt = _homotopy_add(
            other.h_tgt,
            _homotopy_conjugate(self.h_tgt, other.bwd, other.fwd))
        return HtpyEquiv(fwd, bwd, h_src, h_tgt)

    @staticmethod
    def direct_sum(eqs):
        fwd = sum_map([e.fwd for e in eqs])
        bwd = sum_map([e.bwd for e in eqs])
        src, tgt = fwd.source, fwd.target
        hs = {}
        for n in src.degrees():
            if src.rank(n + 1) or True:
                blocks = [e.h_src.comp(n) for e in eqs]
                m = _diag_blocks(src.spec, blocks)
                if not m.is_zero():
                    hs[n] = m
        ht = {}
        for n in tgt.degrees():
            blocks = [e.h_tgt.comp(n) for e in eqs]
            m = _diag_blocks(tgt.spec, blocks)
            if not m.is_zero():
                ht[n] = m
        return HtpyEquiv(fwd, bwd, Homotopy(src, src, hs), Homotopy(tgt, tgt, ht))


def _homotopy_add(h1, h2):
    comps = {}
    for n in set(h1.comps) | set(h2.comps):
        m = h1.comp(n) + h2.comp(n)
        if not m.is_zero():
            comps[n] = m
    return Homotopy(h1.source, h1.target, comps)


def _homotopy_conjugate(h, pre, post):
    """post o h o pre as a homotopy on pre.source (pre: X->A, h on A, post: A->X)."""
    comps = {}
    src = pre.source
    for n in src.degrees():
        m = post.comp(n + 1) * h.comp(n) * pre.comp(n)
        if not m.is_zero():
            comps[n] = m
    return Homotopy(src, src, comps)


def homotopy_inverse(f):
    """HtpyEquiv completing f when f is a homotopy equivalence, else None."""
    a, b = f.source, f.target
    spec = a.spec
    # unknowns: g_k : b_k -> a_k, p_k : a_k -> a_{k+1}, q_k : b_k -> b_{k+1}
    slots = []
    for k in sorted(b.ranks):
        if a.rank(k):
            for i in range(a.rank(k)):
                for j in range(b.rank(k)):
                    slots.append(("g", k, i, j))
    for k in sorted(a.ranks):
        if a.rank(k + 1):
            for i in range(a.rank(k + 1)):
                for j in range(a.rank(k)):
                    slots.append(("p", k, i, j))
    for k in sorted(b.ranks):
        if b.rank(k + 1):
            for i in range(b.rank(k + 1)):
                for j in range(b.rank(k)):
                    slots.append(("q", k, i, j))
    pos = {s: i for i, s in enumerate(slots)}
    eqs = []

    def zero_row():
        return [spec.zero()] * len(slots)

    # chain map conditions for g: d_a g - g d_b = 0
    for k in sorted(b.ranks):
        for i in range(a.rank(k - 1)):
            for j in range(b.rank(k)):
                row = zero_row()
                da = a.d(k)
                for l in range(a.rank(k)):
                    x = da.e(i, l)
                    if not x.is_zero() and ("g", k, l, j) in pos:
                        row[pos[("g", k, l, j)]] = row[pos[("g", k, l, j)]] + x
                db = b.d(k)
                for l in range(b.rank(k - 1)):
                    x = db.e(l, j)
                    if not x.is_zero() and ("g", k - 1, i, l) in pos:
                        row[pos[("g", k - 1, i, l)]] = row[pos[("g", k - 1, i, l)]] - x
                eqs.append((row, spec.zero()))

    # g f - 1 = d p + p d on a
    for k in sorted(a.ranks):
        fk = f.comp(k)
        da_k = a.d(k)
        da_k1 = a.d(k + 1)
        for i in range(a.rank(k)):
            for j in range(a.rank(k)):
                row = zero_row()
                for l in range(b.rank(k)):
                    x = fk.e(l, j)
                    if not x.is_zero() and ("g", k, i, l) in pos:
                        row[pos[("g", k, i, l)]] = row[pos[("g", k, i, l)]] + x
                for l in range(a.rank(k + 1)):
                    x = da_k1.e(i, l)
                    if not x.is_zero() and ("p", k, l, j) in pos:
                        row[pos[("p", k, l, j)]] = row[pos[("p", k, l, j)]] - x
                for l in range(a.rank(k - 1)):
                    x = da_k.e(l, j)
                    if not x.is_zero() and ("p", k - 1, i, l) in pos:
                        row[pos[("p", k - 1, i, l)]] = row[pos[("p", k - 1, i, l)]] - x
                rhs = spec.one() if i == j else spec.zero()
                eqs.append((row, rhs))

    # f g - 1 = d q + q d on b
    for k in sorted(b.ranks):
        fk = f.comp(k)
        db_k = b.d(k)
        db_k1 = b.d(k + 1)
        for i in range(b.rank(k)):
            for j in range(b.rank(k)):
                row = zero_row()
                for l in range(a.rank(k)):
                    x = fk.e(i, l)
                    if not x.is_zero() and ("g", k, l, j) in pos:
                        row[pos[("g", k, l, j)]] = row[pos[("g", k, l, j)]] + x
                for l in range(b.rank(k + 1)):
                    x = db_k1.e(i, l)
                    if not x.is_zero() and ("q", k, l, j) in pos:
                        row[pos[("q", k, l, j)]] = row[pos[("q", k, l, j)]] - x
                for l in range(b.rank(k - 1)):
                    x = db_k.e(l, j)
                    if not x.is_zero() and ("q", k - 1, i, l) in pos:
                        row[pos[("q", k - 1, i, l)]] = row[pos[("q", k - 1, i, l)]] - x
                rhs = spec.one() if i == j else spec.zero()
                eqs.append((row, rhs))

    if not slots:
        ok = all(rhs.is_zero() for _row, rhs in eqs)
        if not ok:
            return None
        return HtpyEquiv(f, ChainMap.zero(b, a), Homotopy(a, a, {}), Homotopy(b, b, {}))
    mat = Matrix(spec, [row for row, _ in eqs], rows=len(eqs), cols=len(slots))
    sol = solve_linear(mat, [rhs for _, rhs in eqs])
    if sol is None:
        return None

    def collect(tag, src_c, tgt_c, up):
        comps = {}
        for k in sorted(src_c.ranks):
            rt = tgt_c.rank(k + 1) if up else tgt_c.rank(k)
            if rt == 0:
                continue
            m = Matrix.zero(spec, rt, src_c.rank(k)).to_lists()
            any_nz = False
            for i in range(rt):
                for j in range(src_c.rank(k)):
                    key = (tag, k, i, j)
                    if key in pos:
                        m[i][j] = sol[pos[key]]
                        if not m[i][j].is_zero():
                            any_nz = True
            if any_nz:
                comps[k] = Matrix(spec, m, rows=rt, cols=src_c.rank(k))
        return comps

    g = ChainMap(b, a, collect("g", b, a, False))
    p = Homotopy(a, a, collect("p", a, a, True))
    q = Homotopy(b, b, collect("q", b, b, True))
    return HtpyEquiv(f, g, p, q)


# ---------------------------------------------------------------------------
# formality: normal forms over the (localized) PID backends
# ---------------------------------------------------------------------------


def _piece_key(spec, piece):
    kind, n, data = piece
    if kind == "free":
        return (n, 0, ())
    return (n, 1, spec.base.sort_key(data.sfree_part()))


def _build_pieces_complex(spec, pieces):
    ranks = {}
    for kind, n, data in pieces:
        if kind == "free":
            ranks[n] = ranks.get(n, 0) + 1
        else:
            ranks[n] = ranks.get(n, 0) + 1
            ranks[n + 1] = ranks.get(n + 1, 0) + 1
    offs_low = {}
    offs_high = {}
    cur = dict.fromkeys(ranks, 0)
    diffs_entries = {}
    # allocate coordinates piece by piece, in the given order
    for idx, (kind, n, data) in enumerate(pieces):
        offs_low[idx] = cur[n]
        cur[n] += 1
        if kind == "tors":
            offs_high[idx] = cur[n + 1]
            cur[n + 1] += 1
            diffs_entries.setdefault(n + 1, []).append(
                (offs_low[idx], offs_high[idx], data))
    diffs = {}
    for n1, entries in diffs_entries.items():
        m = Matrix.zero(spec, ranks.get(n1 - 1, 0), ranks.get(n1, 0)).to_lists()
        for (row, col, val) in entries:
            m[row][col] = val
        diffs[n1] = Matrix(spec, m, rows=ranks.get(n1 - 1, 0), cols=ranks.get(n1, 0))
    return Complex(spec, ranks, diffs, validate=False)


def normal_form(c):
    """(pieces, N, HtpyEquiv c ~ N) with pieces sorted canonically.

    Pieces are ("free", n, None) or ("tors", n, delta) occupying degrees
    (n+1, n) with normalized non-unit delta; their sum is N.
    """
    pieces, eq = _normal_form_rec(c)
    order = sorted(range(len(pieces)), key=lambda i: _piece_key(c.spec, pieces[i]))
    sorted_pieces = [pieces[i] for i in order]
    n_sorted = _build_pieces_complex(c.spec, sorted_pieces)
    n_unsorted = eq.target
    # permutation equivalence from the unsorted to the sorted piece complex
    perm = _piece_permutation(c.spec, pieces, order, n_unsorted, n_sorted)
    return sorted_pieces, n_sorted, eq.compose(perm)


def _piece_permutation(spec, pieces, order, src, tgt):
    # coordinate of each piece in src (given order) and in tgt (sorted order)
    def alloc(plist):
        offs = {}
        cur = {}
        for idx, (kind, n, data) in enumerate(plist):
            offs[(idx, "low")] = (n, cur.get(n, 0))
            cur[n] = cur.get(n, 0) + 1
            if kind == "tors":
                offs[(idx, "high")] = (n + 1, cur.get(n + 1, 0))
                cur[n + 1] = cur.get(n + 1, 0) + 1
        return offs
    src_offs = alloc(pieces)
    tgt_offs = alloc([pieces[i] for i in order])
    fwd_entries = {}
    for new_idx, old_idx in enumerate(order):
        for part in ("low", "high"):
            if (old_idx, part) not in src_offs:
                continue
            n_s, i_s = src_offs[(old_idx, part)]
            n_t, i_t = tgt_offs[(new_idx, part)]
            fwd_entries.setdefault(n_s, []).append((i_t, i_s))
    fwd_comps = {}
    bwd_comps = {}
    for n in src.degrees():
        m = Matrix.zero(spec, tgt.rank(n), src.rank(n)).to_lists()
        for (i_t, i_s) in fwd_entries.get(n, []):
            m[i_t][i_s] = spec.one()
        fm = Matrix(spec, m, rows=tgt.rank(n), cols=src.rank(n))
        fwd_comps[n] = fm
        bwd_comps[n] = fm.transpose()
    fwd = ChainMap(src, tgt, fwd_comps)
    bwd = ChainMap(tgt, src, bwd_comps)
    return HtpyEquiv.strict(fwd, bwd)


def _normal_form_rec(c):
    spec = c.spec
    if c.is_zero_object():
        return [], HtpyEquiv.identity(c)
    n0 = c.min_degree()
    d = c.d(n0 + 1)
    snf = smith_cached(d)
    # basis change: L at degree n0, R^{-1} at degree n0+1
    comps_f = {n0: snf.left}
    comps_b = {n0: snf.left_inv}
    if c.rank(n0 + 1):
        comps_f[n0 + 1] = snf.right_inv
        comps_b[n0 + 1] = snf.right
    cp_ranks = dict(c.ranks)
    cp_diffs = {n: m for n, m in c.diffs.items() if n not in (n0 + 1, n0 + 2)}
    dd = snf.left * d * snf.right
    if not dd.is_zero():
        cp_diffs[n0 + 1] = dd
    if c.rank(n0 + 2):
        m2 = snf.right_inv * c.d(n0 + 2)
        if not m2.is_zero():
            cp_diffs[n0 + 2] = m2
    cprime = Complex(spec, cp_ranks, cp_diffs, validate=False)
    for n in list(c.ranks):
        if n not in (n0, n0 + 1):
            comps_f[n] = Matrix.identity(spec, c.rank(n))
            comps_b[n] = Matrix.identity(spec, c.rank(n))
    eq1 = HtpyEquiv.strict(ChainMap(c, cprime, comps_f),
                           ChainMap(cprime, c, comps_b))

    # partition coordinates of cprime at degrees n0, n0+1
    r_low, r_high = c.rank(n0), c.rank(n0 + 1)
    nmin = min(r_low, r_high)
    unit_idx, tors_idx, hit_idx = [], [], []
    for i in range(nmin):
        delta = dd.e(i, i)
        if delta.is_zero():
            continue
        hit_idx.append(i)
        if delta.is_unit():
            unit_idx.append(i)
        else:
            tors_idx.append(i)
    free_low = [i for i in range(r_low) if i not in hit_idx]
    kern_high = [i for i in range(r_high) if i not in hit_idx]

    pieces = []
    for i in tors_idx:
        pieces.append(("tors", n0, dd.e(i, i)))
    for _ in free_low:
        pieces.append(("free", n0, None))

    # rest complex: degrees >= n0+1 with the kernel coordinates at n0+1
    rest_ranks = {n: r for n, r in cprime.ranks.items() if n > n0 + 1}
    if kern_high:
        rest_ranks[n0 + 1] = len(kern_high)
    rest_diffs = {n: m for n, m in cprime.diffs.items() if n > n0 + 2}
    if cprime.rank(n0 + 2) and kern_high:
        m2 = cprime.d(n0 + 2)
        sub = m2.submatrix(kern_high, range(m2.cols))
        if not sub.is_zero():
            rest_diffs[n0 + 2] = sub
    rest = Complex(spec, rest_ranks, rest_diffs, validate=False)

    # cprime ~ pieces_complex (+) rest: projection drops the unit pairs
    head = _build_pieces_complex(spec, pieces)
    rest_pieces, rest_eq = _normal_form_rec(rest)
    target = direct_sum([head, rest_eq.target]) if pieces or rest_eq.target.ranks \
        else zero_complex(spec)

    # coordinates of head: torsion pieces then free pieces, in listed order
    fwd_comps = {}
    bwd_comps = {}
    for n in set(cprime.ranks) | set(target.ranks):
        rows = target.rank(n)
        cols = cprime.rank(n)
        m = Matrix.zero(spec, rows, cols).to_lists()
        # head part
        hoff = 0
        for idx, (kind, pn, data) in enumerate(pieces):
            if kind == "tors":
                if pn == n:
                    m[hoff][tors_idx[idx]] = spec.one() if idx < len(tors_idx) else spec.one()
                hoff += 0
        # build explicitly instead: see below
        fwd_comps[n] = m
    # explicit construction of the projection/inclusion
    fwd_comps = {}
    bwd_comps = {}
    # head coordinate layout mirrors _build_pieces_complex allocation
    head_coord = {}
    cur = {}
    for idx, (kind, pn, data) in enumerate(pieces):
        head_coord[(idx, "low")] = (pn, cur.get(pn, 0))
        cur[pn] = cur.get(pn, 0) + 1
        if kind == "tors":
            head_coord[(idx, "high")] = (pn + 1, cur.get(pn + 1, 0))
            cur[pn + 1] = cur.get(pn + 1, 0) + 1
    head_rank = {n: head.rank(n) for n in head.ranks}
    # map cprime coordinates to target coordinates
    for n in set(cprime.ranks) | set(target.ranks):
        rows, cols = target.rank(n), cprime.rank(n)
        fm = Matrix.zero(spec, rows, cols).to_lists()
        bm = Matrix.zero(spec, cols, rows).to_lists()
        if n == n0:
            for idx, i in enumerate(tors_idx):
                tn, ti = head_coord[(idx, "low")]
                fm[ti][i] = spec.one()
                bm[i][ti] = spec.one()
            base = len(tors_idx)
            for pos2, i in enumerate(free_low):
                tn, ti = head_coord[(base + pos2, "low")]
                fm[ti][i] = spec.one()
                bm[i][ti] = spec.one()
        elif n == n0 + 1:
            for idx, i in enumerate(tors_idx):
                tn, ti = head_coord[(idx, "high")]
                fm[ti][i] = spec.one()
                bm[i][ti] = spec.one()
            hoff = head_rank.get(n, 0)
            for pos2, i in enumerate(kern_high):
                fm[hoff + pos2][i] = spec.one()
                bm[i][hoff + pos2] = spec.one()
        else:
            hoff = head_rank.get(n, 0)
            for i in range(cprime.rank(n)):
                fm[hoff + i][i] = spec.one()
                bm[i][hoff + i] = spec.one()
        if rows and cols:
            fwd_comps[n] = Matrix(spec, fm, rows=rows, cols=cols)
            bwd_comps[n] = Matrix(spec, bm, rows=cols, cols=rows)
    # contraction homotopy for the unit pairs
    h_comps = {}
    if unit_idx:
        m = Matrix.zero(spec, cprime.rank(n0 + 1), cprime.rank(n0)).to_lists()
        for i in unit_idx:
            m[i][i] = dd.e(i, i).inverse()
        h_comps[n0] = Matrix(spec, m, rows=cprime.rank(n0 + 1), cols=cprime.rank(n0))
    mid = direct_sum([head, rest]) if (pieces or rest.ranks) else zero_complex(spec)
    # target above was head (+) rest_eq.target; build the split to mid first
    fwd_mid = {}
    bwd_mid = {}
    for n in set(cprime.ranks) | set(mid.ranks):
        rows, cols = mid.rank(n), cprime.rank(n)
        fm = Matrix.zero(spec, rows, cols).to_lists()
        bm = Matrix.zero(spec, cols, rows).to_lists()
        if n == n0:
            for idx, i in enumerate(tors_idx):
                tn, ti = head_coord[(idx, "low")]
                fm[ti][i] = spec.one()
                bm[i][ti] = spec.one()
            base = len(tors_idx)
            for pos2, i in enumerate(free_low):
                tn, ti = head_coord[(base + pos2, "low")]
                fm[ti][i] = spec.one()
                bm[i][ti] = spec.one()
        elif n == n0 + 1:
            for idx, i in enumerate(tors_idx):
                tn, ti = head_coord[(idx, "high")]
                fm[ti][i] = spec.one()
                bm[i][ti] = spec.one()
            hoff = head_rank.get(n, 0)
            for pos2, i in enumerate(kern_high):
                fm[hoff + pos2][i] = spec.one()
                bm[i][hoff + pos2] = spec.one()
        else:
            hoff = head_rank.get(n, 0)
            for i in range(cprime.rank(n)):
                fm[hoff + i][i] = spec.one()
                bm[i][hoff + i] = spec.one()
        if rows and cols:
            fwd_mid[n] = Matrix(spec, fm, rows=rows, cols=cols)
            bwd_mid[n] = Matrix(spec, bm, rows=cols, cols=rows)
    fwd2 = ChainMap(cprime, mid, fwd_mid)
    bwd2 = ChainMap(mid, cprime, bwd_mid)
    eq2 = HtpyEquiv(fwd2, bwd2, Homotopy(cprime, cprime, h_comps),
                    Homotopy(mid, mid, {}))
    # mid = head (+) rest ~ head (+) rest_eq.target
    eq3 = HtpyEquiv.direct_sum([HtpyEquiv.identity(head), rest_eq]) \
        if (pieces or rest.ranks) else HtpyEquiv.identity(mid)
    total_eq = eq1.compose(eq2).compose(eq3)
    return pieces + rest_pieces, total_eq


def iso_complexes(x, y):
    """Explicit homotopy equivalence x ~ y when normal forms agree, else None."""
    px, nx, ex = normal_form(x)
    py, ny, ey = normal_form(y)
    if [(k, n, d) for (k, n, d) in px] != [(k, n, d) for (k, n, d) in py]:
        return None
    return ex.compose(ey.inverse())


def descriptors_by_degree(c):
    """Homology descriptors keyed by degree, read off the normal form."""
    pieces, _n, _eq = normal_form(c)
    out = {}
    for kind, n, data in pieces:
        free, factors = out.setdefault(n, [0, []])
        if kind == "free":
            out[n][0] += 1
        else:
            out[n][1].append(data)
    return {n: ModuleDescriptor(c.spec, fr, tuple(fa)) for n, (fr, fa) in out.items()}


# ---------------------------------------------------------------------------
# the splitting construction for a triangle whose third object decomposes
# ---------------------------------------------------------------------------


@dataclass
class DirectSplit:
    """An equivalence c ~ c1 (+) c2 presented with its two pieces."""

    c1: Complex
    c2: Complex
    equiv: HtpyEquiv

    def validate(self, c):
        both = direct_sum([self.c1, self.c2])
        if self.equiv.source != c or self.equiv.target != both:
            raise InvalidSplit("split equivalence has wrong endpoints")
        if not self.equiv.verify():
            raise InvalidSplit("split equivalence fails its homotopy identities")


@dataclass
class FourTriangles:
    d: Complex
    e: Complex
    t_alpha: Triangle
    t_beta: Triangle
    t_gamma: Triangle
    t_delta: Triangle
    alpha0: ChainMap
    beta0: ChainMap
    gamma0: ChainMap
    delta0: ChainMap
    s: ChainMap


def four_triangles(t, split):
    """Split the third object of a triangle through both halves.

    Returns the two new objects d, e and four triangles tying them to the
    original map s = t.f, with s = alpha0 o delta0 = beta0 o gamma0 strictly.
    """
    split.validate(t.c)
    a, b = t.a, t.b
    s = t.f
    spec = a.spec
    cn = cone_complex(s)
    if t.norm is None:
        sigma = split.equiv
    else:
        sigma = t.norm.compose(split.equiv)
    # sigma: cone(s) ~ c1 (+) c2
    c1, c2 = split.c1, split.c2
    pair = [c1, c2]
    p1 = sum_projection(pair, 0) * sigma.fwd
    p2 = sum_projection(pair, 1) * sigma.fwd
    q1 = sigma.bwd * sum_inclusion(pair, 0)
    q2 = sigma.bwd * sum_inclusion(pair, 1)
    g_cone = cone_inclusion(s, cn)
    pr_cone = cone_projection(s, cn)
    alpha = p1 * g_cone
    beta = p2 * g_cone
    gamma = pr_cone * q1
    delta = pr_cone * q2

    # H: a_n -> cone(s)_{n+1} = a_n (+) b_{n+1}, x |-> (x, 0)
    h_comps = {}
    for n in a.degrees():
        m = Matrix.zero(spec, cn.rank(n + 1), a.rank(n)).to_lists()
        for i in range(a.rank(n)):
            m[i][i] = spec.one()
        h_comps[n] = Matrix(spec, m, rows=cn.rank(n + 1), cols=a.rank(n))

    def smear(target_piece, proj):
        # components a_n -> piece_{n+1} of proj o H
        comps = {}
        for n in a.degrees():
            if target_piece.rank(n + 1) == 0:
                continue
            m = proj.comp(n + 1) * Matrix(spec, h_comps[n].to_lists(),
                                          rows=cn.rank(n + 1), cols=a.rank(n))
            comps[n] = m
        return comps

    d_obj = _desuspended_cone(b, c1, alpha)
    e_obj = _desuspended_cone(b, c2, beta)

    def incl_b(dc, piece):
        comps = {}
        for n in b.degrees():
            m = Matrix.zero(spec, dc.rank(n), b.rank(n)).to_lists()
            for i in range(b.rank(n)):
                m[i][i] = spec.one()
            comps[n] = Matrix(spec, m, rows=dc.rank(n), cols=b.rank(n))
        return ChainMap(b, dc, comps, validate=False)

    def make_zero_map(dc, piece, smear_comps):
        comps = {}
        for n in a.degrees():
            rows = dc.rank(n)
            if rows == 0:
                continue
            m = Matrix.zero(spec, rows, a.rank(n)).to_lists()
            sn = s.comp(n)
            for i in range(b.rank(n)):
                for j in range(a.rank(n)):
                    m[i][j] = sn.e(i, j)
            if n in smear_comps:
                sm = smear_comps[n]
                for i in range(piece.rank(n + 1)):
                    for j in range(a.rank(n)):
                        m[b.rank(n) + i][j] = -sm.e(i, j)
            comps[n] = Matrix(spec, m, rows=rows, cols=a.rank(n))
        return ChainMap(a, dc, comps)

    delta0 = make_zero_map(d_obj, c1, smear(c1, p1))
    gamma0 = make_zero_map(e_obj, c2, smear(c2, p2))
    alpha0 = _desuspended_cone_proj(b, c1, alpha, d_obj)
    beta0 = _desuspended_cone_proj(b, c2, beta, e_obj)

    delta1 = beta * alpha0
    gamma1 = alpha * beta0
    alpha2 = shift_map(delta0, 1) * gamma
    beta2 = shift_map(gamma0, 1) * delta

    t_alpha = _normalized_triangle(d_obj, b, c1, alpha0, alpha, alpha2,
                                   _cone_alpha0_to_piece(b, c1, alpha, d_obj))
    t_beta = _normalized_triangle(e_obj, b, c2, beta0, beta, beta2,
                                  _cone_alpha0_to_piece(b, c2, beta, e_obj))
    t_delta = _normalized_triangle(a, d_obj, c2, delta0, delta1, delta,
                                   _cone_delta0_to_piece(a, d_obj, delta0, s, cn, p2))
    t_gamma = _normalized_triangle(a, e_obj, c1, gamma0, gamma1, gamma,
                                   _cone_delta0_to_piece(a, e_obj, gamma0, s, cn, p1))
    return FourTriangles(d_obj, e_obj, t_alpha, t_beta, t_gamma, t_delta,
                         alpha0, beta0, gamma0, delta0, s)


def _desuspended_cone(b, piece, alpha):
    """T^{-1} cone(alpha: b -> piece): degrees n carry b_n (+) piece_{n+1}."""
    spec = b.spec
    ranks = {}
    for n in set(b.ranks) | set(k - 1 for k in piece.ranks):
        r = b.rank(n) + piece.rank(n + 1)
        if r:
            ranks[n] = r
    diffs = {}
    for n in ranks:
        if ranks.get(n - 1, 0) == 0:
            continue
        rows, cols = ranks[n - 1], ranks[n]
        m = Matrix.zero(spec, rows, cols).to_lists()
        db = b.d(n)
        for i in range(b.rank(n - 1)):
            for j in range(b.rank(n)):
                m[i][j] = db.e(i, j)
        an = alpha.comp(n)
        for i in range(piece.rank(n)):
            for j in range(b.rank(n)):
                m[b.rank(n - 1) + i][j] = -an.e(i, j)
        dp = piece.d(n + 1)
        for i in range(piece.rank(n)):
            for j in range(piece.rank(n + 1)):
                m[b.rank(n - 1) + i][b.rank(n) + j] = -dp.e(i, j)
        diffs[n] = Matrix(spec, m, rows=rows, cols=cols)
    return Complex(spec, ranks, diffs)


def _desuspended_cone_proj(b, piece, alpha, d_obj):
    spec = b.spec
    comps = {}
    for n in b.degrees():
        if d_obj.rank(n) == 0:
            continue
        m = Matrix.zero(spec, b.rank(n), d_obj.rank(n)).to_lists()
        for i in range(b.rank(n)):
            m[i][i] = spec.one()
        comps[n] = Matrix(spec, m, rows=b.rank(n), cols=d_obj.rank(n))
    return ChainMap(d_obj, b, comps)


def _cone_alpha0_to_piece(b, piece, alpha, d_obj):
    """Strict equivalence cone(alpha0) -> piece, (xi', eta', xi) -> -eta' + alpha(xi)."""
    spec = b.spec
    alpha0 = _desuspended_cone_proj(b, piece, alpha, d_obj)
    cn = cone_complex(alpha0)
    comps = {}
    for n in piece.degrees():
        cols = cn.rank(n)
        if cols == 0:
            continue
        m = Matrix.zero(spec, piece.rank(n), cols).to_lists()
        # cn_n = d_obj_{n-1} (+) b_n = (b_{n-1} (+) piece_n) (+) b_n
        off_eta = b.rank(n - 1)
        off_xi = d_obj.rank(n - 1)
        for i in range(piece.rank(n)):
            m[i][off_eta + i] = -spec.one()
        an = alpha.comp(n)
        for i in range(piece.rank(n)):
            for j in range(b.rank(n)):
                m[i][off_xi + j] = an.e(i, j)
        comps[n] = Matrix(spec, m, rows=piece.rank(n), cols=cols)
    f = ChainMap(cn, piece, comps)
    eq = homotopy_inverse(f)
    if eq is None:
        raise ArithmeticError("normalizer search failed for a split triangle")
    return eq


def _cone_delta0_to_piece(a, d_obj, delta0, s, cn_s, p_other):
    """Equivalence cone(delta0) -> piece via (x, xi, eta) -> p_other(x, xi)."""
    spec = a.spec
    cn = cone_complex(delta0)
    target = p_other.target
    comps = {}
    for n in target.degrees():
        cols = cn.rank(n)
        if cols == 0:
            continue
        m = Matrix.zero(spec, target.rank(n), cols).to_lists()
        pn = p_other.comp(n)
        # cn_n = a_{n-1} (+) d_obj_n, with d_obj_n = b_n (+) piece1_{n+1};
        # cone(s)_n = a_{n-1} (+) b_n
        for i in range(target.rank(n)):
            for j in range(a.rank(n - 1)):
                m[i][j] = pn.e(i, j)
            for j in range(s.target.rank(n)):
                m[i][a.rank(n - 1) + j] = pn.e(i, a.rank(n - 1) + j)
        comps[n] = Matrix(spec, m, rows=target.rank(n), cols=cols)
    f = ChainMap(cn, target, comps)
    eq = homotopy_inverse(f)
    if eq is None:
        raise ArithmeticError("normalizer search failed for a split triangle")
    return eq


def _normalized_triangle(a, b, c, f, g, h, norm):
    return Triangle(a, b, c, f, g, h, norm)


# ---------------------------------------------------------------------------
# weak pushouts
# ---------------------------------------------------------------------------


@dataclass
class WeakPushout:
    d: Complex
    h: ChainMap
    k: ChainMap
    triangle: Triangle
    square: Homotopy  # h o f - k o g = d H + H d


def weak_pushout(f, g):
    """Homotopy pushout of f: a -> b and g: a -> c along the cone of [f; g]."""
    if f.source != g.source:
        raise DimensionMismatch("weak pushout legs must share their source")
    a = f.source
    spec = a.spec
    bc = direct_sum([f.target, g.target])
    col_comps = {}
    for n in a.degrees():
        if bc.rank(n) == 0:
            continue
        m = Matrix.zero(spec, bc.rank(n), a.rank(n)).to_lists()
        fn, gn = f.comp(n), g.comp(n)
        for i in range(f.target.rank(n)):
            for j in range(a.rank(n)):
                m[i][j] = fn.e(i, j)
        for i in range(g.target.rank(n)):
            for j in range(a.rank(n)):
                m[f.target.rank(n) + i][j] = gn.e(i, j)
        col_comps[n] = Matrix(spec, m, rows=bc.rank(n), cols=a.rank(n))
    col = ChainMap(a, bc, col_comps)
    tri = cone_triangle(col)
    d = tri.c
    incl = tri.g
    h = incl * sum_inclusion([f.target, g.target], 0)
    k = -(incl * sum_inclusion([f.target, g.target], 1))
    sq_comps = {}
    for n in a.degrees():
        if d.rank(n + 1) == 0:
            continue
        m = Matrix.zero(spec, d.rank(n + 1), a.rank(n)).to_lists()
        for i in range(a.rank(n)):
            m[i][i] = spec.one()
        sq_comps[n] = Matrix(spec, m, rows=d.rank(n + 1), cols=a.rank(n))
    square = Homotopy(a, d, sq_comps)
    return WeakPushout(d, h, k, tri, square)
