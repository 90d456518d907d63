"""Truncated polynomial rings, exact linear algebra, and filtrations.

A jet ring holds polynomials in geometric variables (and optionally family
parameters) truncated at a fixed order: monomials of geometric degree > N,
or parameter degree > s, are identically zero.  When the ring carries an
ideal, every jet is stored reduced against the row-echelon span of the
ideal's monomial multiples, so equality of jets is equality of dicts.

The jet space is treated throughout as a finite-dimensional vector space
over the coefficient field, with its monomials enumerated in a fixed
(total degree, then lexicographic) order.  All subspace computations are
plain exact row reduction in that basis; nothing here is approximate.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

from . import expr
from .exactfield import Field, FieldElem, FieldError


class JetError(ValueError):
    pass


def _mon_sort_key(mon):
    return (sum(mon), tuple(-e for e in mon))


def _mon_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _mon_divides(a, b):
    return all(x <= y for x, y in zip(a, b))


class JetRing:
    """Variables, truncation orders, and an optional ideal.

    ``variables`` lists geometric variables first, then any family
    parameters (``tvars``); geometric degree is truncated above ``order``
    and parameter degree above ``torder``.
    """

    def __init__(self, field: Field, variables: Sequence[str], order: int,
                 ideal=(), tvars: Sequence[str] = (), torder: Optional[int] = None,
                 domain=None):
        if order < 1:
            raise JetError("jet order must be at least 1")
        names = list(variables) + list(tvars)
        if len(set(names)) != len(names):
            raise JetError(f"duplicate variable names in {names}")
        for name in names:
            if not name.isidentifier():
                raise JetError(f"bad variable name {name!r}")
        if tvars and torder is None:
            raise JetError("parameter truncation order required with tvars")
        self.field = field
        self.domain = field if domain is None else domain
        self.xvars = tuple(variables)
        self.tvars = tuple(tvars)
        self.variables = tuple(names)
        self.order = order
        self.torder = torder
        self.nx = len(self.xvars)
        self.var_index = {name: i for i, name in enumerate(self.variables)}

        self.unit_mon = tuple(0 for _ in self.variables)
        self.monomials = self._enumerate_monomials()
        self.mon_index = {m: i for i, m in enumerate(self.monomials)}
        self.dim = len(self.monomials)

        self.ideal_gens = ()
        self.ideal_basis = None
        if ideal:
            gens = []
            for g in ideal:
                coeffs = dict(g.coeffs) if isinstance(g, Jet) else dict(g)
                gens.append(self._truncate(coeffs))
            gens = [g for g in gens if g]
            self.ideal_gens = tuple(tuple(sorted(g.items(), key=lambda kv: _mon_sort_key(kv[0]))) for g in gens)
            self.ideal_basis = self._span_ideal(gens)

    def _enumerate_monomials(self):
        mons = [()]
        for _ in self.variables:
            mons = [m + (e,) for m in mons for e in range(self.order + (self.torder or 0) + 1)]
        keep = [m for m in mons if self._in_range(m)]
        keep.sort(key=_mon_sort_key)
        return tuple(keep)

    def _in_range(self, mon) -> bool:
        xdeg = sum(mon[: self.nx])
        tdeg = sum(mon[self.nx:])
        if xdeg > self.order:
            return False
        if self.tvars and tdeg > self.torder:
            return False
        return True

    def _truncate(self, coeffs: dict) -> dict:
        out = {}
        for mon, c in coeffs.items():
            if len(mon) != len(self.variables):
                raise JetError(f"exponent tuple {mon} has wrong length")
            if self._in_range(mon) and not c.is_zero():
                out[mon] = c
        return out

    def _span_ideal(self, gens):
        rows = []
        for g in gens:
            for mon in self.monomials:
                prod = {}
                for gm, c in g.items():
                    m = _mon_mul(gm, mon)
                    if self._in_range(m):
                        prod[m] = prod.get(m, self.field.zero) + c
                vec = [self.field.zero] * self.dim
                nonzero = False
                for m, c in prod.items():
                    if not c.is_zero():
                        vec[self.mon_index[m]] = c
                        nonzero = True
                if nonzero:
                    rows.append(vec)
        reduced, pivots = rref(rows, self.field)
        return SubspaceBasis(VectorContext(self, 1), reduced, pivots)

    def _reduce_mod_ideal(self, coeffs: dict) -> dict:
        if self.ideal_basis is None or not coeffs:
            return coeffs
        out = dict(coeffs)
        for row, pivot in zip(self.ideal_basis.rows, self.ideal_basis.pivots):
            pmon = self.monomials[pivot]
            c = out.get(pmon)
            if c is None or c.is_zero():
                continue
            for j, r in enumerate(row):
                if r.is_zero():
                    continue
                mon = self.monomials[j]
                val = out.get(mon, self._zero_scalar()) - c * self.domain.embed_base(r)
                if val.is_zero():
                    out.pop(mon, None)
                else:
                    out[mon] = val
        return out

    def _zero_scalar(self):
        return self.domain.zero

    # -- jet constructors ---------------------------------------------------

    def jet(self, value) -> "Jet":
        if isinstance(value, Jet):
            if value.ring is self:
                return value
            if value.ring.signature() != self.signature():
                raise JetError("jet from an incompatible ring")
            return Jet(self, value.coeffs)
        if isinstance(value, dict):
            return Jet(self, self._reduce_mod_ideal(self._truncate(value)))
        if isinstance(value, int):
            value = self.domain.from_int(value)
        elif isinstance(value, FieldElem):
            value = self.domain.embed_base(value)
        return Jet(self, self._reduce_mod_ideal(self._truncate({self.unit_mon: value})))

    @property
    def zero(self) -> "Jet":
        return Jet(self, {})

    @property
    def one(self) -> "Jet":
        return self.jet(1)

    def var(self, name: str) -> "Jet":
        if name not in self.var_index:
            raise JetError(f"unknown variable {name!r}")
        mon = tuple(1 if i == self.var_index[name] else 0 for i in range(len(self.variables)))
        return self.jet({mon: self.domain.one})

    def monomial(self, mon, coeff=None) -> "Jet":
        if coeff is None:
            coeff = self.domain.one
        return self.jet({tuple(mon): coeff})

    def from_expr(self, text: str, env: Optional[dict] = None) -> "Jet":
        scope = {name: self.var(name) for name in self.variables}
        for name, val in self.field.generator_env().items():
            if name in scope:
                raise JetError(f"variable {name!r} shadows a field generator")
            scope[name] = self.jet(val)
        if env:
            scope.update(env)
        value = expr.eval_str(text, scope, lambda n: self.jet(n))
        if isinstance(value, FieldElem):
            value = self.jet(value)
        if not isinstance(value, Jet) or value.ring is not self:
            raise JetError(f"not a jet of this ring: {text!r}")
        return value

    # -- bookkeeping --------------------------------------------------------

    def signature(self):
        gens = tuple(
            tuple((mon, c.key()) for mon, c in g) for g in self.ideal_gens
        )
        dom = None if self.domain is self.field else id(self.domain)
        return (self.field, self.variables, self.nx, self.order, self.torder, gens, dom)

    def __eq__(self, other):
        return isinstance(other, JetRing) and other.signature() == self.signature()

    def __hash__(self):
        return hash((self.field, self.variables, self.order, self.torder, len(self.ideal_gens)))

    def mon_str(self, mon) -> str:
        parts = []
        for name, e in zip(self.variables, mon):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return "*".join(parts) if parts else "1"

    def raw(self) -> "JetRing":
        """The same ring without the ideal (for handling generators as data)."""
        if self.ideal_basis is None:
            return self
        if not hasattr(self, "_raw"):
            self._raw = JetRing(self.field, self.xvars, self.order,
                                tvars=self.tvars, torder=self.torder, domain=self.domain)
        return self._raw

    def ideal_gen_jets(self):
        """Ideal generators as jets of the raw ring."""
        raw = self.raw()
        return tuple(Jet(raw, dict(g)) for g in self.ideal_gens)

    def __repr__(self):
        tail = f", t={self.tvars} mod t^{(self.torder or 0) + 1}" if self.tvars else ""
        ide = f", ideal gens {len(self.ideal_gens)}" if self.ideal_gens else ""
        return f"JetRing({self.field}, {self.xvars}, N={self.order}{tail}{ide})"


class Jet:
    """One truncated polynomial, stored as exponent-tuple -> coefficient."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: JetRing, coeffs: dict):
        self.ring = ring
        self.coeffs = coeffs

    def _check(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.ring is self.ring or other.ring == self.ring:
                return other
            raise JetError("jets from different rings")
        if isinstance(other, (int, FieldElem)):
            return self.ring.jet(other)
        return None

    def __add__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        out = dict(self.coeffs)
        for mon, c in other.coeffs.items():
            val = out.get(mon)
            val = c if val is None else val + c
            if val.is_zero():
                out.pop(mon, None)
            else:
                out[mon] = val
        return Jet(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.ring, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, FieldElem)) or type(other).__name__ == "Poly":
            return self.scale(other)
        other = self._check(other)
        if other is None:
            return NotImplemented
        ring = self.ring
        out = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                mon = _mon_mul(m1, m2)
                if not ring._in_range(mon):
                    continue
                val = out.get(mon)
                prod = c1 * c2
                val = prod if val is None else val + prod
                out[mon] = val
        out = {m: c for m, c in out.items() if not c.is_zero()}
        return Jet(ring, ring._reduce_mod_ideal(out))

    __rmul__ = __mul__

    def scale(self, scalar):
        if isinstance(scalar, int):
            scalar = self.ring.domain.from_int(scalar)
        elif isinstance(scalar, FieldElem) and self.ring.domain is not self.ring.field:
            scalar = self.ring.domain.embed_base(scalar)
        if scalar.is_zero():
            return self.ring.zero
        return Jet(self.ring, {m: c * scalar for m, c in self.coeffs.items()})

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise JetError("jet exponents must be non-negative integers")
        result = self.ring.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, Jet) and set(other.coeffs) <= {other.ring.unit_mon}:
            other = other.constant_term()
            if not isinstance(other, FieldElem):
                raise JetError("cannot divide by a non-field constant")
        if isinstance(other, (int, FieldElem)):
            if isinstance(other, int):
                other = self.ring.field.from_int(other)
            return self.scale(other.inverse())
        raise JetError("jets divide only by scalars")

    def __eq__(self, other):
        other = self._check(other)
        if other is None:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.key())

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def constant_term(self):
        return self.coeffs.get(self.ring.unit_mon, self.ring._zero_scalar())

    def support(self):
        return set(self.coeffs)

    def key(self):
        items = sorted(self.coeffs.items(), key=lambda kv: _mon_sort_key(kv[0]))
        return tuple((mon, c.key()) for mon, c in items)

    def degree_bound(self) -> int:
        """Largest total degree present (0 for the zero jet)."""
        return max((sum(m) for m in self.coeffs), default=0)

    def derivative(self, var: str) -> "Jet":
        i = self.ring.var_index[var]
        out = {}
        for mon, c in self.coeffs.items():
            e = mon[i]
            if e == 0:
                continue
            dmon = tuple(x - 1 if j == i else x for j, x in enumerate(mon))
            val = c * self.ring.domain.from_int(e)
            if val.is_zero():
                continue
            out[dmon] = out.get(dmon, self.ring._zero_scalar()) + val
        out = {m: c for m, c in out.items() if not c.is_zero()}
        return Jet(self.ring, self.ring._reduce_mod_ideal(out))

    def substitute(self, args: dict, ring: Optional[JetRing] = None) -> "Jet":
        """Evaluate this jet at ``args`` (variable name -> jet).

        Every variable actually occurring must be assigned a jet with zero
        constant term; all argument jets must share one ring, which becomes
        the ring of the result.
        """
        target = ring
        for name, a in args.items():
            if not isinstance(a, Jet):
                raise JetError(f"argument for {name!r} is not a jet")
            if target is None:
                target = a.ring
            elif a.ring is not target and a.ring != target:
                raise JetError("substitution arguments from different rings")
            if not a.constant_term().is_zero():
                raise JetError(f"argument for {name!r} has a constant term")
        if target is None:
            target = self.ring

        max_exp = {}
        for mon in self.coeffs:
            for i, e in enumerate(mon):
                if e:
                    name = self.ring.variables[i]
                    if name not in args:
                        raise JetError(f"no substitution given for variable {name!r}")
                    max_exp[name] = max(max_exp.get(name, 0), e)

        powers = {}
        for name, top in max_exp.items():
            base = args[name]
            row = [target.one]
            for _ in range(top):
                row.append(row[-1] * base)
            powers[name] = row

        result = target.zero
        for mon, c in self.coeffs.items():
            term = target.jet({target.unit_mon: _embed_coeff(c, self.ring, target)})
            for i, e in enumerate(mon):
                if e:
                    term = term * powers[self.ring.variables[i]][e]
            result = result + term
        return result

    def map_coeffs(self, fn, ring: JetRing) -> "Jet":
        """Transport this jet into ``ring`` by applying ``fn`` to coefficients."""
        out = {}
        for mon, c in self.coeffs.items():
            v = fn(c)
            if not v.is_zero():
                out[mon] = v
        return ring.jet(out)

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for mon in sorted(self.coeffs, key=_mon_sort_key):
            c = self.coeffs[mon]
            cs = str(c)
            ms = self.ring.mon_str(mon)
            if ms == "1":
                parts.append(cs)
            elif cs == "1":
                parts.append(ms)
            elif cs == "-1":
                parts.append(f"-{ms}")
            else:
                if any(op in cs[1:] for op in "+-") or "/" in cs:
                    cs = f"({cs})"
                parts.append(f"{cs}*{ms}")
        return "+".join(parts).replace("+-", "-")

    def __repr__(self):
        return f"<jet {self}>"


def _embed_coeff(c, source: JetRing, target: JetRing):
    if source.domain is target.domain:
        return c
    if isinstance(c, FieldElem):
        if c.field == target.field:
            return target.domain.embed_base(c)
        raise JetError("substitution across different coefficient fields; transport first")
    if source.field == target.field:
        return c
    raise JetError("substitution across different coefficient domains")


# -- exact linear algebra ---------------------------------------------------

def rref(rows: Iterable[Sequence], field: Field):
    """Reduced row echelon form with leading-1 pivots; returns (rows, pivots)."""
    work = [list(r) for r in rows]
    pivots = []
    reduced = []
    ncols = len(work[0]) if work else 0
    col = 0
    while work and col < ncols:
        pivot_row = None
        for r in work:
            if not r[col].is_zero():
                pivot_row = r
                break
        if pivot_row is None:
            col += 1
            continue
        work.remove(pivot_row)
        inv = pivot_row[col].inverse()
        pivot_row = [c * inv for c in pivot_row]
        for r in work:
            c = r[col]
            if not c.is_zero():
                for j in range(col, ncols):
                    if not pivot_row[j].is_zero():
                        r[j] = r[j] - c * pivot_row[j]
        for r in reduced:
            c = r[col]
            if not c.is_zero():
                for j in range(col, ncols):
                    if not pivot_row[j].is_zero():
                        r[j] = r[j] - c * pivot_row[j]
        reduced.append(pivot_row)
        pivots.append(col)
        col += 1
    order = sorted(range(len(pivots)), key=lambda i: pivots[i])
    return [tuple(reduced[i]) for i in order], [pivots[i] for i in order]


def reduce_vec(vec: Sequence, rows, pivots, field: Field):
    """Reduce ``vec`` against RREF rows; returns (residual, coords)."""
    v = list(vec)
    coords = []
    for row, pivot in zip(rows, pivots):
        c = v[pivot]
        coords.append(c)
        if not c.is_zero():
            for j, r in enumerate(row):
                if not r.is_zero():
                    v[j] = v[j] - c * r
    return v, coords

def nullspace(rows: Iterable[Sequence], ncols: int, field: Field):
    """Kernel basis of the linear map given by ``rows`` acting on k^ncols."""
    reduced, pivots = rref(rows, field)
    pivot_set = set(pivots)
    free = [j for j in range(ncols) if j not in pivot_set]
    basis = []
    for f in free:
        vec = [field.zero] * ncols
        vec[f] = field.one
        for row, pivot in zip(reduced, pivots):
            if not row[f].is_zero():
                vec[pivot] = -row[f]
        basis.append(tuple(vec))
    return basis


def solve_columns(cols: Sequence[Sequence], target: Sequence, field: Field):
    """Solve sum_r c_r * cols[r] = target exactly; coefficients or None."""
    n = len(target)
    k = len(cols)
    aug = [[cols[r][i] for r in range(k)] + [target[i]] for i in range(n)]
    reduced, pivots = rref(aug, field)
    coeffs = [field.zero] * k
    for row, pivot in zip(reduced, pivots):
        if pivot == k:
            return None
        # Inconsistent if a pivot row needs a free variable beyond its pivot;
        # with RREF we can read a particular solution off pivot columns.
        coeffs[pivot] = row[k]
    # verify (cheap at this scale, and guards the free-column case)
    for i in range(n):
        acc = field.zero
        for r in range(k):
            if not coeffs[r].is_zero():
                acc = acc + coeffs[r] * cols[r][i]
        if acc != target[i]:
            return None
    return coeffs


class VectorContext:
    """Identifies tuples of jets with dense coefficient vectors."""

    def __init__(self, ring: JetRing, ncomp: int):
        self.ring = ring
        self.ncomp = ncomp
        self.dim = ring.dim * ncomp

    def to_vec(self, jets) -> tuple:
        if isinstance(jets, Jet):
            jets = (jets,)
        if len(jets) != self.ncomp:
            raise JetError(f"expected {self.ncomp} components, got {len(jets)}")
        vec = [self.ring.field.zero] * self.dim
        for c, jet in enumerate(jets):
            base = c * self.ring.dim
            for mon, coeff in jet.coeffs.items():
                vec[base + self.ring.mon_index[mon]] = coeff
        return tuple(vec)

    def to_jets(self, vec) -> tuple:
        out = []
        for c in range(self.ncomp):
            base = c * self.ring.dim
            coeffs = {}
            for i, mon in enumerate(self.ring.monomials):
                v = vec[base + i]
                if not v.is_zero():
                    coeffs[mon] = v
            out.append(Jet(self.ring, coeffs))
        return tuple(out)

    def positions_in(self, monset) -> set:
        """Vector positions whose monomial lies in ``monset``."""
        out = set()
        for c in range(self.ncomp):
            base = c * self.ring.dim
            for i, mon in enumerate(self.ring.monomials):
                if mon in monset:
                    out.add(base + i)
        return out

    def __eq__(self, other):
        return (isinstance(other, VectorContext) and other.ncomp == self.ncomp
                and other.ring == self.ring)


class SubspaceBasis:
    """A subspace of a jet (tuple) space, held in reduced row echelon form."""

    def __init__(self, context: VectorContext, rows, pivots):
        self.context = context
        self.rows = rows
        self.pivots = pivots

    @classmethod
    def span(cls, context: VectorContext, vectors):
        rows, pivots = rref(vectors, context.ring.field)
        return cls(context, rows, pivots)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def membership(self, vec):
        """Coordinates of ``vec`` in this basis, or None if outside."""
        residual, coords = reduce_vec(vec, self.rows, self.pivots, self.context.ring.field)
        if any(not c.is_zero() for c in residual):
            return None
        return coords

    def residual(self, vec):
        res, _ = reduce_vec(vec, self.rows, self.pivots, self.context.ring.field)
        return res

    def contains(self, vec) -> bool:
        return self.membership(vec) is not None

    def contains_subspace(self, other: "SubspaceBasis") -> bool:
        return all(self.contains(row) for row in other.rows)

    def intersect_positions(self, allowed: set) -> "SubspaceBasis":
        """Intersection with the coordinate subspace supported on ``allowed``.

        Reorders columns so the disallowed ones come first; after row
        reduction, the rows with pivots inside ``allowed`` span exactly the
        vectors of the subspace supported there.
        """
        dim = self.context.dim
        outside = [j for j in range(dim) if j not in allowed]
        inside = [j for j in range(dim) if j in allowed]
        perm = outside + inside
        inv = [0] * dim
        for newpos, old in enumerate(perm):
            inv[old] = newpos
        shuffled = [[row[perm[j]] for j in range(dim)] for row in self.rows]
        reduced, pivots = rref(shuffled, self.context.ring.field)
        keep = []
        for row, pivot in zip(reduced, pivots):
            if pivot >= len(outside):
                keep.append(tuple(row[inv[j]] for j in range(dim)))
        rows, pivots = rref(keep, self.context.ring.field)
        return SubspaceBasis(self.context, rows, pivots)

    def basis_jets(self):
        return [self.context.to_jets(row) for row in self.rows]

    def __eq__(self, other):
        return (isinstance(other, SubspaceBasis) and other.context == self.context
                and other.rows == self.rows)

    def __repr__(self):
        return f"<subspace rank {self.rank} in dim {self.context.dim}>"


def ideal_span(gens, ring: JetRing, ncomp: int = 1) -> SubspaceBasis:
    """Span of all monomial multiples of ``gens`` inside the jet space."""
    if ncomp != 1:
        raise JetError("ideal_span works on scalar jets")
    context = VectorContext(ring, 1)
    rows = []
    for g in gens:
        g = ring.jet(g) if not isinstance(g, Jet) else g
        for mon in ring.monomials:
            prod = g * ring.monomial(mon)
            if not prod.is_zero():
                rows.append(context.to_vec(prod))
    reduced, pivots = rref(rows, ring.field)
    return SubspaceBasis(context, reduced, pivots)


def membership(v, basis: SubspaceBasis):
    if isinstance(v, (Jet, tuple, list)) and not isinstance(v, (str,)):
        if isinstance(v, Jet) or (v and isinstance(v[0], Jet)):
            v = basis.context.to_vec(v)
    return basis.membership(v)


# -- filtrations ------------------------------------------------------------

INFINITY = math.inf


class Filtration:
    """A descending chain of monomial submodules with product extension.

    The chain is given explicitly up to depth D; deeper terms are generated
    by the rule that the d-th term is the sum of products of earlier terms.
    Each term is recorded simply as the set of ring monomials it contains.
    """

    def __init__(self, ring: JetRing, kind: str, chain):
        self.ring = ring
        self.kind = kind
        self.chain = [frozenset(s) for s in chain]  # index 0 -> level 1
        if not self.chain:
            raise JetError("filtration chain must be non-empty")
        unit = tuple(0 for _ in ring.variables)
        if unit in self.chain[0]:
            raise JetError("filtration is not local: level 1 contains the unit monomial")
        for a, b in zip(self.chain, self.chain[1:]):
            if not b <= a:
                raise JetError("filtration chain is not descending")
        self._check_multiplicative()
        self._sets = {d + 1: s for d, s in enumerate(self.chain)}
        self._orders = None

    @property
    def depth(self) -> int:
        return len(self.chain)

    def _check_multiplicative(self):
        D = len(self.chain)
        for a in range(1, D + 1):
            for b in range(a, D + 1 - a):
                target = self.chain[a + b - 1]
                for m1 in self.chain[a - 1]:
                    for m2 in self.chain[b - 1]:
                        prod = _mon_mul(m1, m2)
                        if self.ring._in_range(prod) and prod not in target:
                            raise JetError(
                                f"filtration not multiplicative: "
                                f"{self.ring.mon_str(m1)} * {self.ring.mon_str(m2)} "
                                f"escapes level {a + b}"
                            )

    def level_set(self, d: int) -> frozenset:
        """Monomials of the level-d term (all ring monomials for d <= 0)."""
        if d <= 0:
            return frozenset(self.ring.monomials)
        cached = self._sets.get(d)
        if cached is not None:
            return cached
        acc = set()
        for a in range(1, d // 2 + 1):
            sa = self.level_set(a)
            sb = self.level_set(d - a)
            for m1 in sa:
                for m2 in sb:
                    prod = _mon_mul(m1, m2)
                    if self.ring._in_range(prod):
                        acc.add(prod)
        result = frozenset(acc)
        self._sets[d] = result
        return result

    def vanishing_depth(self) -> int:
        """The least d with an empty level-d term."""
        cap = self.depth * (self.ring.order + (self.ring.torder or 0) + 1) + 1
        for d in range(1, cap + 1):
            if not self.level_set(d):
                return d
        raise JetError("filtration does not vanish within the truncation range")

    def mon_order(self, mon) -> float:
        if self._orders is None:
            orders = {m: 0 for m in self.ring.monomials}
            for d in range(1, self.vanishing_depth()):
                for m in self.level_set(d):
                    orders[m] = d
            self._orders = orders
        return self._orders[mon]

    def order_of(self, value) -> float:
        """Filtration order of a jet or a tuple of jets (inf for zero)."""
        jets = value if isinstance(value, (tuple, list)) else (value,)
        best = INFINITY
        for jet in jets:
            for mon in jet.coeffs:
                o = self.mon_order(mon)
                if o < best:
                    best = o
        return best

    def product_set(self, e: int, d: int) -> frozenset:
        """Monomials reachable as products of e members of the level-d term."""
        if not hasattr(self, "_products"):
            self._products = {}
        key = (e, d)
        if key in self._products:
            return self._products[key]
        if e <= 1:
            result = self.level_set(d)
        else:
            prev = self.product_set(e - 1, d)
            base = self.level_set(d)
            acc = set()
            for m1 in prev:
                for m2 in base:
                    prod = _mon_mul(m1, m2)
                    if self.ring._in_range(prod):
                        acc.add(prod)
            result = frozenset(acc)
        self._products[key] = result
        return result

    def with_ring(self, ring: JetRing) -> "Filtration":
        """The same monomial chain, attached to a compatible ring."""
        if ring.variables != self.ring.variables:
            raise JetError("filtration transfer: variable mismatch")
        return Filtration(ring, self.kind, self.chain)

    def describe(self):
        return {
            "kind": self.kind,
            "chain": [sorted(self.ring.mon_str(m) for m in s) for s in self.chain],
        }

    def __repr__(self):
        return f"<{self.kind} filtration, depth {self.depth}>"


def _monomial_ideal(ring: JetRing, gens) -> frozenset:
    gens = [tuple(g) for g in gens]
    return frozenset(
        m for m in ring.monomials if any(_mon_divides(g, m) for g in gens)
    )


def filtration_make(ring: JetRing, spec) -> Filtration:
    """Build a filtration: ``"madic"``, ``"tadic"``, or an explicit chain.

    An explicit chain is a list of monomial-generator lists (each generator a
    monomial jet, exponent tuple, or expression string); the generated chain
    must descend and be multiplicative, and is extended multiplicatively
    beyond its explicit depth.
    """
    if spec == "madic":
        gens = [tuple(1 if j == i else 0 for j in range(len(ring.variables)))
                for i in range(len(ring.variables))]
        return Filtration(ring, "madic", [_monomial_ideal(ring, gens)])
    if spec == "tadic":
        if not ring.tvars:
            raise JetError("tadic filtration needs family parameters")
        gens = [tuple(1 if j == ring.nx + i else 0 for j in range(len(ring.variables)))
                for i in range(len(ring.tvars))]
        return Filtration(ring, "tadic", [_monomial_ideal(ring, gens)])
    chain = []
    for level in spec:
        gens = []
        for g in level:
            if isinstance(g, str):
                jet = ring.raw().from_expr(g)
                if len(jet.coeffs) != 1:
                    raise JetError(f"filtration generator {g!r} is not a monomial")
                gens.append(next(iter(jet.coeffs)))
            elif isinstance(g, Jet):
                if len(g.coeffs) != 1:
                    raise JetError("filtration generator is not a monomial")
                gens.append(next(iter(g.coeffs)))
            else:
                gens.append(tuple(g))
        chain.append(_monomial_ideal(ring, gens))
    return Filtration(ring, "chain", chain)


def order_of(value, filt: Filtration) -> float:
    return filt.order_of(value)


# -- serialization ----------------------------------------------------------

def jet_to_json(jet: Jet) -> dict:
    out = {}
    for mon in sorted(jet.coeffs, key=_mon_sort_key):
        out[jet.ring.mon_str(mon)] = str(jet.coeffs[mon])
    return out


def jet_from_json(ring: JetRing, data: dict) -> Jet:
    total = ring.zero
    for mon_text, coeff_text in data.items():
        coeff = ring.field.parse(coeff_text)
        mon_jet = ring.raw().from_expr(mon_text)
        if len(mon_jet.coeffs) != 1:
            raise JetError(f"not a monomial: {mon_text!r}")
        mon, lead = next(iter(mon_jet.coeffs.items()))
        if lead != ring.field.one:
            raise JetError(f"monomial key must be monic: {mon_text!r}")
        total = total + ring.jet({mon: ring.domain.embed_base(coeff)})
    return total
