"""Map-germs between jet-ring presentations and their equivalence groups.

A map-germ is a tuple of source-ring jets, one per geometric target
variable, with no constant term, carrying every target ideal generator to
zero in the source ring.  Group elements store the substitution data that
their action applies directly:

* right elements store a coordinate-change tuple Phi and act by f -> f(Phi);
* left elements store a target tuple Psi and act by f -> Psi(f);
* linear contact elements store an invertible matrix M over the source
  ring (with an optional right part Phi) and act by f -> M * f(Phi);
* full contact elements store a tuple C over the joint source-target ring
  (zero on the target axis, invertible target-linear part) and act by
  f -> C(x, f(Phi)).

Composition and inversion are arranged so that acting is a left action:
(g . h).act(f) equals g.act(h.act(f)).  Inverses of substitution tuples
and of matrices are found by Newton iteration, which terminates at jet
level because each step strictly increases the error's order.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .exactfield import Field, FieldElem
from .jets import (
    Jet, JetRing, VectorContext, Filtration, rref, jet_to_json,
)


class GermError(ValueError):
    pass


def _reindex(jet: Jet, ring: JetRing) -> Jet:
    """Transport a jet to a ring with a different variable list, by name."""
    src = jet.ring
    out = {}
    for mon, c in jet.coeffs.items():
        new = [0] * len(ring.variables)
        for i, e in enumerate(mon):
            if e == 0:
                continue
            name = src.variables[i]
            if name not in ring.var_index:
                raise GermError(f"variable {name!r} missing from the target ring")
            new[ring.var_index[name]] = e
        out[tuple(new)] = c
    return ring.jet(out)


def _identity_args(ring: JetRing, mapping: dict) -> dict:
    """Substitution arguments: ``mapping`` plus identity on family parameters."""
    args = dict(mapping)
    for t in ring.tvars:
        args.setdefault(t, ring.var(t))
    return args


def product_ring(source: JetRing, target: JetRing) -> JetRing:
    """The joint ring in source and target variables, carrying both ideals."""
    if source.field != target.field:
        raise GermError("source and target must share a coefficient field")
    if source.order != target.order or source.tvars != target.tvars or source.torder != target.torder:
        raise GermError("source and target must share truncation orders")
    clash = set(source.xvars) & set(target.xvars)
    if clash:
        raise GermError(f"source and target share variable names {sorted(clash)}")
    xvars = source.xvars + target.xvars
    bare = JetRing(source.field, xvars, source.order,
                   tvars=source.tvars, torder=source.torder)
    gens = []
    for g in source.ideal_gen_jets() + target.ideal_gen_jets():
        gens.append(_reindex(g, bare).coeffs)
    return JetRing(source.field, xvars, source.order, ideal=gens,
                   tvars=source.tvars, torder=source.torder)


class MapGerm:
    """A jet of a map between germs, one source-ring component per target variable."""

    def __init__(self, source: JetRing, target: JetRing,
                 components: Sequence[Jet], validate: bool = True):
        comps = [source.jet(c) for c in components]
        if len(comps) != target.nx:
            raise GermError(f"expected {target.nx} components, got {len(comps)}")
        self.source = source
        self.target = target
        self.components = tuple(comps)
        if validate:
            self._validate()

    def _validate(self):
        for name, c in zip(self.target.xvars, self.components):
            if not c.constant_term().is_zero():
                raise GermError(f"component for {name!r} has a constant term")
        for q in self.target.ideal_gen_jets():
            image = self.pullback(q)
            if not image.is_zero():
                raise GermError(
                    f"components do not respect the target ideal: "
                    f"{q} pulls back to {image}"
                )

    def pullback(self, q: Jet) -> Jet:
        """Substitute the components into a jet in the target variables."""
        mapping = dict(zip(self.target.xvars, self.components))
        return q.substitute(_identity_args(self.source, mapping), ring=self.source)

    def order(self, filt: Filtration) -> float:
        return filt.order_of(self.components)

    def context(self) -> VectorContext:
        return VectorContext(self.source, self.target.nx)

    def to_vec(self):
        return self.context().to_vec(self.components)

    def __eq__(self, other):
        if not isinstance(other, MapGerm):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.components == other.components)

    def key(self):
        return tuple(c.key() for c in self.components)

    def __hash__(self):
        return hash(self.key())

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"

    def __repr__(self):
        return f"<map germ {self}>"

    def describe(self) -> dict:
        return {
            "components": [jet_to_json(c) for c in self.components],
            "source": list(self.source.xvars),
            "target": list(self.target.xvars),
        }


# -- Newton inversions ------------------------------------------------------

def _linear_matrix(comps: Sequence[Jet], ring: JetRing):
    """Coefficients of the plain geometric variables, parameter-free part."""
    rows = []
    for c in comps:
        row = []
        for j in range(ring.nx):
            mon = tuple(1 if i == j else 0 for i in range(len(ring.variables)))
            row.append(c.coeffs.get(mon, ring.field.zero))
        rows.append(row)
    return rows


def _field_matrix_inverse(rows, field: Field):
    n = len(rows)
    aug = [list(r) + [field.one if i == j else field.zero for j in range(n)]
           for i, r in enumerate(rows)]
    reduced, pivots = rref(aug, field)
    if len(reduced) < n or pivots != list(range(n)):
        return None
    return [list(r[n:]) for r in reduced]


def invert_tuple(comps: Sequence[Jet], ring: JetRing, names: Sequence[str]):
    """Tuple Psi with comps(Psi) = identity, by Newton steps on the error."""
    A = _linear_matrix(comps, ring)
    field = ring.field
    lin_entries = [[c if isinstance(c, FieldElem) else field.zero for c in row] for row in A]
    Ainv = _field_matrix_inverse(lin_entries, field)
    if Ainv is None:
        raise GermError("substitution tuple has a singular linear part")
    xs = [ring.var(n) for n in names]
    psi = [sum((x.scale(Ainv[i][j]) for j, x in enumerate(xs)), ring.zero)
           for i in range(len(names))]
    for _ in range(ring.order + (ring.torder or 0) + 2):
        mapping = dict(zip(names, psi))
        err = [c.substitute(_identity_args(ring, mapping), ring=ring) - x
               for c, x in zip(comps, xs)]
        if all(e.is_zero() for e in err):
            return psi
        psi = [p - sum((e.scale(Ainv[i][j]) for j, e in enumerate(err)), ring.zero)
               for i, p in enumerate(psi)]
    raise GermError("tuple inversion did not terminate")  # pragma: no cover


def matrix_mul(A, B, ring: JetRing):
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = ring.zero
            for l in range(k):
                acc = acc + A[i][l] * B[l][j]
            row.append(acc)
        out.append(row)
    return out


def matrix_apply(M, vec, ring: JetRing):
    out = []
    for row in M:
        acc = ring.zero
        for entry, v in zip(row, vec):
            acc = acc + entry * v
        out.append(acc)
    return out


def invert_matrix_jets(M, ring: JetRing):
    """Inverse of a jet matrix with invertible constant part, by Newton steps."""
    n = len(M)
    const = [[entry.constant_term() for entry in row] for row in M]
    if ring.domain is not ring.field:
        raise GermError("matrix inversion needs field coefficients")
    Cinv = _field_matrix_inverse(const, ring.field)
    if Cinv is None:
        raise GermError("matrix has a singular constant part")
    X = [[ring.jet(Cinv[i][j]) for j in range(n)] for i in range(n)]
    ident = [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]
    for _ in range(ring.order + (ring.torder or 0) + 2):
        MX = matrix_mul(M, X, ring)
        err = [[ident[i][j] - MX[i][j] for j in range(n)] for i in range(n)]
        if all(e.is_zero() for row in err for e in row):
            return X
        X = [[X[i][j] + entry for j, entry in enumerate(row)]
             for i, row in enumerate(matrix_mul(X, err, ring))]
    raise GermError("matrix inversion did not terminate")  # pragma: no cover


# -- group elements ---------------------------------------------------------

class GroupElement:
    tag = "?"

    def act(self, f: MapGerm) -> MapGerm:
        raise NotImplementedError

    def compose(self, other: "GroupElement") -> "GroupElement":
        """The element acting as self after other: (self . other).act = self.act(other.act(.))."""
        raise NotImplementedError

    def inverse(self) -> "GroupElement":
        raise NotImplementedError

    def is_identity(self) -> bool:
        raise NotImplementedError

    def key(self):
        raise NotImplementedError

    def factors(self):
        """Single-variant constituents, innermost action last."""
        return [self]

    def __eq__(self, other):
        return (isinstance(other, GroupElement) and other.tag == self.tag
                and other.key() == self.key())

    def __hash__(self):
        return hash((self.tag, self.key()))


class RightAut(GroupElement):
    """Source coordinate change; acts by substitution into the map."""

    tag = "R"

    def __init__(self, ring: JetRing, comps: Sequence[Jet], validate: bool = True):
        self.ring = ring
        self.comps = tuple(ring.jet(c) for c in comps)
        if len(self.comps) != ring.nx:
            raise GermError(f"expected {ring.nx} components, got {len(self.comps)}")
        if validate:
            self._validate()

    def _validate(self):
        for name, c in zip(self.ring.xvars, self.comps):
            if not c.constant_term().is_zero():
                raise GermError(f"component for {name!r} has a constant term")
        lin = _linear_matrix(self.comps, self.ring)
        if _field_matrix_inverse(lin, self.ring.field) is None:
            raise GermError("coordinate change has a singular linear part")
        mapping = dict(zip(self.ring.xvars, self.comps))
        args = _identity_args(self.ring, mapping)
        for g in self.ring.ideal_gen_jets():
            image = g.substitute(args, ring=self.ring)
            if not image.is_zero():
                raise GermError(f"coordinate change does not preserve the ideal: moves {g}")

    @classmethod
    def identity(cls, ring: JetRing) -> "RightAut":
        return cls(ring, [ring.var(n) for n in ring.xvars], validate=False)

    def substitute_into(self, jet: Jet) -> Jet:
        mapping = dict(zip(self.ring.xvars, self.comps))
        return jet.substitute(_identity_args(self.ring, mapping), ring=self.ring)

    def act(self, f: MapGerm) -> MapGerm:
        if f.source != self.ring:
            raise GermError("map and coordinate change live on different sources")
        return MapGerm(f.source, f.target,
                       [self.substitute_into(c) for c in f.components], validate=False)

    def compose(self, other: "RightAut") -> "RightAut":
        if not isinstance(other, RightAut):
            raise GermError(f"cannot compose R with {other.tag}")
        # (self . other).act(f) = self.act(other.act(f)) = f(other.comps(self.comps))
        return RightAut(self.ring, [self.substitute_into(c) for c in other.comps],
                        validate=False)

    def inverse(self) -> "RightAut":
        return RightAut(self.ring, invert_tuple(self.comps, self.ring, self.ring.xvars),
                        validate=False)

    def is_identity(self) -> bool:
        return all(c == self.ring.var(n) for n, c in zip(self.ring.xvars, self.comps))

    def key(self):
        return tuple(c.key() for c in self.comps)

    def describe(self):
        return {"group": "R", "source": [jet_to_json(c) for c in self.comps]}

    def __repr__(self):
        return f"<R {tuple(str(c) for c in self.comps)}>"


class LeftAut(GroupElement):
    """Target coordinate change; acts by substitution of the map into it."""

    tag = "L"

    def __init__(self, ring: JetRing, comps: Sequence[Jet], validate: bool = True):
        self.ring = ring
        self.comps = tuple(ring.jet(c) for c in comps)
        if len(self.comps) != ring.nx:
            raise GermError(f"expected {ring.nx} components, got {len(self.comps)}")
        if validate:
            self._inner = RightAut(ring, comps)  # same conditions, target side
        else:
            self._inner = RightAut(ring, self.comps, validate=False)

    @classmethod
    def identity(cls, ring: JetRing) -> "LeftAut":
        return cls(ring, [ring.var(n) for n in ring.xvars], validate=False)

    def act(self, f: MapGerm) -> MapGerm:
        if f.target != self.ring:
            raise GermError("map and target change live on different targets")
        mapping = dict(zip(self.ring.xvars, f.components))
        comps = [c.substitute(_identity_args(f.source, mapping), ring=f.source)
                 for c in self.comps]
        return MapGerm(f.source, f.target, comps, validate=False)

    def compose(self, other: "LeftAut") -> "LeftAut":
        if not isinstance(other, LeftAut):
            raise GermError(f"cannot compose L with {other.tag}")
        # (self . other).act(f) = self.comps(other.comps(f)), so the composed
        # components substitute other into self; the mirrored RightAut
        # composition has its arguments swapped for exactly this reason
        return LeftAut(self.ring, other._inner.compose(self._inner).comps, validate=False)

    def inverse(self) -> "LeftAut":
        return LeftAut(self.ring, self._inner.inverse().comps, validate=False)

    def is_identity(self) -> bool:
        return self._inner.is_identity()

    def key(self):
        return tuple(c.key() for c in self.comps)

    def describe(self):
        return {"group": "L", "target": [jet_to_json(c) for c in self.comps]}

    def __repr__(self):
        return f"<L {tuple(str(c) for c in self.comps)}>"


class LRPair(GroupElement):
    """Independent target and source changes, applied around the map."""

    tag = "LR"

    def __init__(self, left: LeftAut, right: RightAut):
        self.left = left
        self.right = right

    def act(self, f: MapGerm) -> MapGerm:
        return self.left.act(self.right.act(f))

    def compose(self, other: "LRPair") -> "LRPair":
        if not isinstance(other, LRPair):
            raise GermError(f"cannot compose LR with {other.tag}")
        return LRPair(self.left.compose(other.left), self.right.compose(other.right))

    def inverse(self) -> "LRPair":
        return LRPair(self.left.inverse(), self.right.inverse())

    def is_identity(self) -> bool:
        return self.left.is_identity() and self.right.is_identity()

    def key(self):
        return (self.left.key(), self.right.key())

    def factors(self):
        return [self.left, self.right]

    def describe(self):
        return {"group": "LR",
                "target": self.left.describe()["target"],
                "source": self.right.describe()["source"]}

    def __repr__(self):
        return f"<LR {self.left!r} {self.right!r}>"


class ContactLinPair(GroupElement):
    """Invertible matrix over the source ring with a source change.

    Defined for maps into a smooth target: the matrix mixes components, so
    a target ideal would not be respected.
    """

    tag = "Klin"

    def __init__(self, source: JetRing, target: JetRing, matrix,
                 right: Optional[RightAut] = None, validate: bool = True):
        self.source = source
        self.target = target
        self.matrix = tuple(tuple(source.jet(e) for e in row) for row in matrix)
        self.right = right if right is not None else RightAut.identity(source)
        if validate:
            self._validate()

    def _validate(self):
        if self.target.ideal_gens:
            raise GermError("matrix contact equivalence needs a smooth target")
        m = self.target.nx
        if len(self.matrix) != m or any(len(row) != m for row in self.matrix):
            raise GermError(f"matrix must be {m} by {m}")
        const = [[e.constant_term() for e in row] for row in self.matrix]
        if _field_matrix_inverse(const, self.source.field) is None:
            raise GermError("matrix is singular at the base point")

    @classmethod
    def identity(cls, source: JetRing, target: JetRing) -> "ContactLinPair":
        m = target.nx
        mat = [[source.one if i == j else source.zero for j in range(m)] for i in range(m)]
        return cls(source, target, mat, validate=False)

    def act(self, f: MapGerm) -> MapGerm:
        moved = self.right.act(f)
        comps = matrix_apply(self.matrix, moved.components, self.source)
        return MapGerm(f.source, f.target, comps, validate=False)

    def compose(self, other: "ContactLinPair") -> "ContactLinPair":
        if not isinstance(other, ContactLinPair):
            raise GermError(f"cannot compose Klin with {other.tag}")
        # self.act(other.act(f)) = M1 . (M2 . f(Phi2))(Phi1) = (M1 (M2 o Phi1)) . f(Phi2 o Phi1)
        moved = [[self.right.substitute_into(e) for e in row] for row in other.matrix]
        return ContactLinPair(self.source, self.target,
                              matrix_mul(self.matrix, moved, self.source),
                              self.right.compose(other.right), validate=False)

    def inverse(self) -> "ContactLinPair":
        rinv = self.right.inverse()
        moved = [[RightAut(self.source, rinv.comps, validate=False).substitute_into(e)
                  for e in row] for row in self.matrix]
        return ContactLinPair(self.source, self.target,
                              invert_matrix_jets(moved, self.source), rinv, validate=False)

    def is_identity(self) -> bool:
        if not self.right.is_identity():
            return False
        for i, row in enumerate(self.matrix):
            for j, e in enumerate(row):
                if e != (self.source.one if i == j else self.source.zero):
                    return False
        return True

    def key(self):
        return (tuple(tuple(e.key() for e in row) for row in self.matrix), self.right.key())

    def describe(self):
        return {"group": "Klin",
                "matrix": [[jet_to_json(e) for e in row] for row in self.matrix],
                "source": self.right.describe()["source"]}

    def __repr__(self):
        return f"<Klin {len(self.matrix)}x{len(self.matrix)} {self.right!r}>"


class Contact(GroupElement):
    """A fiberwise target change over the source, as a joint-ring tuple.

    The stored components vanish on the zero section, have an invertible
    target-linear part at the base point, and carry each target ideal
    generator into the span of its own multiples, so that substitution of
    any valid map produces a valid map.
    """

    tag = "C"

    def __init__(self, source: JetRing, target: JetRing, comps: Sequence[Jet],
                 joint: Optional[JetRing] = None, validate: bool = True):
        self.source = source
        self.target = target
        self.joint = joint if joint is not None else product_ring(source, target)
        self.comps = tuple(self.joint.jet(c) for c in comps)
        if len(self.comps) != target.nx:
            raise GermError(f"expected {target.nx} components, got {len(self.comps)}")
        if validate:
            self._validate()

    def _validate(self):
        nsrc = self.source.nx
        for name, c in zip(self.target.xvars, self.comps):
            for mon in c.coeffs:
                if all(e == 0 for e in mon[nsrc: nsrc + self.target.nx]):
                    raise GermError(
                        f"component for {name!r} does not vanish on the zero section")
        if _field_matrix_inverse(self._target_linear(), self.source.field) is None:
            raise GermError("target-linear part is singular at the base point")
        for q in self.target.ideal_gen_jets():
            image = self._pull_generator(q)
            if not image.is_zero():
                raise GermError(f"components carry {q} outside the ideal span")

    def _target_linear(self):
        nsrc = self.source.nx
        rows = []
        for c in self.comps:
            row = []
            for j in range(self.target.nx):
                mon = tuple(1 if i == nsrc + j else 0 for i in range(len(self.joint.variables)))
                row.append(c.coeffs.get(mon, self.joint.field.zero))
            rows.append(row)
        return rows

    def _pull_generator(self, q: Jet) -> Jet:
        mapping = dict(zip(self.target.xvars, self.comps))
        for n in self.source.xvars:
            mapping[n] = self.joint.var(n)
        return _reindex(q, self.joint.raw()).substitute(
            _identity_args(self.joint, mapping), ring=self.joint)

    @classmethod
    def identity(cls, source: JetRing, target: JetRing,
                 joint: Optional[JetRing] = None) -> "Contact":
        joint = joint if joint is not None else product_ring(source, target)
        return cls(source, target, [joint.var(n) for n in target.xvars],
                   joint=joint, validate=False)

    def substitute_map(self, comps: Sequence[Jet], ring: JetRing):
        """Components of the stored tuple at (x, comps)."""
        mapping = dict(zip(self.target.xvars, comps))
        for n in self.source.xvars:
            mapping[n] = ring.var(n)
        args = _identity_args(ring, mapping)
        return [c.substitute(args, ring=ring) for c in self.comps]

    def act(self, f: MapGerm) -> MapGerm:
        if f.source != self.source or f.target != self.target:
            raise GermError("map and contact change disagree on rings")
        return MapGerm(f.source, f.target,
                       self.substitute_map(f.components, f.source), validate=False)

    def compose(self, other: "Contact") -> "Contact":
        if not isinstance(other, Contact):
            raise GermError(f"cannot compose C with {other.tag}")
        mapping = dict(zip(self.target.xvars, other.comps))
        for n in self.source.xvars:
            mapping[n] = self.joint.var(n)
        args = _identity_args(self.joint, mapping)
        return Contact(self.source, self.target,
                       [c.substitute(args, ring=self.joint) for c in self.comps],
                       joint=self.joint, validate=False)

    def fiber_inverse(self) -> "Contact":
        """The tuple D with D(x, self(x, y)) = y, by Newton steps in y."""
        B = self._target_linear()
        Binv = _field_matrix_inverse(B, self.joint.field)
        ys = [self.joint.var(n) for n in self.target.xvars]
        D = [sum((y.scale(Binv[i][j]) for j, y in enumerate(ys)), self.joint.zero)
             for i in range(self.target.nx)]
        for _ in range(self.joint.order + (self.joint.torder or 0) + 2):
            inner = Contact(self.source, self.target, D, joint=self.joint, validate=False)
            err = [c - y for c, y in zip(self.compose(inner).comps, ys)]
            if all(e.is_zero() for e in err):
                return inner
            D = [d - sum((e.scale(Binv[i][j]) for j, e in enumerate(err)), self.joint.zero)
                 for i, d in enumerate(D)]
        raise GermError("fiber inversion did not terminate")  # pragma: no cover

    inverse = fiber_inverse

    def is_identity(self) -> bool:
        return all(c == self.joint.var(n) for n, c in zip(self.target.xvars, self.comps))

    def key(self):
        return tuple(c.key() for c in self.comps)

    def describe(self):
        return {"group": "C", "contact": [jet_to_json(c) for c in self.comps]}

    def __repr__(self):
        return f"<C {tuple(str(c) for c in self.comps)}>"


class ContactPair(GroupElement):
    """A fiberwise target change together with a source change."""

    tag = "K"

    def __init__(self, contact: Contact, right: RightAut):
        self.contact = contact
        self.right = right

    def act(self, f: MapGerm) -> MapGerm:
        return self.contact.act(self.right.act(f))

    def compose(self, other: "ContactPair") -> "ContactPair":
        if not isinstance(other, ContactPair):
            raise GermError(f"cannot compose K with {other.tag}")
        # self.act(other.act(f)) = C1(x, C2(., f o Phi2 o .) o Phi1)
        #                        = C'(x, f o Phi2 o Phi1) with C' = C1(x, C2(Phi1(x), y))
        joint = self.contact.joint
        mapping = {n: self.right.comps[i] for i, n in enumerate(self.contact.source.xvars)}
        mapping = {n: _reindex(c, joint) for n, c in mapping.items()}
        for n in self.contact.target.xvars:
            mapping[n] = joint.var(n)
        args = _identity_args(joint, mapping)
        moved = [c.substitute(args, ring=joint) for c in other.contact.comps]
        inner = Contact(self.contact.source, self.contact.target, moved,
                        joint=joint, validate=False)
        return ContactPair(self.contact.compose(inner), self.right.compose(other.right))

    def inverse(self) -> "ContactPair":
        rinv = self.right.inverse()
        joint = self.contact.joint
        D = self.contact.fiber_inverse()
        mapping = {n: _reindex(c, joint) for n, c in
                   zip(self.contact.source.xvars, rinv.comps)}
        for n in self.contact.target.xvars:
            mapping[n] = joint.var(n)
        args = _identity_args(joint, mapping)
        moved = [c.substitute(args, ring=joint) for c in D.comps]
        return ContactPair(
            Contact(self.contact.source, self.contact.target, moved,
                    joint=joint, validate=False),
            rinv)

    def is_identity(self) -> bool:
        return self.contact.is_identity() and self.right.is_identity()

    def key(self):
        return (self.contact.key(), self.right.key())

    def factors(self):
        return [self.contact, self.right]

    def describe(self):
        return {"group": "K",
                "contact": self.contact.describe()["contact"],
                "source": self.right.describe()["source"]}

    def __repr__(self):
        return f"<K {self.contact!r} {self.right!r}>"


GROUP_TAGS = ("R", "L", "LR", "C", "K", "Klin")


def identity_element(tag: str, source: JetRing, target: JetRing) -> GroupElement:
    if tag == "R":
        return RightAut.identity(source)
    if tag == "L":
        return LeftAut.identity(target)
    if tag == "LR":
        return LRPair(LeftAut.identity(target), RightAut.identity(source))
    if tag == "C":
        return Contact.identity(source, target)
    if tag == "K":
        return ContactPair(Contact.identity(source, target), RightAut.identity(source))
    if tag == "Klin":
        return ContactLinPair.identity(source, target)
    raise GermError(f"unknown group {tag!r}")


# -- group levels -----------------------------------------------------------

def _level_of_action(element: GroupElement, source: JetRing, target: JetRing,
                     filt: Filtration, vectors) -> float:
    cap = source.order + (source.torder or 0)
    level = cap
    for comps in vectors:
        f = MapGerm(source, target, comps, validate=False)
        moved = element.act(f)
        diff = [a - b for a, b in zip(moved.components, f.components)]
        if all(d.is_zero() for d in diff):
            continue
        jv = filt.order_of(diff) - filt.order_of(f.components)
        if jv < level:
            level = jv
        if level < 0:
            return -1
    return level


def _single_monomial_vectors(source: JetRing, target: JetRing):
    m = target.nx
    zero = source.zero
    for mon in source.monomials:
        if sum(mon) == 0:
            continue
        jet = source.jet({mon: source.domain.one})
        if jet.is_zero():
            continue
        for slot in range(m):
            yield tuple(jet if i == slot else zero for i in range(m))


def _tuple_vectors(source: JetRing, target: JetRing):
    m = target.nx
    choices = [source.zero]
    for mon in source.monomials:
        if sum(mon) == 0:
            continue
        jet = source.jet({mon: source.domain.one})
        if not jet.is_zero():
            choices.append(jet)

    def check(comps) -> bool:
        if all(c.is_zero() for c in comps):
            return False
        if not target.ideal_gens:
            return True
        try:
            MapGerm(source, target, comps, validate=True)
        except GermError:
            return False
        return True

    stack = [()]
    for _ in range(m):
        stack = [s + (c,) for s in stack for c in choices]
    for comps in stack:
        if check(comps):
            yield comps


def group_level(element: GroupElement, source: JetRing, target: JetRing,
                filt: Filtration) -> float:
    """The largest j with ord(g.v - v) >= ord(v) + j over test maps v.

    Linear-acting variants are probed on single monomial components; the
    others on all monomial tuples, so that cross terms between components
    are seen.  Returns -1 when the element fails even the level-0 bound,
    which can happen for non-standard filtrations.
    """
    if element.tag in ("R", "Klin"):
        vectors = _single_monomial_vectors(source, target)
    else:
        vectors = _tuple_vectors(source, target)
    return _level_of_action(element, source, target, filt, vectors)


# -- change of coefficient field --------------------------------------------

def extend_ring(ring: JetRing, ext) -> JetRing:
    """The same presentation with coefficients in the larger field."""
    gens = []
    for g in ring.ideal_gen_jets():
        gens.append({mon: ext.embed(c) for mon, c in g.coeffs.items()})
    return JetRing(ext.top, ring.xvars, ring.order, ideal=gens,
                   tvars=ring.tvars, torder=ring.torder)


def extend_jet(jet: Jet, ext, ring_top: JetRing) -> Jet:
    return ring_top.jet({mon: ext.embed(c) for mon, c in jet.coeffs.items()})


def restrict_jet(jet: Jet, ext, ring_base: JetRing) -> Optional[Jet]:
    out = {}
    for mon, c in jet.coeffs.items():
        down = ext.descend(c)
        if down is None:
            return None
        out[mon] = down
    return ring_base.jet(out)


def extend_map(f: MapGerm, ext, source_top: JetRing, target_top: JetRing) -> MapGerm:
    return MapGerm(source_top, target_top,
                   [extend_jet(c, ext, source_top) for c in f.components],
                   validate=False)


def restrict_map(f: MapGerm, ext, source_base: JetRing,
                 target_base: JetRing) -> Optional[MapGerm]:
    comps = []
    for c in f.components:
        down = restrict_jet(c, ext, source_base)
        if down is None:
            return None
        comps.append(down)
    return MapGerm(source_base, target_base, comps, validate=False)


def extend_element(element: GroupElement, ext, source_top: JetRing,
                   target_top: JetRing) -> GroupElement:
    if isinstance(element, RightAut):
        return RightAut(source_top,
                        [extend_jet(c, ext, source_top) for c in element.comps],
                        validate=False)
    if isinstance(element, LeftAut):
        return LeftAut(target_top,
                       [extend_jet(c, ext, target_top) for c in element.comps],
                       validate=False)
    if isinstance(element, LRPair):
        return LRPair(extend_element(element.left, ext, source_top, target_top),
                      extend_element(element.right, ext, source_top, target_top))
    if isinstance(element, ContactLinPair):
        matrix = [[extend_jet(e, ext, source_top) for e in row] for row in element.matrix]
        right = extend_element(element.right, ext, source_top, target_top)
        return ContactLinPair(source_top, target_top, matrix, right, validate=False)
    if isinstance(element, Contact):
        joint_top = product_ring(source_top, target_top)
        return Contact(source_top, target_top,
                       [extend_jet(c, ext, joint_top) for c in element.comps],
                       joint=joint_top, validate=False)
    if isinstance(element, ContactPair):
        return ContactPair(extend_element(element.contact, ext, source_top, target_top),
                           extend_element(element.right, ext, source_top, target_top))
    raise GermError(f"cannot extend {element.tag}")


def restrict_element(element: GroupElement, ext, source_base: JetRing,
                     target_base: JetRing) -> Optional[GroupElement]:
    if isinstance(element, RightAut):
        comps = [restrict_jet(c, ext, source_base) for c in element.comps]
        if any(c is None for c in comps):
            return None
        return RightAut(source_base, comps, validate=False)
    if isinstance(element, LeftAut):
        comps = [restrict_jet(c, ext, target_base) for c in element.comps]
        if any(c is None for c in comps):
            return None
        return LeftAut(target_base, comps, validate=False)
    if isinstance(element, LRPair):
        left = restrict_element(element.left, ext, source_base, target_base)
        right = restrict_element(element.right, ext, source_base, target_base)
        if left is None or right is None:
            return None
        return LRPair(left, right)
    if isinstance(element, ContactLinPair):
        rows = []
        for row in element.matrix:
            down = [restrict_jet(e, ext, source_base) for e in row]
            if any(e is None for e in down):
                return None
            rows.append(down)
        right = restrict_element(element.right, ext, source_base, target_base)
        if right is None:
            return None
        return ContactLinPair(source_base, target_base, rows, right, validate=False)
    if isinstance(element, Contact):
        joint_base = product_ring(source_base, target_base)
        comps = [restrict_jet(c, ext, joint_base) for c in element.comps]
        if any(c is None for c in comps):
            return None
        return Contact(source_base, target_base, comps, joint=joint_base, validate=False)
    if isinstance(element, ContactPair):
        contact = restrict_element(element.contact, ext, source_base, target_base)
        right = restrict_element(element.right, ext, source_base, target_base)
        if contact is None or right is None:
            return None
        return ContactPair(contact, right)
    raise GermError(f"cannot restrict {element.tag}")
