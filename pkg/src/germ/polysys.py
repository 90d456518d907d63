"""Equivalence of jets as a polynomial system in unknown coefficients.

Whether two jets are carried into each other by a group element is, after
expanding the element's data in unknown Taylor coefficients, a finite
polynomial system over the coefficient field: matching equations from the
group relation, preservation equations for the ideals involved, and a
product trick for the needed invertibilities.  Inconsistency of the
system over the algebraic closure is decided by a basic Groebner run;
solvability over a finite field by exhaustive search.  Solutions
assemble back into verified group elements.

The same enumeration machinery splits the extension-field orbit of a jet
into its finitely many base-field orbits.
"""

from __future__ import annotations

import itertools
import os
from typing import Optional, Sequence

from .exactfield import (
    Field, FieldElem, Rationals, PrimeField, ExtensionField, Extension,
)
from . import expr
from .jets import Jet, JetRing, Filtration, filtration_make
from .germs import (
    MapGerm, RightAut, LeftAut, LRPair, ContactLinPair, Contact, ContactPair,
    GermError, product_ring, extend_ring, extend_map, restrict_map,
    _single_monomial_vectors, _tuple_vectors,
)


class PolyError(ValueError):
    pass


def _drl_key(mon):
    # degree first, then reverse-lexicographic on negated exponents
    return (sum(mon), tuple(-e for e in reversed(mon)))


class PolyRing:
    """Polynomials in named unknowns; also usable as a jet scalar domain."""

    def __init__(self, field: Field, names: Sequence[str]):
        self.field = field
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise PolyError("duplicate unknown names")
        self.index = {n: i for i, n in enumerate(self.names)}
        self.n = len(self.names)
        self.unit_mon = tuple(0 for _ in self.names)

    def poly(self, coeffs: dict) -> "Poly":
        out = {}
        for mon, c in coeffs.items():
            mon = tuple(mon)
            if len(mon) != self.n:
                raise PolyError(f"exponent tuple {mon} has wrong length")
            if not c.is_zero():
                out[mon] = c
        return Poly(self, out)

    @property
    def zero(self) -> "Poly":
        return Poly(self, {})

    @property
    def one(self) -> "Poly":
        return Poly(self, {self.unit_mon: self.field.one})

    def from_int(self, n: int) -> "Poly":
        return self.poly({self.unit_mon: self.field.from_int(n)})

    def embed_base(self, c: FieldElem) -> "Poly":
        if not isinstance(c, FieldElem) or c.field != self.field:
            raise PolyError(f"scalar of {getattr(c, 'field', type(c))} used over {self.field}")
        return self.poly({self.unit_mon: c})

    def var(self, name: str) -> "Poly":
        if name not in self.index:
            raise PolyError(f"unknown name {name!r}")
        mon = [0] * self.n
        mon[self.index[name]] = 1
        return Poly(self, {tuple(mon): self.field.one})

    def from_expr(self, text: str) -> "Poly":
        """Parse a polynomial; field generators are allowed as constants."""
        env = {n: self.var(n) for n in self.names}
        for gname, gval in self.field.generator_env().items():
            if gname not in env:
                env[gname] = self.embed_base(gval)
        value = expr.eval_str(text, env, self.from_int)
        if isinstance(value, FieldElem):
            value = self.embed_base(value)
        if not isinstance(value, Poly) or value.ring != self:
            raise PolyError(f"not a polynomial over these unknowns: {text!r}")
        return value

    def mon_str(self, mon) -> str:
        parts = []
        for name, e in zip(self.names, mon):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return "*".join(parts) if parts else "1"

    def __eq__(self, other):
        return (isinstance(other, PolyRing) and other.field == self.field
                and other.names == self.names)

    def __repr__(self):
        return f"PolyRing({self.field}, {list(self.names)})"


class Poly:
    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: PolyRing, coeffs: dict):
        self.ring = ring
        self.coeffs = coeffs

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(mon == self.ring.unit_mon for mon in self.coeffs)

    def constant_term(self) -> FieldElem:
        return self.coeffs.get(self.ring.unit_mon, self.ring.field.zero)

    def total_degree(self) -> int:
        return max((sum(m) for m in self.coeffs), default=0)

    def leading_monomial(self):
        if not self.coeffs:
            raise PolyError("the zero polynomial has no leading term")
        return max(self.coeffs, key=_drl_key)

    def names_used(self):
        out = set()
        for mon in self.coeffs:
            for name, e in zip(self.ring.names, mon):
                if e:
                    out.add(name)
        return out

    def _binop(self, other, sign: int) -> "Poly":
        if isinstance(other, int):
            other = self.ring.from_int(other)
        if other.ring != self.ring:
            raise PolyError("polynomials over different unknown registries")
        out = dict(self.coeffs)
        for mon, c in other.coeffs.items():
            val = out.get(mon, self.ring.field.zero)
            val = val + c if sign > 0 else val - c
            if val.is_zero():
                out.pop(mon, None)
            else:
                out[mon] = val
        return Poly(self.ring, out)

    def __add__(self, other):
        return self._binop(other, 1)

    def __sub__(self, other):
        return self._binop(other, -1)

    def __neg__(self):
        return Poly(self.ring, {m: -c for m, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        if isinstance(other, FieldElem):
            other = self.ring.embed_base(other)
        if other.ring != self.ring:
            raise PolyError("polynomials over different unknown registries")
        out = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                mon = tuple(a + b for a, b in zip(m1, m2))
                val = out.get(mon, self.ring.field.zero) + c1 * c2
                if val.is_zero():
                    out.pop(mon, None)
                else:
                    out[mon] = val
        return Poly(self.ring, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        if isinstance(other, FieldElem):
            other = self.ring.embed_base(other)
        if not isinstance(other, Poly) or not other.is_constant() or other.is_zero():
            raise PolyError("can only divide by a non-zero constant")
        return self.scale(other.constant_term().inverse())

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise PolyError("exponents must be non-negative integers")
        out = self.ring.one
        for _ in range(e):
            out = out * self
        return out

    def scale(self, c: FieldElem) -> "Poly":
        if c.is_zero():
            return self.ring.zero
        return Poly(self.ring, {m: v * c for m, v in self.coeffs.items()})

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        return isinstance(other, Poly) and other.ring == self.ring and other.coeffs == self.coeffs

    def key(self):
        return tuple(sorted((m, c.key()) for m, c in self.coeffs.items()))

    def evaluate(self, env: dict) -> FieldElem:
        """Value at a point; ``env`` maps every used name to a field element."""
        field = self.ring.field
        total = field.zero
        for mon, c in self.coeffs.items():
            term = c
            for name, e in zip(self.ring.names, mon):
                if e == 0:
                    continue
                if name not in env:
                    raise PolyError(f"no value for unknown {name!r}")
                v = env[name]
                for _ in range(e):
                    term = term * v
            total = total + term
        return total

    def map_coeffs(self, fn, ring: PolyRing) -> "Poly":
        return ring.poly({m: fn(c) for m, c in self.coeffs.items()})

    def __str__(self):
        if not self.coeffs:
            return "0"
        items = sorted(self.coeffs.items(), key=lambda kv: _drl_key(kv[0]), reverse=True)
        parts = []
        for mon, c in items:
            ms = self.ring.mon_str(mon)
            cs = str(c)
            compound = "+" in cs or "/" in cs or "*" in cs or "-" in cs[1:]
            if ms == "1":
                parts.append(f"({cs})" if compound else cs)
            elif cs == "1":
                parts.append(ms)
            elif cs == "-1":
                parts.append(f"-{ms}")
            else:
                parts.append(f"({cs})*{ms}" if compound else f"{cs}*{ms}")
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    def __repr__(self):
        return f"<poly {self}>"


# -- the compiled system -----------------------------------------------------

class PolySystem:
    """Equations over named unknowns, with per-equation provenance tags."""

    def __init__(self, ring: PolyRing, equations: Sequence[Poly], tags: Sequence[dict],
                 provenance: Optional[dict] = None, layout: Optional[dict] = None):
        self.ring = ring
        self.field = ring.field
        self.equations = tuple(equations)
        self.tags = tuple(tags)
        if len(self.tags) != len(self.equations):
            raise PolyError("one provenance tag per equation")
        self.provenance = dict(provenance or {})
        self.layout = layout
        declared = set(ring.names)
        for eq in self.equations:
            stray = eq.names_used() - declared
            if stray:
                raise PolyError(f"equation uses undeclared unknowns {sorted(stray)}")

    @property
    def unknowns(self):
        return self.ring.names

    def occurring(self):
        out = set()
        for eq in self.equations:
            out |= eq.names_used()
        return tuple(n for n in self.ring.names if n in out)

    def describe(self) -> dict:
        prov = dict(self.provenance)
        prov["equations"] = [dict(t) for t in self.tags]
        return {
            "unknowns": list(self.ring.names),
            "equations": [str(eq) for eq in self.equations],
            "provenance": prov,
        }

    def __repr__(self):
        return f"<system: {len(self.equations)} equations in {len(self.ring.names)} unknowns>"


def system_from_json(data: dict, field: Field) -> PolySystem:
    ring = PolyRing(field, data["unknowns"])
    equations = [ring.from_expr(text) for text in data["equations"]]
    prov = dict(data.get("provenance", {}))
    tags = prov.pop("equations", None) or [{} for _ in equations]
    return PolySystem(ring, equations, tags, provenance=prov)


# -- compilation -------------------------------------------------------------

_FACTORS = {
    "R": ("right",),
    "L": ("left",),
    "LR": ("left", "right"),
    "Klin": ("mat", "right"),
    "C": ("contact",),
    "K": ("contact", "right"),
}


def _domain_twin(ring: JetRing, dom: PolyRing) -> JetRing:
    gens = [dict(g.coeffs) for g in ring.ideal_gen_jets()]
    return JetRing(ring.field, ring.xvars, ring.order, ideal=gens,
                   tvars=ring.tvars, torder=ring.torder, domain=dom)


def _embed_jet(jet: Jet, ring: JetRing) -> Jet:
    return ring.jet({m: ring.domain.embed_base(c) for m, c in jet.coeffs.items()})


def _det(entries, ring: PolyRing) -> Poly:
    n = len(entries)
    total = ring.zero
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for l in range(i + 1, n):
                if perm[i] > perm[l]:
                    sign = -sign
        term = ring.one if sign > 0 else -ring.one
        for i in range(n):
            term = term * entries[i][perm[i]]
        total = total + term
    return total


def compile_system(tag: str, f: MapGerm, f_tilde: MapGerm, level: int = 0,
                   filt: Optional[Filtration] = None) -> PolySystem:
    """The polynomial system whose solutions are group data carrying f to
    f_tilde, in the fixed convention: the target-side part applied to f
    equals f_tilde composed with the source substitution.

    With ``level`` > 0, congruence equations confine the element to the
    level subgroup of the filtration (madic by default).
    """
    if tag not in _FACTORS:
        raise PolyError(f"unknown group {tag!r}")
    if f.source != f_tilde.source or f.target != f_tilde.target:
        raise PolyError("the two maps must share source and target")
    source, target = f.source, f.target
    field = source.field
    if tag == "Klin" and target.ideal_gens:
        raise PolyError("matrix contact equivalence needs a smooth target")
    if level > 0 and filt is None:
        filt = filtration_make(source, "madic")

    parts = _FACTORS[tag]
    names = []
    factors = {}
    joint_k = product_ring(source, target) if "contact" in parts else None

    def fresh(prefix, cnt):
        cnt[0] += 1
        name = f"{prefix}{cnt[0]}"
        names.append(name)
        return name

    if "right" in parts:
        cnt = [0]
        factors["right"] = [(fresh("a", cnt), i, mon)
                            for i in range(source.nx)
                            for mon in source.monomials if sum(mon) > 0]
    if "left" in parts:
        cnt = [0]
        factors["left"] = [(fresh("b", cnt), i, mon)
                           for i in range(target.nx)
                           for mon in target.monomials if sum(mon) > 0]
    if "mat" in parts:
        cnt = [0]
        factors["mat"] = [(fresh("c", cnt), (i, l), mon)
                          for i in range(target.nx)
                          for l in range(target.nx)
                          for mon in source.monomials]
    if "contact" in parts:
        cnt = [0]
        nsrc = source.nx
        factors["contact"] = [(fresh("c", cnt), slot, mon)
                              for slot in range(target.nx)
                              for mon in joint_k.monomials
                              if sum(mon[nsrc: nsrc + target.nx]) > 0]

    aux_names = {}
    for part in parts:
        if len(parts) == 1:
            aux_names[part] = "z"
        else:
            aux_names[part] = "zx" if part == "right" else "zy"
    names.extend(aux_names[p] for p in parts)

    PR = PolyRing(field, names)
    S_source = _domain_twin(source, PR)
    S_target = _domain_twin(target, PR) if "left" in parts else None
    S_joint = _domain_twin(joint_k, PR) if joint_k is not None else None

    # the unknown group data as jets with polynomial coefficients
    data = {}
    if "right" in parts:
        comps = [dict() for _ in range(source.nx)]
        for name, i, mon in factors["right"]:
            comps[i][mon] = PR.var(name)
        data["right"] = tuple(S_source.jet(c) for c in comps)
    if "left" in parts:
        comps = [dict() for _ in range(target.nx)]
        for name, i, mon in factors["left"]:
            comps[i][mon] = PR.var(name)
        data["left"] = tuple(S_target.jet(c) for c in comps)
    if "mat" in parts:
        m = target.nx
        rows = [[dict() for _ in range(m)] for _ in range(m)]
        for name, (i, l), mon in factors["mat"]:
            rows[i][l][mon] = PR.var(name)
        data["mat"] = tuple(tuple(S_source.jet(e) for e in row) for row in rows)
    if "contact" in parts:
        comps = [dict() for _ in range(target.nx)]
        for name, slot, mon in factors["contact"]:
            comps[slot][mon] = PR.var(name)
        data["contact"] = tuple(S_joint.jet(c) for c in comps)

    equations = []
    tags = []
    seen = set()

    def push(poly: Poly, tag_info: dict):
        if poly.is_zero():
            return
        if poly.key() in seen or (-poly).key() in seen:
            return
        seen.add(poly.key())
        equations.append(poly)
        tags.append(tag_info)

    def push_jet(jet: Jet, condition: str, where: dict, order_below=None, filt_for=None):
        for mon in sorted(jet.coeffs, key=lambda m: jet.ring.mon_index[m]):
            if order_below is not None and filt_for.mon_order(mon) >= order_below:
                continue
            info = {"condition": condition, "coefficient": jet.ring.mon_str(mon)}
            info.update(where)
            push(jet.coeffs[mon], info)

    def right_args():
        args = {name: data["right"][i] for i, name in enumerate(source.xvars)}
        for t in source.tvars:
            args[t] = S_source.var(t)
        return args

    def apply_left(base):
        # unknown target change evaluated on a component tuple over the source
        largs = {name: base[i] for i, name in enumerate(target.xvars)}
        for t in target.tvars:
            largs[t] = S_source.var(t)
        return [c.substitute(largs, ring=S_source) for c in data["left"]]

    def apply_contact(base):
        cargs = {name: S_source.var(name) for name in source.xvars}
        for i, name in enumerate(target.xvars):
            cargs[name] = base[i]
        for t in source.tvars:
            cargs[t] = S_source.var(t)
        return [c.substitute(cargs, ring=S_source) for c in data["contact"]]

    def apply_mat(base):
        m = target.nx
        out = []
        for i in range(m):
            acc = S_source.zero
            for l in range(m):
                acc = acc + data["mat"][i][l] * base[l]
            out.append(acc)
        return out

    f_S = [_embed_jet(c, S_source) for c in f.components]
    ft_S = [_embed_jet(c, S_source) for c in f_tilde.components]

    # right-hand side: the second map with the source substitution applied
    rhs = ([c.substitute(right_args(), ring=S_source) for c in ft_S]
           if "right" in parts else ft_S)

    # left-hand side: the target-side factor applied to the first map
    if tag == "R":
        lhs = f_S
    elif tag in ("L", "LR"):
        lhs = apply_left(f_S)
    elif tag == "Klin":
        lhs = apply_mat(f_S)
    else:
        lhs = apply_contact(f_S)

    for i, (a, b) in enumerate(zip(lhs, rhs)):
        push_jet(b - a, "match", {"component": i})

    # the source change must respect the source ideal, and likewise on the
    # target side; images are reduced in the quotient, so their canonical
    # coefficients are the conditions
    if "right" in parts and source.ideal_gens:
        rargs = right_args()
        for gi, g in enumerate(source.ideal_gen_jets()):
            image = _embed_jet(g, S_source.raw()).substitute(rargs, ring=S_source)
            push_jet(image, "source-ideal", {"generator": gi})
    if "left" in parts and target.ideal_gens:
        largs = {name: data["left"][i] for i, name in enumerate(target.xvars)}
        for t in target.tvars:
            largs[t] = S_target.var(t)
        for gi, g in enumerate(target.ideal_gen_jets()):
            image = _embed_jet(g, S_target.raw()).substitute(largs, ring=S_target)
            push_jet(image, "target-ideal", {"generator": gi})
    if "contact" in parts and target.ideal_gens:
        jargs = {name: S_joint.var(name) for name in source.xvars}
        for i, name in enumerate(target.xvars):
            jargs[name] = data["contact"][i]
        for t in joint_k.tvars:
            jargs[t] = S_joint.var(t)
        for gi, g in enumerate(target.ideal_gen_jets()):
            lifted = {}
            for mon, c in g.coeffs.items():
                new = [0] * len(joint_k.variables)
                for pos, e in enumerate(mon):
                    new[joint_k.var_index[target.variables[pos]]] = e
                lifted[tuple(new)] = PR.embed_base(c)
            image = S_joint.raw().jet(lifted).substitute(jargs, ring=S_joint)
            push_jet(image, "target-ideal", {"generator": gi})

    # invertibility of each factor, by a product unknown against the
    # relevant determinant at the base point
    def unit_vector_mon(total, pos):
        return tuple(1 if p == pos else 0 for p in range(total))

    for part in parts:
        if part == "right":
            lin = [[data["right"][i].coeffs.get(
                        unit_vector_mon(len(source.variables), l), PR.zero)
                    for l in range(source.nx)] for i in range(source.nx)]
        elif part == "left":
            lin = [[data["left"][i].coeffs.get(
                        unit_vector_mon(len(target.variables), l), PR.zero)
                    for l in range(target.nx)] for i in range(target.nx)]
        elif part == "mat":
            lin = [[data["mat"][i][l].coeffs.get(source.unit_mon, PR.zero)
                    for l in range(target.nx)] for i in range(target.nx)]
        else:
            lin = [[data["contact"][i].coeffs.get(
                        unit_vector_mon(len(joint_k.variables), source.nx + l), PR.zero)
                    for l in range(target.nx)] for i in range(target.nx)]
        push(_det(lin, PR) * PR.var(aux_names[part]) - PR.one,
             {"condition": "invertibility", "factor": part})

    # confinement to the level subgroup: acting on every test map must
    # raise its filtration order by at least the level
    if level > 0:
        linear_action = tag in ("R", "Klin")
        vectors = (_single_monomial_vectors(source, target) if linear_action
                   else _tuple_vectors(source, target))
        for v in vectors:
            d = filt.order_of(v)
            if d == float("inf"):
                continue
            v_S = [_embed_jet(c, S_source) for c in v]
            base = ([c.substitute(right_args(), ring=S_source) for c in v_S]
                    if "right" in parts else v_S)
            if tag == "R":
                moved = base
            elif tag == "Klin":
                moved = apply_mat(base)
            elif tag in ("L", "LR"):
                moved = apply_left(base)
            else:
                moved = apply_contact(base)
            for i, (mv, orig) in enumerate(zip(moved, v_S)):
                push_jet(mv - orig, "level",
                         {"component": i, "test_order": int(d)},
                         order_below=d + level, filt_for=filt)

    factor_ring = {"right": source, "left": target, "mat": source, "contact": joint_k}
    provenance = {
        "group": tag,
        "level": level,
        "convention": "target-side part applied to the first map equals the "
                      "second map composed with the source substitution",
        "f": [str(c) for c in f.components],
        "f_tilde": [str(c) for c in f_tilde.components],
        "unknown_factors": {
            part: [[name, list(pos) if isinstance(pos, tuple) else pos,
                    factor_ring[part].mon_str(mon)]
                   for name, pos, mon in factors[part]]
            for part in parts
        },
        "aux": {part: aux_names[part] for part in parts},
    }
    layout = {
        "tag": tag,
        "f": f,
        "f_tilde": f_tilde,
        "factors": factors,
        "aux": aux_names,
        "source": source,
        "target": target,
        "joint": joint_k,
    }
    return PolySystem(PR, equations, tags, provenance=provenance, layout=layout)


def extend_system(system: PolySystem, ext: Extension) -> PolySystem:
    """The same system with coefficients embedded into the extension field."""
    if system.field != ext.base:
        raise PolyError("extension must start at the system's field")
    PR = PolyRing(ext.top, system.ring.names)
    eqs = [eq.map_coeffs(ext.embed, PR) for eq in system.equations]
    prov = dict(system.provenance)
    prov["extended_to"] = str(ext.top)
    layout = None
    if system.layout is not None:
        lay = system.layout
        source_K = extend_ring(lay["source"], ext)
        target_K = extend_ring(lay["target"], ext)
        layout = {
            "tag": lay["tag"],
            "f": extend_map(lay["f"], ext, source_K, target_K),
            "f_tilde": extend_map(lay["f_tilde"], ext, source_K, target_K),
            "factors": lay["factors"],
            "aux": lay["aux"],
            "source": source_K,
            "target": target_K,
            "joint": product_ring(source_K, target_K) if lay["joint"] is not None else None,
        }
    return PolySystem(PR, eqs, system.tags, provenance=prov, layout=layout)


def assemble_witness(system: PolySystem, solution: dict):
    """Build the group element a solution encodes and verify its action.

    Returns (element, report); the element satisfies act(element, f) =
    f_tilde exactly when the report says ok.
    """
    if system.layout is None:
        raise PolyError("this system was not compiled in-process; nothing to assemble")
    lay = system.layout
    tag = lay["tag"]
    f, ft = lay["f"], lay["f_tilde"]
    source, target = lay["source"], lay["target"]
    field = system.field

    def value(name):
        v = solution.get(name, field.zero)
        if not isinstance(v, FieldElem) or v.field != field:
            raise PolyError(f"solution value for {name!r} is not in {field}")
        return v

    built = {}
    factors = lay["factors"]
    if "right" in factors:
        comps = [dict() for _ in range(source.nx)]
        for name, i, mon in factors["right"]:
            comps[i][mon] = value(name)
        built["right"] = RightAut(source, [source.jet(c) for c in comps])
    if "left" in factors:
        comps = [dict() for _ in range(target.nx)]
        for name, i, mon in factors["left"]:
            comps[i][mon] = value(name)
        built["left"] = LeftAut(target, [target.jet(c) for c in comps])
    if "mat" in factors:
        m = target.nx
        rows = [[dict() for _ in range(m)] for _ in range(m)]
        for name, (i, l), mon in factors["mat"]:
            rows[i][l][mon] = value(name)
        built["mat"] = [[source.jet(e) for e in row] for row in rows]
    if "contact" in factors:
        joint = lay["joint"]
        comps = [dict() for _ in range(target.nx)]
        for name, slot, mon in factors["contact"]:
            comps[slot][mon] = value(name)
        built["contact"] = [joint.jet(c) for c in comps]

    if tag == "R":
        witness = built["right"].inverse()
    elif tag == "L":
        witness = built["left"]
    elif tag == "LR":
        A = LRPair(built["left"], RightAut.identity(source))
        B = LRPair(LeftAut.identity(target), built["right"])
        witness = B.inverse().compose(A)
    elif tag == "Klin":
        A = ContactLinPair(source, target, built["mat"])
        B = ContactLinPair(source, target,
                           ContactLinPair.identity(source, target).matrix,
                           built["right"], validate=False)
        witness = B.inverse().compose(A)
    elif tag == "C":
        witness = Contact(source, target, built["contact"], joint=lay["joint"])
    else:
        A = ContactPair(Contact(source, target, built["contact"], joint=lay["joint"]),
                        RightAut.identity(source))
        B = ContactPair(Contact.identity(source, target, joint=lay["joint"]),
                        built["right"])
        witness = B.inverse().compose(A)

    moved = witness.act(f)
    diff = [a - b for a, b in zip(moved.components, ft.components)]
    ok = all(d.is_zero() for d in diff)
    report = {"ok": ok}
    if not ok:
        report["difference"] = [str(d) for d in diff]
    return witness, report


# -- exhaustive search -------------------------------------------------------

def brute_solve(system: PolySystem, field: Optional[Field] = None,
                domain: Optional[Sequence[FieldElem]] = None,
                cap: int = 10 ** 8, limit: Optional[int] = None):
    """All solutions over a finite field by exhaustive enumeration.

    Only unknowns that occur in some equation are searched; the rest are
    reported as zero.  ``field`` may be a finite extension of the
    system's field (coefficients are embedded); ``domain`` restricts the
    searched values to a subset of the field, e.g. a subfield's image.
    """
    sys_here = system
    if field is not None and field != system.field:
        if not isinstance(field, ExtensionField) or field.base != system.field:
            raise PolyError(f"{field} does not extend {system.field}")
        sys_here = extend_system(system, Extension(system.field, field))
    field = sys_here.field
    if not field.is_finite():
        raise PolyError("exhaustive search needs a finite field")
    values = list(domain) if domain is not None else list(field.elements())
    for v in values:
        if not isinstance(v, FieldElem) or v.field != field:
            raise PolyError("domain values must lie in the search field")
    values.sort(key=lambda e: e.key())
    active = sys_here.occurring()
    total = len(values) ** len(active)
    if total > cap:
        raise PolyError(f"search space of size {total} exceeds the cap {cap}")
    free = [n for n in sys_here.ring.names if n not in active]
    solutions = []
    for point in itertools.product(values, repeat=len(active)):
        env = dict(zip(active, point))
        if all(eq.evaluate(env).is_zero() for eq in sys_here.equations):
            full = dict(env)
            for n in free:
                full[n] = field.zero
            solutions.append(full)
            if limit is not None and len(solutions) >= limit:
                break
    return solutions


# -- Groebner bases ----------------------------------------------------------

def _mon_divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _mon_div(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _mon_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _mon_poly(ring: PolyRing, mon, c=None) -> Poly:
    return Poly(ring, {tuple(mon): c if c is not None else ring.field.one})


class GroebnerReport:
    """Outcome of the inconsistency test: True, False, or None when capped."""

    def __init__(self, inconsistent, certificate, pairs: int, basis_size: int):
        self.inconsistent = inconsistent
        self.certificate = certificate
        self.pairs = pairs
        self.basis_size = basis_size

    @property
    def undecided(self) -> bool:
        return self.inconsistent is None

    @property
    def status(self) -> str:
        if self.inconsistent is None:
            return "undecided"
        return "inconsistent" if self.inconsistent else "consistent"

    def describe(self) -> dict:
        out = {
            "status": self.status,
            "pairs_processed": self.pairs,
            "basis_size": self.basis_size,
        }
        if self.certificate is not None:
            out["certificate"] = [str(p) for p in self.certificate]
        return out

    def __repr__(self):
        return f"<groebner {self.status} pairs={self.pairs}>"


def _cof_reduce(p: Poly, cof, basis):
    """Normal form of p against the monic basis, cofactors maintained.

    Keeps the invariant that remainder plus the unreduced part equals the
    cofactor combination of the original input equations.
    """
    ring = p.ring
    remainder = ring.zero
    while not p.is_zero():
        lm = p.leading_monomial()
        lc = p.coeffs[lm]
        hit = None
        for g, gc in basis:
            if _mon_divides(g.leading_monomial(), lm):
                hit = (g, gc)
                break
        if hit is None:
            t = _mon_poly(ring, lm, lc)
            remainder = remainder + t
            p = p - t
            continue
        g, gc = hit
        q = _mon_poly(ring, _mon_div(lm, g.leading_monomial()), lc)
        p = p - q * g
        cof = [a - q * b for a, b in zip(cof, gc)]
    return remainder, cof


def groebner_inconsistent(system, cap: Optional[int] = None) -> GroebnerReport:
    """Is 1 in the ideal of the equations?  Decided by a plain Buchberger
    run in degree-reverse-lexicographic order.

    True means no common zero exists over any field extension; False
    means the equations have a zero over the algebraic closure; None
    means the pair cap was hit first.  On True the certificate writes 1
    as an explicit combination of the input equations, checked by
    expansion before being returned.
    """
    if isinstance(system, PolySystem):
        equations = list(system.equations)
        ring = system.ring
    else:
        equations = list(system)
        if not equations:
            raise PolyError("no equations")
        ring = equations[0].ring
    field = ring.field
    ok_field = (isinstance(field, Rationals) or isinstance(field, PrimeField)
                or (isinstance(field, ExtensionField) and field.is_finite()))
    if not ok_field:
        raise PolyError(f"Groebner bases over {field} are not supported")
    if cap is None:
        cap = int(os.environ.get("GERM_SPAIR_CAP", "20000"))

    def unit_vec(i, scale):
        v = [ring.zero] * len(equations)
        v[i] = ring.embed_base(scale)
        return v

    def certify(p, cof):
        inv = p.constant_term().inverse()
        cert = [h.scale(inv) for h in cof]
        total = ring.zero
        for h, e in zip(cert, equations):
            total = total + h * e
        if total != ring.one:
            raise PolyError("certificate verification failed")
        return cert

    basis = []
    pairs = []
    processed = 0

    def absorb(p, cof):
        # reduce, then either certify, discard, or join the basis
        p, cof = _cof_reduce(p, cof, basis)
        if p.is_zero():
            return None
        if p.is_constant():
            return certify(p, cof)
        inv = p.coeffs[p.leading_monomial()].inverse()
        p, cof = p.scale(inv), [h.scale(inv) for h in cof]
        for idx in range(len(basis)):
            pairs.append((idx, len(basis)))
        basis.append((p, cof))
        return None

    for i, e in enumerate(equations):
        if e.is_zero():
            continue
        cert = absorb(e, unit_vec(i, field.one))
        if cert is not None:
            return GroebnerReport(True, cert, processed, len(basis))

    def pair_key(ab):
        a, b = ab
        return _drl_key(_mon_lcm(basis[a][0].leading_monomial(),
                                 basis[b][0].leading_monomial()))

    while pairs:
        best = min(range(len(pairs)), key=lambda i: pair_key(pairs[i]))
        a, b = pairs.pop(best)
        processed += 1
        if processed > cap:
            return GroebnerReport(None, None, processed, len(basis))
        ga, ca = basis[a]
        gb, cb = basis[b]
        la, lb = ga.leading_monomial(), gb.leading_monomial()
        lcm = _mon_lcm(la, lb)
        if lcm == tuple(x + y for x, y in zip(la, lb)):
            continue  # coprime leading monomials: the pair reduces to zero
        qa = _mon_poly(ring, _mon_div(lcm, la))
        qb = _mon_poly(ring, _mon_div(lcm, lb))
        s = qa * ga - qb * gb
        cof = [qa * x - qb * y for x, y in zip(ca, cb)]
        cert = absorb(s, cof)
        if cert is not None:
            return GroebnerReport(True, cert, processed, len(basis))
    return GroebnerReport(False, None, processed, len(basis))


# -- orbit splitting under a finite extension --------------------------------

def _enumerate_substitutions(ring: JetRing, cap: int, build):
    mons = [m for m in ring.monomials if sum(m) >= 1]
    total = ring.field.size() ** (ring.nx * len(mons))
    if total > cap:
        raise PolyError(f"group enumeration of size {total} exceeds the cap {cap}")
    values = sorted(ring.field.elements(), key=lambda e: e.key())
    out = []
    for flat in itertools.product(values, repeat=ring.nx * len(mons)):
        comps = []
        for i in range(ring.nx):
            chunk = flat[i * len(mons): (i + 1) * len(mons)]
            comps.append(ring.jet({m: c for m, c in zip(mons, chunk) if not c.is_zero()}))
        try:
            out.append(build(ring, comps))
        except GermError:
            continue
    return out


def _enumerate_matrices(source: JetRing, target: JetRing, cap: int):
    m = target.nx
    mons = list(source.monomials)
    total = source.field.size() ** (m * m * len(mons))
    if total > cap:
        raise PolyError(f"matrix enumeration of size {total} exceeds the cap {cap}")
    values = sorted(source.field.elements(), key=lambda e: e.key())
    out = []
    for flat in itertools.product(values, repeat=m * m * len(mons)):
        rows = []
        k = 0
        for _ in range(m):
            row = []
            for _ in range(m):
                chunk = flat[k * len(mons): (k + 1) * len(mons)]
                row.append(source.jet({mn: c for mn, c in zip(mons, chunk)
                                       if not c.is_zero()}))
                k += 1
            rows.append(row)
        try:
            out.append(ContactLinPair(source, target, rows))
        except GermError:
            continue
    return out


def _enumerate_contacts(source: JetRing, target: JetRing, cap: int):
    joint = product_ring(source, target)
    nsrc = source.nx
    m = target.nx
    mons = [mn for mn in joint.monomials if sum(mn[nsrc: nsrc + m]) >= 1]
    total = source.field.size() ** (m * len(mons))
    if total > cap:
        raise PolyError(f"contact enumeration of size {total} exceeds the cap {cap}")
    values = sorted(source.field.elements(), key=lambda e: e.key())
    out = []
    for flat in itertools.product(values, repeat=m * len(mons)):
        comps = []
        for slot in range(m):
            chunk = flat[slot * len(mons): (slot + 1) * len(mons)]
            comps.append(joint.jet({mn: c for mn, c in zip(mons, chunk)
                                    if not c.is_zero()}))
        try:
            out.append(Contact(source, target, comps, joint=joint))
        except GermError:
            continue
    return out


def enumerate_group(tag: str, source: JetRing, target: JetRing, cap: int = 10 ** 7):
    """Every element of the jet group over a finite field, within the cap."""
    if not source.field.is_finite():
        raise PolyError("group enumeration needs a finite field")
    if tag == "R":
        return _enumerate_substitutions(source, cap, RightAut)
    if tag == "L":
        return _enumerate_substitutions(target, cap, LeftAut)
    if tag == "LR":
        lefts = _enumerate_substitutions(target, cap, LeftAut)
        rights = _enumerate_substitutions(source, cap, RightAut)
        if len(lefts) * len(rights) > cap:
            raise PolyError("group enumeration exceeds the cap")
        return [LRPair(a, b) for a in lefts for b in rights]
    if tag == "Klin":
        mats = _enumerate_matrices(source, target, cap)
        rights = _enumerate_substitutions(source, cap, RightAut)
        if len(mats) * len(rights) > cap:
            raise PolyError("group enumeration exceeds the cap")
        return [ContactLinPair(source, target, m.matrix, r, validate=False)
                for m in mats for r in rights]
    if tag == "C":
        return _enumerate_contacts(source, target, cap)
    if tag == "K":
        contacts = _enumerate_contacts(source, target, cap)
        rights = _enumerate_substitutions(source, cap, RightAut)
        if len(contacts) * len(rights) > cap:
            raise PolyError("group enumeration exceeds the cap")
        return [ContactPair(c, r) for c in contacts for r in rights]
    raise PolyError(f"unknown group {tag!r}")


def _map_key(f: MapGerm):
    return tuple(str(c) for c in f.components)


class OrbitCensus:
    """The base-field orbits inside an extension orbit, with sizes."""

    def __init__(self, tag: str, representatives, orbits, extension_orbit_size: int):
        self.tag = tag
        self.representatives = representatives
        self.orbits = orbits
        self.extension_orbit_size = extension_orbit_size
        keys = [k for orbit in orbits for k in orbit]
        if len(keys) != len(set(keys)):
            raise PolyError("orbit partition is not disjoint")
        self.rational_count = len(keys)

    def describe(self) -> dict:
        return {
            "group": self.tag,
            "extension_orbit_size": self.extension_orbit_size,
            "rational_members": self.rational_count,
            "orbits": [sorted(o) for o in self.orbits],
            "representatives": [[str(c) for c in r.components]
                                for r in self.representatives],
        }

    def __repr__(self):
        return (f"<census: {len(self.orbits)} orbits, "
                f"{self.rational_count} rational members>")


def orbit_split(tag: str, f: MapGerm, ext: Extension, cap: int = 10 ** 7) -> OrbitCensus:
    """Split the extension orbit of f into base-field orbits.

    Enumerates the whole jet group over the extension, collects the
    orbit, keeps the members with base-field coefficients, and partitions
    those by enumerating the base-field group.
    """
    source, target = f.source, f.target
    field = source.field
    if not field.is_finite() or not ext.top.is_finite():
        raise PolyError("orbit splitting needs finite fields on both levels")
    if ext.base != field:
        raise PolyError("extension must start at the map's field")
    source_K = extend_ring(source, ext)
    target_K = extend_ring(target, ext)
    fK = extend_map(f, ext, source_K, target_K)

    big_orbit = {}
    for g in enumerate_group(tag, source_K, target_K, cap):
        moved = g.act(fK)
        big_orbit.setdefault(_map_key(moved), moved)
    rational = {}
    for moved in big_orbit.values():
        down = restrict_map(moved, ext, source, target)
        if down is not None:
            rational[_map_key(down)] = down

    group_base = enumerate_group(tag, source, target, cap)
    remaining = dict(sorted(rational.items()))
    orbits = []
    representatives = []
    while remaining:
        key = next(iter(remaining))
        rep = remaining.pop(key)
        orbit_keys = {key}
        for g in group_base:
            moved_key = _map_key(g.act(rep))
            if moved_key not in rational:
                raise PolyError("base-field action left the rational locus")
            remaining.pop(moved_key, None)
            orbit_keys.add(moved_key)
        representatives.append(rep)
        orbits.append(sorted(orbit_keys))
    return OrbitCensus(tag, representatives, orbits, len(big_orbit))
