"""Built-in strain-energy models and the one-expression authoring path.

A material is its strain-energy density: a scalar expression over the nine
deformation-gradient components and named parameters.  Stress (P = dpsi/dF)
and tangent (A = dP/dF) are derived symbolically and compiled to one tape
per model; nothing material-specific is ever hand-differentiated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .symbolic import (Expr, compile_tape, constant, differentiate, exp,
                       identity, ln, matrix, parameter, simplify, trace,
                       transpose, variable, vector)
from .symbolic import det3 as _det3
from .symbolic import dot as _dot
from .symbolic import inv3 as _inv3
from .symbolic.tensor import TensorExpr

__all__ = [
    "LameParams", "MaterialError", "MaterialModel", "BoundMaterial",
    "lame_from_young_poisson", "deformation_gradient", "make_stvk",
    "make_neo_hookean", "make_mooney_rivlin", "make_holzapfel_ogden",
    "author_material", "parse_energy_expression", "material_from_config",
    "BUILTIN_BUILDERS",
]


class MaterialError(ValueError):
    pass


@dataclass(frozen=True)
class LameParams:
    """First and second Lamé constants, in Pa."""
    mu: float
    lam: float

    def __post_init__(self):
        if not self.mu > 0.0:
            raise MaterialError(f"mu must be positive, got {self.mu}")
        if not self.lam > -2.0 / 3.0 * self.mu:
            raise MaterialError(
                f"lambda = {self.lam} violates admissibility lambda > -2/3 mu")


def lame_from_young_poisson(young: float, poisson: float) -> LameParams:
    """Convert (E, nu) to Lamé constants."""
    if not young > 0.0:
        raise MaterialError(f"Young's modulus must be positive, got {young}")
    if poisson >= 0.5:
        raise MaterialError(
            "incompressible limit not supported by displacement formulation "
            f"(poisson = {poisson})")
    if poisson <= -1.0:
        raise MaterialError(f"Poisson's ratio must exceed -1, got {poisson}")
    mu = young / (2.0 * (1.0 + poisson))
    lam = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson))
    return LameParams(mu=mu, lam=lam)


def deformation_gradient() -> TensorExpr:
    """The 3x3 tensor of F-variable leaves, row-major components 0..8."""
    return matrix([[variable("F", 3 * i + j) for j in range(3)] for i in range(3)])


@dataclass(frozen=True)
class ParamSpec:
    unit: str = ""
    low: float = -math.inf
    high: float = math.inf


class MaterialModel:
    """Name + parameter schema + energy density expression (+ fibers)."""

    def __init__(self, name: str, psi: Expr, schema: dict[str, ParamSpec],
                 defaults: dict[str, float] | None = None,
                 fibers: tuple[np.ndarray, np.ndarray] | None = None):
        self.name = name
        self.psi = simplify(psi)
        self.schema = dict(schema)
        self.defaults = dict(defaults or {})
        self.fibers = fibers
        self._check_leaves()
        self._kernel = None

    def _check_leaves(self):
        from .symbolic import leaves_of
        for leaf in leaves_of([self.psi]):
            if leaf.op == "var":
                name, idx = leaf.data
                if name != "F" or not 0 <= idx < 9:
                    raise MaterialError(
                        f"energy may only reference F components, found {name}[{idx}]")
            else:
                if leaf.data not in self.schema:
                    raise MaterialError(
                        f"energy references undeclared parameter {leaf.data!r}")

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(self.schema.keys())

    def stress_tangent_exprs(self):
        """(psi, P list of 9, A list of 81), derived by differentiation."""
        fvars = [variable("F", i) for i in range(9)]
        P = [simplify(differentiate(self.psi, v)) for v in fvars]
        A = [simplify(differentiate(p, v)) for p in P for v in fvars]
        return self.psi, P, A

    def kernel(self):
        """Compiled tape computing (psi, P[9], A[81]) from F and parameters."""
        if self._kernel is None:
            psi, P, A = self.stress_tangent_exprs()
            layout = [variable("F", i) for i in range(9)]
            layout += [parameter(n) for n in self.param_names]
            self._kernel = compile_tape([psi] + P + A, layout)
        return self._kernel

    def bind(self, values: dict[str, float] | None = None) -> "BoundMaterial":
        vals = dict(self.defaults)
        if values:
            vals.update(values)
        missing = [n for n in self.param_names if n not in vals]
        if missing:
            raise MaterialError(f"missing parameter values: {missing}")
        unknown = [n for n in vals if n not in self.schema]
        if unknown:
            raise MaterialError(f"unknown parameters: {unknown}")
        for n, v in vals.items():
            spec = self.schema[n]
            if not (spec.low <= v <= spec.high):
                raise MaterialError(
                    f"parameter {n} = {v} outside admissible range "
                    f"[{spec.low}, {spec.high}]")
        return BoundMaterial(self, vals)


class BoundMaterial:
    """A material with parameter values fixed; evaluates (psi, P, A)."""

    def __init__(self, model: MaterialModel, values: dict[str, float]):
        self.model = model
        self.values = dict(values)
        self.kernel = model.kernel()
        self._param_row = np.array([values[n] for n in model.param_names])
        self.requires_positive_det = self.kernel.requires_positive_domain

    @property
    def name(self):
        return self.model.name

    def new_scratch(self, n_points):
        return self.kernel.new_scratch(n_points)

    def eval(self, F):
        """Single state: F is (3,3) or flat (9,).  Returns psi, P(3,3), A(3,3,3,3)."""
        F = np.asarray(F, dtype=np.float64).reshape(9)
        psi, P, A = self.eval_batch(F[None, :])
        return float(psi[0]), P[0].reshape(3, 3), A[0].reshape(3, 3, 3, 3)

    def eval_batch(self, F_flat, scratch=None):
        """Batch of states: F_flat is (N, 9) row-major deformation gradients.

        Returns (psi (N,), P (N,9), A (N,81)); A is row-major in (ij),(kl).
        """
        F_flat = np.asarray(F_flat, dtype=np.float64)
        n = F_flat.shape[0]
        inputs = np.empty((n, 9 + len(self._param_row)))
        inputs[:, :9] = F_flat
        inputs[:, 9:] = self._param_row
        out = self.kernel.evaluate(inputs, scratch)
        return out[:, 0], out[:, 1:10], out[:, 10:91]


def _kinematics():
    F = deformation_gradient()
    C = transpose(F) @ F
    return F, C


def make_stvk(p: LameParams) -> MaterialModel:
    """Saint Venant-Kirchhoff: quadratic in the Green-Lagrange strain."""
    _, C = _kinematics()
    E = (C - identity(3)) * constant(0.5)
    lam, mu = parameter("lambda"), parameter("mu")
    psi = (lam / 2) * trace(E).as_scalar() ** 2 \
        + mu * trace(E @ E).as_scalar()
    schema = {"mu": ParamSpec("Pa", low=np.nextafter(0.0, 1.0)),
              "lambda": ParamSpec("Pa")}
    return MaterialModel("stvk", psi, schema, defaults={"mu": p.mu, "lambda": p.lam})


def make_neo_hookean(p: LameParams) -> MaterialModel:
    """Compressible Neo-Hookean with logarithmic volumetric terms."""
    F, C = _kinematics()
    lam, mu = parameter("lambda"), parameter("mu")
    Ic = trace(C).as_scalar()
    J = _det3(F).as_scalar()
    lnJ = ln(J)
    psi = (mu / 2) * (Ic - 3) - mu * lnJ + (lam / 2) * lnJ ** 2
    schema = {"mu": ParamSpec("Pa", low=np.nextafter(0.0, 1.0)),
              "lambda": ParamSpec("Pa")}
    return MaterialModel("neo_hookean", psi, schema,
                         defaults={"mu": p.mu, "lambda": p.lam})


def make_mooney_rivlin(c01: float, c10: float, k: float,
                       paper_literal_volumetric: bool = False) -> MaterialModel:
    """Two-term Mooney-Rivlin on the modified invariants.

    The default volumetric term is (K/2) ln(J)^2, which is stress-free at
    F = I.  ``paper_literal_volumetric`` switches to (K/2) ln(J), a variant
    that carries a nonzero reference stress; it is kept for reproduction
    experiments only.
    """
    F, C = _kinematics()
    C01, C10, K = parameter("C01"), parameter("C10"), parameter("K")
    Ic = trace(C).as_scalar()
    IIc = (Ic ** 2 - trace(C @ C).as_scalar()) / 2
    J = _det3(F).as_scalar()
    lnJ = ln(J)
    Ibar = exp(constant(-2.0 / 3.0) * lnJ) * Ic
    IIbar = exp(constant(-4.0 / 3.0) * lnJ) * IIc
    vol = (K / 2) * lnJ if paper_literal_volumetric else (K / 2) * lnJ ** 2
    psi = C01 * (Ibar - 3) + C10 * (IIbar - 3) + vol
    schema = {"C01": ParamSpec("Pa", low=0.0), "C10": ParamSpec("Pa", low=0.0),
              "K": ParamSpec("Pa", low=0.0)}
    name = "mooney_rivlin_paper_literal" if paper_literal_volumetric else "mooney_rivlin"
    return MaterialModel(name, psi, schema,
                         defaults={"C01": c01, "C10": c10, "K": k})


def make_holzapfel_ogden(a: float, b: float, a_f: float = 0.0, b_f: float = 1.0,
                         a_s: float = 0.0, b_s: float = 1.0,
                         a_fs: float = 0.0, b_fs: float = 1.0,
                         kappa: float = 0.0,
                         f0=(1.0, 0.0, 0.0), s0=(0.0, 1.0, 0.0)) -> MaterialModel:
    """Orthotropic exponential model with two fiber families.

    Terms whose a-coefficient is zero are omitted entirely, giving the
    transversely isotropic (a_fs = a_s = 0) and isotropic (also a_f = 0)
    degenerations.  The fiber directions are unit vectors in the reference
    configuration.
    """
    f0 = np.asarray(f0, dtype=np.float64)
    s0 = np.asarray(s0, dtype=np.float64)
    for nm, v in (("f0", f0), ("s0", s0)):
        if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise MaterialError(f"{nm} must be a 3-component unit vector, got {v}")

    F, C = _kinematics()
    J = _det3(F).as_scalar()
    lnJ = ln(J)
    I1 = trace(C).as_scalar()
    fv = vector([constant(x) for x in f0])
    sv = vector([constant(x) for x in s0])

    schema = {"a": ParamSpec("Pa", low=0.0), "b": ParamSpec("", low=np.nextafter(0.0, 1.0))}
    defaults = {"a": a, "b": b}
    pa, pb = parameter("a"), parameter("b")
    psi = pa / (2 * pb) * exp(pb * (I1 - 3))

    def fiber_term(coef, expo, invariant_minus):
        return coef / (2 * expo) * exp(expo * invariant_minus ** 2)

    if a_f != 0.0:
        if not b_f > 0.0:
            raise MaterialError("b_f must be positive when the f-fiber term is present")
        I4f = _dot(fv, C @ fv).as_scalar()
        paf, pbf = parameter("a_f"), parameter("b_f")
        psi = psi + fiber_term(paf, pbf, I4f - 1)
        schema["a_f"] = ParamSpec("Pa", low=0.0)
        schema["b_f"] = ParamSpec("", low=np.nextafter(0.0, 1.0))
        defaults.update(a_f=a_f, b_f=b_f)
    if a_s != 0.0:
        if not b_s > 0.0:
            raise MaterialError("b_s must be positive when the s-fiber term is present")
        I4s = _dot(sv, C @ sv).as_scalar()
        pas, pbs = parameter("a_s"), parameter("b_s")
        psi = psi + fiber_term(pas, pbs, I4s - 1)
        schema["a_s"] = ParamSpec("Pa", low=0.0)
        schema["b_s"] = ParamSpec("", low=np.nextafter(0.0, 1.0))
        defaults.update(a_s=a_s, b_s=b_s)
    if a_fs != 0.0:
        if not b_fs > 0.0:
            raise MaterialError("b_fs must be positive when the shear term is present")
        I8 = _dot(fv, C @ sv).as_scalar()
        pafs, pbfs = parameter("a_fs"), parameter("b_fs")
        psi = psi + pafs / (2 * pbfs) * (exp(pbfs * I8 ** 2) - 1)
        schema["a_fs"] = ParamSpec("Pa", low=0.0)
        schema["b_fs"] = ParamSpec("", low=np.nextafter(0.0, 1.0))
        defaults.update(a_fs=a_fs, b_fs=b_fs)
    if kappa != 0.0:
        pk = parameter("kappa")
        psi = psi + (pk / 4) * (J ** 2 - 1 - 2 * lnJ)
        schema["kappa"] = ParamSpec("Pa", low=0.0)
        defaults["kappa"] = kappa

    return MaterialModel("holzapfel_ogden", psi, schema, defaults=defaults,
                         fibers=(f0, s0))


def author_material(name: str, psi, schema, defaults=None) -> MaterialModel:
    """Register a user material from its energy density alone.

    ``psi`` may be an Expr over F-variables/parameters or an infix string
    (see :func:`parse_energy_expression`).  ``schema`` maps parameter names
    to ParamSpec or to plain (low, high) tuples; a bare list of names also
    works.
    """
    if isinstance(schema, (list, tuple)):
        schema = {n: ParamSpec() for n in schema}
    else:
        schema = {n: (s if isinstance(s, ParamSpec) else ParamSpec("", *s))
                  for n, s in schema.items()}
    if isinstance(psi, str):
        psi = parse_energy_expression(psi, schema.keys())
    if isinstance(psi, TensorExpr):
        psi = psi.as_scalar()
    return MaterialModel(name, psi, schema, defaults=defaults)


# --- minimal infix parser for energy strings --------------------------------

_FUNCS = ("ln", "exp", "tr", "det", "inv", "transpose", "dot")


class _Tokens:
    def __init__(self, text):
        self.text = text
        self.toks = self._lex(text)
        self.pos = 0

    @staticmethod
    def _lex(text):
        toks = []
        i = 0
        while i < len(text):
            c = text[i]
            if c.isspace():
                i += 1
            elif c.isalpha() or c == "_":
                j = i
                while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                toks.append(("name", text[i:j]))
                i = j
            elif c.isdigit() or c == ".":
                j = i
                while j < len(text) and (text[j].isdigit() or text[j] in ".eE"
                                         or (text[j] in "+-" and text[j - 1] in "eE")):
                    j += 1
                toks.append(("num", float(text[i:j])))
                i = j
            elif text[i:i + 2] == "**":
                toks.append(("op", "**"))
                i += 2
            elif c in "+-*/(),":
                toks.append(("op", c))
                i += 1
            else:
                raise MaterialError(f"unexpected character {c!r} in expression")
        toks.append(("end", None))
        return toks

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, op):
        kind, val = self.next()
        if kind != "op" or val != op:
            raise MaterialError(f"expected {op!r}, got {val!r}")


def parse_energy_expression(text: str, param_names) -> Expr:
    """Parse an infix energy expression into a scalar node.

    Grammar: numbers, parameters, F, I; operators + - * / ** and the
    functions ln, exp, tr, det, inv, transpose, dot.  ``*`` between two
    matrices is the matrix product; ``**`` takes integer exponents on
    scalars.
    """
    from .symbolic import scalar as _scalar
    params = set(param_names)
    toks = _Tokens(text)

    def atom():
        kind, val = toks.next()
        if kind == "num":
            return _scalar(constant(val))
        if kind == "op" and val == "(":
            e = expr()
            toks.expect(")")
            return e
        if kind == "op" and val == "-":
            return -atom_pow()
        if kind == "name":
            if val in _FUNCS:
                toks.expect("(")
                args = [expr()]
                while toks.peek() == ("op", ","):
                    toks.next()
                    args.append(expr())
                toks.expect(")")
                return _apply_func(val, args)
            if val == "F":
                return deformation_gradient()
            if val == "I":
                return identity(3)
            if val in params:
                return _scalar(parameter(val))
            raise MaterialError(f"unknown symbol {val!r} in energy expression")
        raise MaterialError(f"unexpected token {val!r}")

    def atom_pow():
        base = atom()
        if toks.peek() == ("op", "**"):
            toks.next()
            kind, val = toks.next()
            sign = 1
            if kind == "op" and val == "-":
                sign = -1
                kind, val = toks.next()
            if kind != "num" or not float(val).is_integer():
                raise MaterialError("** requires an integer exponent")
            return _scalar(base.as_scalar() ** (sign * int(val)))
        return base

    def term():
        left = atom_pow()
        while toks.peek()[0] == "op" and toks.peek()[1] in ("*", "/"):
            _, op = toks.next()
            right = atom_pow()
            if op == "/":
                left = left / right.as_scalar()
            elif left.shape == () or right.shape == ():
                left = left * right if right.shape == () else right * left
            else:
                left = left @ right
        return left

    def expr():
        left = term()
        while toks.peek()[0] == "op" and toks.peek()[1] in ("+", "-"):
            _, op = toks.next()
            right = term()
            left = left + right if op == "+" else left - right
        return left

    result = expr()
    if toks.peek()[0] != "end":
        raise MaterialError(f"trailing input at token {toks.peek()[1]!r}")
    if isinstance(result, TensorExpr):
        result = result.as_scalar()
    return result


def _apply_func(name, args):
    from .symbolic import scalar as _scalar
    if name in ("ln", "exp"):
        (x,) = args
        f = ln if name == "ln" else exp
        return _scalar(f(x.as_scalar()))
    if name == "tr":
        return trace(args[0])
    if name == "det":
        return _det3(args[0])
    if name == "inv":
        return _inv3(args[0])
    if name == "transpose":
        return transpose(args[0])
    if name == "dot":
        a, b = args
        return _dot(a, b)
    raise MaterialError(f"unknown function {name!r}")  # pragma: no cover


# --- config-file loading -----------------------------------------------------

BUILTIN_BUILDERS = {
    "stvk": "stvk",
    "saint_venant_kirchhoff": "stvk",
    "neo_hookean": "neo_hookean",
    "neo-hookean": "neo_hookean",
    "mooney_rivlin": "mooney_rivlin",
    "mooney-rivlin": "mooney_rivlin",
    "holzapfel_ogden": "holzapfel_ogden",
    "holzapfel-ogden": "holzapfel_ogden",
}


def _lame_from_params(params: dict) -> LameParams:
    if "young" in params or "E" in params:
        young = params.get("young", params.get("E"))
        poisson = params.get("poisson", params.get("nu"))
        if poisson is None:
            raise MaterialError("young modulus given without poisson ratio")
        return lame_from_young_poisson(young, poisson)
    if "mu" in params and ("lambda" in params or "lam" in params):
        return LameParams(mu=params["mu"], lam=params.get("lambda", params.get("lam")))
    raise MaterialError(
        "material parameters need either (young, poisson) or (mu, lambda)")


def material_from_config(cfg) -> MaterialModel:
    """Build a model from a config mapping (or a path to a JSON file).

    Shape: {"name": ..., "builtin": ... | "expression": ...,
            "params": {...}, "fibers": {"f0": [...], "s0": [...]}}
    """
    if isinstance(cfg, (str, bytes)):
        with open(cfg) as fh:
            cfg = json.load(fh)
    params = dict(cfg.get("params", {}))
    if "builtin" in cfg:
        key = BUILTIN_BUILDERS.get(str(cfg["builtin"]).lower())
        if key is None:
            raise MaterialError(f"unknown builtin material {cfg['builtin']!r}")
        if key == "stvk":
            return make_stvk(_lame_from_params(params))
        if key == "neo_hookean":
            return make_neo_hookean(_lame_from_params(params))
        if key == "mooney_rivlin":
            return make_mooney_rivlin(
                params["C01"], params["C10"], params["K"],
                paper_literal_volumetric=bool(cfg.get("paper_literal_volumetric", False)))
        fibers = cfg.get("fibers", {})
        return make_holzapfel_ogden(
            a=params.get("a", 0.0), b=params.get("b", 1.0),
            a_f=params.get("a_f", 0.0), b_f=params.get("b_f", 1.0),
            a_s=params.get("a_s", 0.0), b_s=params.get("b_s", 1.0),
            a_fs=params.get("a_fs", 0.0), b_fs=params.get("b_fs", 1.0),
            kappa=params.get("kappa", 0.0),
            f0=fibers.get("f0", (1.0, 0.0, 0.0)),
            s0=fibers.get("s0", (0.0, 1.0, 0.0)))
    if "expression" in cfg:
        name = cfg.get("name", "user_material")
        return author_material(name, cfg["expression"],
                               {n: ParamSpec() for n in params},
                               defaults=params)
    raise MaterialError("material config needs 'builtin' or 'expression'")
