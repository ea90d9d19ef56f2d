import os
import pathlib

import numpy as np
import pytest

from hyperfem._accel import BACKEND, KernelDomainError
from hyperfem.materials import make_stvk
from hyperfem.symbolic import (CompileError, compile_tape, count_nodes,
                               eval_expr, eval_tape, exp, ln, mul, variable)
from hyperfem.symbolic import add as eadd

from conftest import random_deformation_gradients

X = variable("x", 0)
Y = variable("y", 1)
Z = variable("z", 2)

DATA = pathlib.Path(__file__).parent / "data"


class TestCompile:
    def test_cse_computes_shared_subtree_once(self):
        s = eadd(X, Y)
        kern = compile_tape([s, mul(s, Z)], [X, Y, Z])
        assert kern.n_instructions == 2  # one add, one mul

    def test_unbound_leaf_names_the_leaf(self):
        with pytest.raises(CompileError, match="z"):
            compile_tape([eadd(X, Z)], [X, Y])

    def test_rejects_non_leaf_layout(self):
        with pytest.raises(CompileError):
            compile_tape([X], [eadd(X, Y)])

    def test_constant_output(self):
        from hyperfem.symbolic import constant
        kern = compile_tape([constant(4.0), X], [X])
        out = kern.evaluate(np.array([7.0]))
        assert out.tolist() == [4.0, 7.0]

    def test_golden_dump(self):
        s = eadd(X, Y)
        e1 = mul(s, s)
        e2 = exp(mul(e1, Z))
        kern = compile_tape([e1, e2], [X, Y, Z])
        golden = DATA / "small_kernel.tape"
        text = kern.dump()
        if not golden.exists():  # pragma: no cover - first-run freeze
            golden.write_text(text)
        assert text == golden.read_text()


class TestEvaluate:
    def test_stvk_outputs_at_identity(self, lame3k):
        bound = make_stvk(lame3k).bind()
        psi, P, A = bound.eval(np.eye(3))
        assert psi == 0.0
        assert np.abs(P).max() == 0.0

    def test_tape_matches_dag_eval_bitwise(self, lame3k):
        model = make_stvk(lame3k)
        psi, Pexprs, _ = model.stress_tangent_exprs()
        fvars = [variable("F", i) for i in range(9)]
        from hyperfem.symbolic import parameter
        layout = fvars + [parameter("mu"), parameter("lambda")]
        kern = compile_tape([psi] + Pexprs, layout)
        rng = np.random.default_rng(12)
        F = random_deformation_gradients(1000, rng, det_range=(0.0, np.inf))
        rows = np.hstack([F, np.tile([lame3k.mu, lame3k.lam], (len(F), 1))])
        out = kern.evaluate(rows)
        for k in rng.choice(len(F), size=25, replace=False):
            bindings = {fvars[i]: F[k, i] for i in range(9)}
            bindings[parameter("mu")] = lame3k.mu
            bindings[parameter("lambda")] = lame3k.lam
            assert eval_expr(psi, bindings) == out[k, 0]
            for j in (0, 4, 8):
                assert eval_expr(Pexprs[j], bindings) == out[k, 1 + j]

    def test_deterministic_rerun(self, lame3k):
        bound = make_stvk(lame3k).bind()
        rng = np.random.default_rng(3)
        F = random_deformation_gradients(64, rng)
        a = np.hstack(bound.eval_batch(F.copy())[1])
        b = np.hstack(bound.eval_batch(F.copy())[1])
        assert np.array_equal(a, b)

    def test_dict_input(self):
        kern = compile_tape([eadd(X, Y)], [X, Y])
        assert eval_tape(kern, {X: 1.0, Y: 2.0})[0] == 3.0
        with pytest.raises(ValueError, match="missing value"):
            eval_tape(kern, {X: 1.0})

    def test_ln_domain_error(self):
        kern = compile_tape([ln(X)], [X])
        with pytest.raises(KernelDomainError, match="non-invertible"):
            kern.evaluate(np.array([-1.0]))

    def test_negative_det_with_ln_material(self, lame3k):
        from hyperfem.materials import make_neo_hookean
        bound = make_neo_hookean(lame3k).bind()
        F = np.diag([-1.0, 1.0, 1.0])
        with pytest.raises(KernelDomainError):
            bound.eval(F)

    def test_requires_positive_domain_flag(self, lame3k):
        from hyperfem.materials import make_neo_hookean
        assert not make_stvk(lame3k).kernel().requires_positive_domain
        assert make_neo_hookean(lame3k).kernel().requires_positive_domain

    def test_scratch_is_caller_owned(self):
        kern = compile_tape([mul(X, X)], [X])
        scratch = kern.new_scratch(4)
        vals = np.arange(4.0)[:, None]
        out1 = kern.evaluate(vals, scratch)
        out2 = kern.evaluate(vals, scratch)
        assert np.array_equal(out1, out2)


@pytest.mark.skipif(BACKEND != "compiled", reason="compiled lane not built")
class TestCompiledLane:
    def test_matches_python_lane(self, lame3k):
        from hyperfem._accel import numpy_backend
        bound = make_stvk(lame3k).bind()
        kern = bound.kernel
        rng = np.random.default_rng(9)
        F = random_deformation_gradients(128, rng)
        rows = np.hstack([F, np.tile([lame3k.mu, lame3k.lam], (len(F), 1))])

        fast = kern.evaluate(rows)

        slots = kern.new_scratch(len(rows))
        slots[:kern.n_inputs] = rows.T
        nc = len(kern.const_vals)
        slots[kern.n_inputs:kern.n_inputs + nc] = kern.const_vals[:, None]
        numpy_backend.run_tape(kern.ops, kern.arg1, kern.arg2, kern.out, slots)
        slow = slots[kern.output_slots].T

        assert np.array_equal(fast, slow)
