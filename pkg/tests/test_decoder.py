import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from syndloss.decoder import (SOFTPLUS_INV_ONE, WeightSet, WeightShapeError, decode,
                              effective_weights, hard_decide, min_sum_check, nnms_forward,
                              softplus, softplus_inv)
from syndloss.linear_code import ParityCheckMatrix, derive_generator

from conftest import WORKED_Y
from oracles import codebook, nnms_reference, unit_weights, weights_to_dict


class TestMinSumCheck:
    def test_two_input_example(self):
        assert min_sum_check([0.88, -0.03])[0] == -0.03

    def test_singleton(self):
        assert min_sum_check([2.0]) == (2.0, 0)

    def test_two_negatives(self):
        assert min_sum_check([-1.0, -1.0]) == (1.0, 0)

    def test_tie_goes_to_lowest_index(self):
        assert min_sum_check([3.0, -0.5, 0.5, 0.5])[1] == 1

    def test_empty(self):
        with pytest.raises(ValueError):
            min_sum_check([])


class TestForwardExamples:
    def test_single_check_hand_example(self, repetition2):
        g = repetition2.tanner
        tr = nnms_forward([3.0, -1.0], g, WeightSet.initial(g, 1))
        np.testing.assert_array_equal(tr.c2v, [[-1.0, 3.0]])
        np.testing.assert_array_equal(tr.soft_outputs, [[2.0, 2.0]])

    def test_large_positive_llr(self, hamming):
        g = hamming.tanner
        tr = nnms_forward(np.full(7, 10.0), g, WeightSet.initial(g))
        assert np.all(tr.soft_outputs > 0)
        assert not hard_decide(tr.final).any()

    def test_trace_shapes(self, ldpc16):
        g = ldpc16.tanner
        w = WeightSet.initial(g, 4)
        tr = nnms_forward(np.ones((3, 16)), g, w)
        assert tr.soft_outputs.shape == (3, 4, 16)
        assert tr.v2c.shape == tr.c2v.shape == tr.witnesses.shape == (3, 4, 48)
        assert tr.batched and tr.iterations == 4
        single = nnms_forward(np.ones(16), g, w)
        assert not single.batched and single.final.shape == (16,)

    def test_degree_one_check_rejected(self):
        h = ParityCheckMatrix.from_dense([[1, 0, 0], [0, 1, 1]])
        with pytest.raises(ValueError, match="degree"):
            nnms_forward(np.ones(3), h.tanner, WeightSet.initial(h.tanner))

    def test_llr_length_checked(self, hamming):
        with pytest.raises(ValueError):
            decode(np.ones(6), hamming.tanner, WeightSet.initial(hamming.tanner))

    def test_weight_shape_checked(self, hamming, ldpc16):
        with pytest.raises(WeightShapeError):
            decode(np.ones(7), hamming.tanner, WeightSet.initial(ldpc16.tanner))


def _random_weights(rng, graph, T):
    return WeightSet(raw=rng.uniform(0.2, 1.8, size=(T, graph.edge_count)))


@pytest.mark.parametrize("code_fixture", ["hamming", "ldpc16"])
def test_matches_independent_decoder(code_fixture, request, kernels, monkeypatch):
    from syndloss import decoder
    monkeypatch.setattr(decoder, "kernels", kernels)
    code = request.getfixturevalue(code_fixture)
    rng = np.random.default_rng(42)
    llr = rng.normal(2.0, 2.5, size=(300, code.n))
    w = _random_weights(rng, code.tanner, 4)
    got = nnms_forward(llr, code.tanner, w).soft_outputs
    ref = nnms_reference(code.rows, llr, weights_to_dict(code.rows, w.values))
    assert got.tobytes() == ref.tobytes()


def test_backends_agree_bitwise(ldpc16):
    from syndloss import _backend
    try:
        cy = _backend.get_kernels("cython")
    except ImportError:
        pytest.skip("compiled kernels not built")
    py = _backend.get_kernels("numpy")
    L = ldpc16.tanner.layout
    rng = np.random.default_rng(1)
    llr = rng.normal(1.0, 3.0, size=(64, 16))
    w = rng.uniform(0.3, 1.5, size=(5, 48))
    for a, b in zip(cy.forward(L, llr, w), py.forward(L, llr, w)):
        assert a.tobytes() == b.tobytes()
    for ee in (False, True):
        assert cy.decode_final(L, llr, w, ee).tobytes() == py.decode_final(L, llr, w, ee).tobytes()


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, 7, elements=st.floats(-20, 20)), st.integers(-6, 6))
    def test_positive_homogeneity(self, llr, p):
        from conftest import HAMMING_ROWS
        h = ParityCheckMatrix.from_dense(HAMMING_ROWS)
        w = WeightSet.initial(h.tanner, 3)
        gamma = 2.0**p  # exact scaling in floating point
        a = nnms_forward(gamma * llr, h.tanner, w).soft_outputs
        b = gamma * nnms_forward(llr, h.tanner, w).soft_outputs
        np.testing.assert_array_equal(a, b)

    def test_codeword_fixed_point(self, hamming):
        g = hamming.tanner
        w = WeightSet(raw=np.random.default_rng(3).uniform(0.1, 2.0, (5, 12)))
        for c in codebook(hamming.rows):
            s = decode(4.0 * (1.0 - 2.0 * c), g, w)
            np.testing.assert_array_equal(hard_decide(s), c)

    def test_trace_is_self_consistent(self, ldpc16):
        g = ldpc16.tanner
        L = g.layout
        rng = np.random.default_rng(8)
        llr = rng.normal(1.5, 2.0, size=16)
        w = _random_weights(rng, g, 3)
        tr = nnms_forward(llr, g, w)
        weff = w.values
        for t in range(3):
            msg = weff[t] * tr.c2v[t]
            s = llr.copy()
            for j in range(16):
                for e in L.var_edges[L.var_ptr[j]:L.var_ptr[j + 1]]:
                    s[j] += msg[e]
            np.testing.assert_allclose(tr.soft_outputs[t], s, rtol=0, atol=1e-12)
            # witnesses point at a different edge of the same check with the extrinsic min
            for e in range(48):
                a = tr.witnesses[t, e]
                assert a != e and L.edge_check[a] == L.edge_check[e]
                assert abs(tr.c2v[t, e]) == abs(tr.v2c[t, a])

    def test_decode_equals_final_trace(self, ldpc16):
        rng = np.random.default_rng(2)
        llr = rng.normal(1.0, 2.0, size=(50, 16))
        w = _random_weights(rng, ldpc16.tanner, 5)
        np.testing.assert_array_equal(decode(llr, ldpc16.tanner, w),
                                      nnms_forward(llr, ldpc16.tanner, w).final)


class TestEarlyExit:
    def test_stops_on_valid_codeword(self, ldpc16):
        g = ldpc16.tanner
        rng = np.random.default_rng(5)
        gen = derive_generator(ldpc16)
        c = gen.encode_batch(rng.integers(0, 2, (200, 8), dtype=np.uint8))
        llr = 2.0 * (1.0 - 2.0 * c) / 0.6 + rng.normal(0, 2.0, c.shape)
        w = WeightSet.initial(g, 8)
        full = nnms_forward(llr, g, w).soft_outputs
        early = decode(llr, g, w, early_exit=True)
        for b in range(200):
            sat = [not np.any(ldpc16.rows @ hard_decide(full[b, t]) % 2) for t in range(8)]
            t_stop = sat.index(True) if any(sat) else 7
            np.testing.assert_array_equal(early[b], full[b, t_stop])


class TestHardDecide:
    def test_worked_vector(self):
        np.testing.assert_array_equal(hard_decide(WORKED_Y), [0, 0, 1, 0, 0, 0, 0])

    def test_positive(self):
        assert not hard_decide(np.ones(5)).any()

    def test_signed_zeros(self):
        np.testing.assert_array_equal(hard_decide(np.array([0.0, -0.0])), [0, 0])


class TestWeights:
    def test_softplus_examples(self):
        assert effective_weights(WeightSet([[0.0]], "softplus"))[0, 0] == pytest.approx(np.log(2))
        assert SOFTPLUS_INV_ONE == pytest.approx(0.5413, abs=1e-4)
        assert effective_weights(WeightSet([[SOFTPLUS_INV_ONE]], "softplus"))[0, 0] \
            == pytest.approx(1.0, abs=1e-15)
        tiny = effective_weights(WeightSet([[-50.0]], "softplus"))[0, 0]
        assert 0.0 < tiny < 1e-20

    def test_initial_is_one(self, ldpc16):
        for p in ("identity", "softplus"):
            np.testing.assert_allclose(WeightSet.initial(ldpc16.tanner, 3, p).values, 1.0,
                                       rtol=0, atol=1e-15)

    def test_initial_softplus_decodes_like_plain(self, ldpc16):
        g = ldpc16.tanner
        llr = np.random.default_rng(0).normal(1, 2, (20, 16))
        a = decode(llr, g, WeightSet.initial(g, 3, "softplus"))
        b = decode(llr, g, WeightSet.initial(g, 3))
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)

    @given(st.floats(-30, 30))
    def test_softplus_inverse(self, x):
        assert softplus_inv(softplus(x)) == pytest.approx(x, rel=1e-9, abs=1e-9)

    def test_text_round_trip_is_exact(self, ldpc16):
        w = WeightSet(raw=np.random.default_rng(4).normal(size=(5, 48)),
                      parametrization="softplus", code_name="ldpc_16_8", n=16, k=8)
        back = WeightSet.loads(w.dumps())
        assert back.raw.tobytes() == w.raw.tobytes()
        assert (back.parametrization, back.code_name, back.n, back.k) == ("softplus",
                                                                          "ldpc_16_8", 16, 8)
        assert back.dumps() == w.dumps()

    def test_truncated_file(self, hamming):
        text = WeightSet.initial(hamming.tanner).dumps()
        with pytest.raises(WeightShapeError):
            WeightSet.loads("\n".join(text.splitlines()[:-3]))

    def test_wrong_rank(self):
        with pytest.raises(WeightShapeError):
            WeightSet(raw=np.ones(4))


def test_unit_weights_equal_plain_reference(hamming):
    llr = np.random.default_rng(9).normal(1, 2, (50, 7))
    got = nnms_forward(llr, hamming.tanner, WeightSet.initial(hamming.tanner)).soft_outputs
    ref = nnms_reference(hamming.rows, llr, unit_weights(hamming.rows, 5))
    assert got.tobytes() == ref.tobytes()
