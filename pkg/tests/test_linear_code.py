import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from syndloss.linear_code import (AlistError, ParityCheckMatrix, RankDeficientError,
                                  build_tanner, bundled_codes, derive_generator, emit_alist,
                                  encode, hard_syndrome, is_codeword, load_code, parse_alist)

from conftest import HAMMING_ROWS, WORKED_Y

HAMMING_ALIST = """7 3
3 4
2 2 2 3 1 1 1
4 4 4
1 2 0
1 3 0
2 3 0
1 2 3
1 0 0
2 0 0
3 0 0
1 2 4 5
1 3 4 6
2 3 4 7
"""


def nullspace_by_enumeration(rows):
    """All words c with H c = 0, by brute force over GF(2)^n."""
    h = np.asarray(rows)
    n = h.shape[1]
    words = np.array(list(itertools.product([0, 1], repeat=n)))
    return {tuple(w) for w in words if not np.any(h @ w % 2)}


class TestParseAlist:
    def test_hamming(self):
        h = parse_alist(HAMMING_ALIST)
        assert (h.n, h.k) == (7, 4)
        np.testing.assert_array_equal(h.rows, HAMMING_ROWS)

    def test_unpadded_lines_accepted(self):
        text = HAMMING_ALIST.replace("1 2 0\n", "1 2\n").replace("1 0 0\n", "1\n")
        np.testing.assert_array_equal(parse_alist(text).rows, HAMMING_ROWS)

    def test_smallest_repetition_code(self):
        h = parse_alist("2 1\n1 2\n1 1\n2\n1\n1\n1 2\n")
        np.testing.assert_array_equal(h.rows, [[1, 1]])

    def test_index_out_of_range(self):
        bad = HAMMING_ALIST.replace("2 3 4 7\n", "2 3 4 9\n")
        with pytest.raises(AlistError, match="out of range") as exc:
            parse_alist(bad)
        assert exc.value.lineno == 14

    def test_malformed_header(self):
        with pytest.raises(AlistError) as exc:
            parse_alist("7 3 1\n" + HAMMING_ALIST.split("\n", 1)[1])
        assert exc.value.lineno == 1

    def test_degree_mismatch(self):
        bad = HAMMING_ALIST.replace("1 2 4 5\n", "1 2 4 0\n")
        with pytest.raises(AlistError, match="degree") as exc:
            parse_alist(bad)
        assert exc.value.lineno == 12

    def test_sections_disagree(self):
        bad = HAMMING_ALIST.replace("1 2 4 5\n", "1 2 4 6\n")
        with pytest.raises(AlistError, match="disagrees"):
            parse_alist(bad)

    def test_non_integer(self):
        with pytest.raises(AlistError, match="non-integer") as exc:
            parse_alist(HAMMING_ALIST.replace("4 4 4", "4 x 4"))
        assert exc.value.lineno == 4

    def test_truncated(self):
        with pytest.raises(AlistError):
            parse_alist("\n".join(HAMMING_ALIST.splitlines()[:8]))

    def test_emit_is_deterministic_and_parses_back(self, hamming):
        text = emit_alist(hamming)
        assert text == emit_alist(hamming)
        assert parse_alist(text) == hamming


@st.composite
def sparse_matrices(draw):
    n = draw(st.integers(3, 14))
    m = draw(st.integers(1, n - 1))
    rows = []
    for _ in range(m):
        row = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
        if not any(row):
            row[draw(st.integers(0, n - 1))] = 1
        rows.append(row)
    return ParityCheckMatrix.from_dense(np.array(rows))


@settings(max_examples=200, deadline=None)
@given(sparse_matrices())
def test_alist_round_trip_keeps_adjacency(h):
    back = parse_alist(emit_alist(h))
    assert build_tanner(back).same_adjacency(build_tanner(h))


class TestTanner:
    def test_hamming_neighbourhoods(self, hamming):
        g = build_tanner(hamming)
        one_based = [tuple(j + 1 for j in nb) for nb in g.check_neighbors]
        assert one_based == [(1, 2, 4, 5), (1, 3, 4, 6), (2, 3, 4, 7)]
        assert g.edge_count == 12

    def test_repetition(self, repetition2):
        g = build_tanner(repetition2)
        assert g.check_neighbors == ((0, 1),)
        assert g.edge_count == 2

    def test_edge_ids_are_check_major_bijection(self, ldpc16):
        g = ldpc16.tanner
        ids = [g.edge_ids[(i, j)] for i, nb in enumerate(g.check_neighbors) for j in nb]
        assert ids == list(range(g.edge_count))
        dense = np.zeros((ldpc16.m, ldpc16.n), dtype=np.uint8)
        for (i, j) in g.edge_ids:
            dense[i, j] = 1
        np.testing.assert_array_equal(dense, ldpc16.rows)
        for j, nb in enumerate(g.var_neighbors):
            assert list(nb) == sorted(nb)
            assert all(j in g.check_neighbors[i] for i in nb)


class TestGenerator:
    def test_hamming_codebook_matches_enumeration(self, hamming):
        gen = derive_generator(hamming)
        book = {tuple(encode(gen, u)) for u in itertools.product([0, 1], repeat=4)}
        assert book == nullspace_by_enumeration(HAMMING_ROWS)
        assert len(book) == 16

    def test_generator_rank(self, hamming, ldpc16):
        for code in (hamming, ldpc16):
            gen = derive_generator(code)
            # rank k over GF(2): k distinct unit messages give independent codewords
            cols = gen.columns.T.copy()
            rank = 0
            for c in range(code.n):
                piv = [r for r in range(rank, len(cols)) if cols[r, c]]
                if not piv:
                    continue
                cols[[rank, piv[0]]] = cols[[piv[0], rank]]
                for r in range(len(cols)):
                    if r != rank and cols[r, c]:
                        cols[r] ^= cols[rank]
                rank += 1
            assert rank == code.k

    def test_repetition(self, repetition2):
        gen = derive_generator(repetition2)
        np.testing.assert_array_equal(gen.columns, [[1], [1]])
        assert {tuple(encode(gen, [u])) for u in (0, 1)} == {(0, 0), (1, 1)}

    def test_rank_deficient_names_row(self):
        h = ParityCheckMatrix.from_dense([[1, 1, 0, 1], [0, 1, 1, 0], [1, 1, 0, 1]])
        with pytest.raises(RankDeficientError) as exc:
            derive_generator(h)
        assert exc.value.row == 2

    def test_permutation_is_recorded(self):
        # pivots cannot all sit in the leading columns here
        h = ParityCheckMatrix.from_dense([[0, 0, 1, 1], [0, 1, 0, 1]])
        gen = derive_generator(h)
        assert sorted(gen.column_permutation) == [0, 1, 2, 3]
        for u in itertools.product([0, 1], repeat=2):
            assert is_codeword(h, encode(gen, u))


class TestEncode:
    def test_zero_message(self, hamming):
        assert not encode(derive_generator(hamming), np.zeros(4)).any()

    def test_length_mismatch(self, hamming):
        with pytest.raises(ValueError):
            encode(derive_generator(hamming), [1, 0, 1])

    @pytest.mark.parametrize("name", bundled_codes())
    def test_bundled_codewords_satisfy_checks(self, name):
        code = load_code(name)
        gen = derive_generator(code)
        if 2 ** code.k <= 4096:
            msgs = np.array(list(itertools.product([0, 1], repeat=code.k)), dtype=np.uint8)
        else:
            msgs = np.random.default_rng(5).integers(0, 2, size=(1000, code.k), dtype=np.uint8)
        words = gen.encode_batch(msgs)
        assert not np.any((code.rows.astype(int) @ words.T.astype(int)) % 2)
        assert all(is_codeword(code, w) for w in words[:50])
        np.testing.assert_array_equal(words[7], encode(gen, msgs[7]))

    def test_batch_shape_checked(self, hamming):
        with pytest.raises(ValueError):
            derive_generator(hamming).encode_batch(np.zeros((3, 5)))


class TestHardSyndrome:
    def test_worked_example(self, hamming):
        np.testing.assert_array_equal(hard_syndrome(hamming, WORKED_Y), [1, -1, -1])

    def test_positive_vector(self, hamming):
        np.testing.assert_array_equal(hard_syndrome(hamming, np.ones(7)), [1, 1, 1])

    def test_codewords_give_all_plus(self, hamming):
        for c in nullspace_by_enumeration(HAMMING_ROWS):
            x = 1.0 - 2.0 * np.array(c)
            np.testing.assert_array_equal(hard_syndrome(hamming, x), [1, 1, 1])

    def test_sign_of_zero_is_plus(self, hamming):
        np.testing.assert_array_equal(hard_syndrome(hamming, np.zeros(7)), [1, 1, 1])
        np.testing.assert_array_equal(hard_syndrome(hamming, -np.zeros(7)), [1, 1, 1])

    def test_length_mismatch(self, hamming):
        with pytest.raises(ValueError):
            hard_syndrome(hamming, np.ones(6))

    @given(st.lists(st.floats(-1e6, 1e6), min_size=7, max_size=7))
    def test_entries_are_plus_minus_one(self, s):
        h = ParityCheckMatrix.from_dense(HAMMING_ROWS)
        assert set(hard_syndrome(h, s).tolist()) <= {-1, 1}


class TestIsCodeword:
    def test_examples(self, hamming):
        assert is_codeword(hamming, np.zeros(7, dtype=int))
        assert not is_codeword(hamming, [1, 0, 0, 0, 0, 0, 0])
        with pytest.raises(ValueError):
            is_codeword(hamming, [0] * 6)

    def test_no_weight_one_codewords(self, hamming):
        for j in range(7):
            e = np.zeros(7, dtype=int)
            e[j] = 1
            assert not is_codeword(hamming, e)


class TestMatrixValidation:
    def test_empty_row_rejected(self):
        with pytest.raises(ValueError, match="no 1"):
            ParityCheckMatrix.from_dense([[1, 1, 0], [0, 0, 0]])

    def test_bad_k(self):
        with pytest.raises(ValueError):
            ParityCheckMatrix(n=3, k=0, rows=np.ones((3, 3)))

    def test_load_unknown(self):
        with pytest.raises(FileNotFoundError):
            load_code("no_such_code")
