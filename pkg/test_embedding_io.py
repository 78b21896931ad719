# test_embedding_io.py
import logging

import numpy as np
import pytest

from lexicalmodularity.embeddings.embedding_io import (
    EmbeddingSpace,
    load_embeddings,
    merge_spaces,
    preprocess,
    save_embeddings,
)
from lexicalmodularity.embeddings.lexicon import Lexicon, filter_lexicon, load_lexicon, save_lexicon
from lexicalmodularity.utils.constants import PreprocessStep
from lexicalmodularity.utils.errors import (
    DimensionMismatchError,
    DuplicateLanguageError,
    EmbeddingFormatError,
    EmptyInputError,
    LexiconFormatError,
    OutOfVocabularyError,
    ZeroNormError,
)
from lexicalmodularity.utils.synthetic import make_space

UNIT = [PreprocessStep.UNIT]
DEFAULT = [PreprocessStep.UNIT, PreprocessStep.CENTER, PreprocessStep.UNIT]


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_embeddings_basic(tmp_path):
    path = write(tmp_path, "en.vec", "2 3\ncat 1 0 0\ndog 0 1 0\n")
    space = load_embeddings(path, "en")
    assert len(space) == 2
    assert space.dim == 3
    assert space.words == ("cat", "dog")
    assert space.languages == ("en", "en")
    assert space.ranks[space.index_of("en", "cat")] == 0
    np.testing.assert_array_equal(space.vectors[1], [0.0, 1.0, 0.0])


def test_load_embeddings_arity_error_reports_line(tmp_path):
    path = write(tmp_path, "bad.vec", "1 2\ncat 1 0 extra\n")
    with pytest.raises(EmbeddingFormatError) as excinfo:
        load_embeddings(path, "en")
    assert excinfo.value.line_number == 2


def test_load_embeddings_duplicates_first_wins(tmp_path, caplog):
    path = write(tmp_path, "dup.vec", "3 2\ncat 1 0\ndog 0 1\ncat 5 5\n")
    with caplog.at_level(logging.WARNING):
        space = load_embeddings(path, "en")
    assert space.words == ("cat", "dog")
    np.testing.assert_array_equal(space.vectors[0], [1.0, 0.0])
    assert list(space.ranks) == [0, 1]
    assert "1 duplicate word(s)" in caplog.text


@pytest.mark.parametrize(
    "text",
    [
        "two 3\ncat 1 0 0\n",       # header not numeric
        "1\ncat 1\n",               # header arity
        "1 2\ncat 1 nan\n",         # non-finite value
        "1 2\ncat 1 zero\n",        # unparsable value
        "3 2\ncat 1 0\ndog 0 1\n",  # fewer lines than declared
    ],
)
def test_load_embeddings_format_errors(tmp_path, text):
    with pytest.raises(EmbeddingFormatError):
        load_embeddings(write(tmp_path, "bad.vec", text), "en")


def test_load_embeddings_empty(tmp_path):
    with pytest.raises(EmptyInputError):
        load_embeddings(write(tmp_path, "empty.vec", "0 3\n"), "en")


def test_load_embeddings_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_embeddings(tmp_path / "missing.vec", "en")


def test_load_embeddings_max_vocab_and_lowercase(tmp_path):
    path = write(tmp_path, "en.vec", "3 2\nCat 1 0\ncat 0 1\nDog 1 1\n")
    space = load_embeddings(path, "en", max_vocab=2, lowercase=True)
    assert space.words == ("cat",)  # "cat" collides with "Cat" after lowercasing


def test_save_and_load_round_trip(tmp_path):
    space = make_space(np.array([[0.123456, -1.0], [2.5, 0.000001]]), "en", ["a", "b"])
    path = save_embeddings(space, tmp_path / "out.vec")
    assert path.read_text(encoding="utf-8").splitlines()[0] == "2 2"
    again = load_embeddings(path, "en")
    assert again.words == space.words
    np.testing.assert_array_equal(again.vectors, space.vectors)


def test_preprocess_unit():
    space = make_space(np.array([[2.0, 0.0], [0.0, 2.0]]), "en")
    np.testing.assert_allclose(preprocess(space, UNIT).vectors, [[1.0, 0.0], [0.0, 1.0]])


def test_preprocess_default_chain():
    space = make_space(np.array([[1.0, 0.0], [0.0, 1.0]]), "en")
    h = np.sqrt(0.5)
    np.testing.assert_allclose(preprocess(space, DEFAULT).vectors, [[h, -h], [-h, h]], atol=1e-12)


def test_preprocess_empty_chain_is_identity():
    space = make_space(np.array([[3.0, 4.0]]), "en")
    np.testing.assert_array_equal(preprocess(space, []).vectors, space.vectors)


def test_preprocess_properties():
    rng = np.random.default_rng(3)
    space = make_space(rng.standard_normal((40, 7)), "en")
    unit = preprocess(space, UNIT)
    assert np.all(np.abs(np.linalg.norm(unit.vectors, axis=1) - 1) <= 1e-9)
    centered = preprocess(space, [PreprocessStep.UNIT, PreprocessStep.CENTER])
    assert np.all(np.abs(centered.vectors.mean(axis=0)) <= 1e-9)


def test_preprocess_zero_norm_names_word():
    space = make_space(np.array([[1.0, 0.0], [0.0, 0.0]]), "en", ["ok", "void"])
    with pytest.raises(ZeroNormError) as excinfo:
        preprocess(space, UNIT)
    assert excinfo.value.word == "void"


def test_space_is_immutable():
    space = make_space(np.eye(2), "en")
    with pytest.raises(ValueError):
        space.vectors[0, 0] = 5.0


def test_merge_spaces_keeps_homographs_apart():
    en = make_space(np.eye(2), "en", ["bank", "river"])
    fr = make_space(np.array([[1.0, 0.0]]), "fr", ["bank"])
    merged = merge_spaces([en, fr])
    assert len(merged) == 3
    assert merged.index_of("en", "bank") != merged.index_of("fr", "bank")
    with pytest.raises(OutOfVocabularyError):
        merged.index_of("fr", "river")


def test_merge_spaces_is_order_insensitive():
    en = make_space(np.eye(3)[:2], "en", ["cat", "dog"])
    ja = make_space(np.eye(3)[2:], "ja", ["猫"])
    forward, backward = merge_spaces([en, ja]), merge_spaces([ja, en])
    assert forward.words == backward.words
    assert forward.languages == backward.languages
    np.testing.assert_array_equal(forward.vectors, backward.vectors)


def test_merge_spaces_errors():
    with pytest.raises(DimensionMismatchError):
        merge_spaces([make_space(np.ones((1, 100)), "en"), make_space(np.ones((1, 200)), "de")])
    with pytest.raises(DuplicateLanguageError):
        merge_spaces([make_space(np.ones((1, 2)), "en"), make_space(np.ones((1, 2)), "en")])


def test_top_frequent_per_language():
    en = make_space(np.ones((5, 2)), "en")
    ja = make_space(np.ones((3, 2)), "ja")
    merged = merge_spaces([en, ja])
    assert len(merged.top_frequent(2)) == 4
    assert merged.top_frequent(100) is merged


def test_load_lexicon(tmp_path):
    lex = load_lexicon(write(tmp_path, "lex.txt", "cat 猫\ndog 犬\n\ncat 猫\n"), "en", "ja")
    assert lex.pairs == (("cat", "猫"), ("dog", "犬"))
    assert (lex.source_language, lex.target_language) == ("en", "ja")


def test_load_lexicon_errors(tmp_path):
    with pytest.raises(LexiconFormatError) as excinfo:
        load_lexicon(write(tmp_path, "bad.txt", "cat\n"), "en", "ja")
    assert excinfo.value.line_number == 1
    with pytest.raises(EmptyInputError):
        load_lexicon(write(tmp_path, "empty.txt", "\n\n"), "en", "ja")


def test_lexicon_many_to_many():
    lex = Lexicon((("bank", "banque"), ("bank", "rive"), ("shore", "rive")), "en", "fr")
    assert lex.translations() == {"bank": ["banque", "rive"], "shore": ["rive"]}


def test_filter_lexicon():
    lex = Lexicon((("a", "b"), ("c", "d")), "en", "fr")
    assert filter_lexicon(lex, Lexicon((("a", "b"),), "en", "fr")).pairs == (("c", "d"),)
    assert filter_lexicon(lex, Lexicon((), "en", "fr")).pairs == lex.pairs
    assert filter_lexicon(lex, lex).pairs == ()


def test_embedding_space_rejects_duplicate_nodes():
    with pytest.raises(ValueError):
        EmbeddingSpace(words=("a", "a"), languages=("en", "en"), vectors=np.eye(2), ranks=np.arange(2))


def test_save_lexicon_keeps_pair_order(tmp_path):
    lex = Lexicon((("bank", "rive"), ("bank", "banque"), ("shore", "rive")), "en", "fr")
    path = save_lexicon(lex, tmp_path / "out" / "lex.txt")
    assert path.read_text(encoding="utf-8") == "bank rive\nbank banque\nshore rive\n"
    assert load_lexicon(path, "en", "fr") == lex


def test_invalid_utf8_is_a_format_error(tmp_path):
    vectors = tmp_path / "bad.vec"
    vectors.write_bytes(b"2 2\ncat 1 0\ndo\xffg 0 1\n")
    with pytest.raises(EmbeddingFormatError) as excinfo:
        load_embeddings(vectors, "en")
    assert excinfo.value.line_number == 3
    pairs = tmp_path / "bad.txt"
    pairs.write_bytes(b"cat chat\n\xfe\xff chien\n")
    with pytest.raises(LexiconFormatError) as excinfo:
        load_lexicon(pairs, "en", "fr")
    assert excinfo.value.line_number == 2
