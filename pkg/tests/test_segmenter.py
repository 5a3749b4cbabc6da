import numpy as np
import pytest

from mgtloc.segmenter import (
    DEFAULT_CONFIG,
    SegmenterConfig,
    load_abbreviations,
    segment,
    well_formed,
)
from mgtloc.types import Sentence, normalize_ws


def texts(result):
    return [s.text for s in result]


def test_two_plain_sentences_with_spans():
    result = segment("A cat sat. It slept.")
    assert texts(result) == ["A cat sat.", "It slept."]
    assert [(s.start, s.end) for s in result] == [(0, 10), (11, 20)]


def test_abbreviation_is_not_a_boundary():
    result = segment("Dr. Smith arrived. He spoke.")
    assert texts(result) == ["Dr. Smith arrived.", "He spoke."]


def test_paragraph_break_is_a_boundary():
    result = segment("One line\n\nTwo line")
    assert texts(result) == ["One line", "Two line"]
    assert [(s.start, s.end) for s in result] == [(0, 8), (10, 18)]


def test_lowercase_after_period_is_not_a_boundary():
    result = segment("He paused... then continued. The end came.")
    assert texts(result) == ["He paused... then continued.", "The end came."]


def test_exclamation_and_question_split():
    result = segment("Really?! Yes. Go now!")
    assert texts(result) == ["Really?!", "Yes.", "Go now!"]


def test_closing_quote_after_terminal():
    # boundaries may sit after closing quotes that follow the punctuation
    result = segment('She said "Stop." Then she left.')
    assert texts(result) == ['She said "Stop."', "Then she left."]
    result = segment('He shouted "Run!" Everyone ran.')
    assert texts(result) == ['He shouted "Run!"', "Everyone ran."]
    # ... but a lowercase continuation keeps attribution attached
    result = segment('She said "stop." and left quietly.')
    assert texts(result) == ['She said "stop." and left quietly.']


def test_decimal_number_not_split():
    result = segment("It rose 3.5 percent. Markets cheered.")
    assert texts(result) == ["It rose 3.5 percent.", "Markets cheered."]


def test_empty_and_whitespace_input():
    assert segment("") == []
    assert segment(" \n\t ") == []


def test_custom_abbreviation_config():
    config = SegmenterConfig(abbreviation_list=frozenset({"qty"}))
    result = segment("Order qty. was large. Ship now.", config)
    assert texts(result) == ["Order qty. was large.", "Ship now."]


def test_abbreviation_file_parsing(tmp_path):
    path = tmp_path / "abbr.txt"
    path.write_text("# comment\nmr\n\nu.s  # inline\n", encoding="utf-8")
    assert load_abbreviations(path) == frozenset({"mr", "u.s"})


def test_non_ascii_byte_offsets():
    text = "Café opened today. Queue was long."
    result = segment(text)
    body = text.encode("utf-8")
    for s in result:
        assert normalize_ws(body[s.start : s.end].decode("utf-8")) == s.text


# properties ----------------------------------------------------------------


def _random_text(rng: np.random.Generator) -> str:
    words = ["alpha", "beta", "Gamma", "delta", "Dr.", "u.s.", "3.5", "end"]
    parts = []
    for _ in range(rng.integers(1, 60)):
        parts.append(words[rng.integers(len(words))])
        draw = rng.random()
        if draw < 0.12:
            parts.append(". " if rng.random() < 0.7 else "! ")
        elif draw < 0.16:
            parts.append("\n\n")
        else:
            parts.append(" ")
    return "".join(parts)


def test_property_coverage_and_order():
    rng = np.random.default_rng(1234)
    for _ in range(200):
        text = _random_text(rng)
        result = segment(text)
        body = text.encode("utf-8")
        prev_end = -1
        for s in result:
            assert s.start < s.end
            assert s.start > prev_end
            prev_end = s.end
        covered = set()
        for s in result:
            covered.update(range(s.start, s.end))
        for i, byte in enumerate(body):
            if not chr(byte).isspace():
                assert i in covered, f"byte {i} ({chr(byte)!r}) uncovered in {text!r}"


def test_property_whitespace_collapsed_reconstruction():
    rng = np.random.default_rng(99)
    for _ in range(200):
        text = _random_text(rng)
        result = segment(text)
        joined = " ".join(s.text for s in result)
        assert joined == normalize_ws(text)


def test_property_idempotence():
    rng = np.random.default_rng(7)
    for _ in range(200):
        text = _random_text(rng)
        for s in segment(text):
            again = segment(s.text)
            assert [t.text for t in again] == [s.text]


def test_property_determinism():
    rng = np.random.default_rng(55)
    for _ in range(50):
        text = _random_text(rng)
        assert segment(text) == segment(text)


# well_formed ---------------------------------------------------------------


def _sentence(text: str) -> Sentence:
    return Sentence(text=text, start=0, end=len(text.encode("utf-8")), tokens=len(text.split()))


@pytest.mark.parametrize(
    "text,expected",
    [
        ("The market fell sharply today.", True),
        ("and then some", False),
        ("Why?", False),  # 1 token < 3
        ("2024 was a big year.", True),
        ('"Quoted start counts fine."', True),
        ("lowercase start fails here.", False),
        ("No terminal punctuation here", False),
        ("Ends with closer quote." + '"', True),
        ("Is this fine?", True),
        ("Stop right now!", True),
    ],
)
def test_well_formed_cases(text, expected):
    assert well_formed(_sentence(text)) is expected


def test_default_config_loads_packaged_list():
    assert "mr" in DEFAULT_CONFIG.abbreviation_list
    assert "u.s" in DEFAULT_CONFIG.abbreviation_list
