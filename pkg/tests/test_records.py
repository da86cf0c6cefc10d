import pytest

from laughkit.errors import ValidationError
from laughkit.records import (
    LANGUAGES,
    CandidateLaughter,
    LabeledSequence,
    LaughterSegment,
    VideoRecord,
    Word,
    q3,
    validate_labeled_sequence,
    validate_laughter,
    validate_laughter_track,
    validate_video_record,
    validate_word,
    validate_word_sequence,
)


def test_q3_rounds_to_milliseconds():
    assert q3(1.23456) == 1.235
    assert q3(0.0005) == 0.001 or q3(0.0005) == 0.0  # banker's rounding is fine
    assert q3(2.0) == 2.0
    assert isinstance(q3(1), float)


def test_languages_fixed():
    assert LANGUAGES == ("cs", "en", "es", "fr", "hu", "it", "pt")


def test_video_record_validation():
    ok = VideoRecord("v1", "en", "chan", 120.0, "train")
    validate_video_record(ok)
    with pytest.raises(ValidationError):
        validate_video_record(VideoRecord("v1", "de", "chan", 120.0, "train"))
    with pytest.raises(ValidationError):
        validate_video_record(VideoRecord("v1", "en", "chan", -1.0, "train"))
    with pytest.raises(ValidationError):
        validate_video_record(VideoRecord("v1", "en", "chan", 120.0, "dev"))
    with pytest.raises(ValidationError):
        validate_video_record(VideoRecord("", "en", "chan", 120.0, "train"))


def test_word_validation():
    validate_word(Word("v1", 0, "hi", 0.0, 0.5))
    validate_word(Word("v1", 0, "hi", 0.5, 0.5))  # zero length allowed
    with pytest.raises(ValidationError):
        validate_word(Word("v1", 0, "hi", 0.5, 0.4))
    with pytest.raises(ValidationError):
        validate_word(Word("v1", 0, "hi", -0.1, 0.4))
    with pytest.raises(ValidationError):
        validate_word(Word("v1", 0, "  ", 0.0, 0.4))
    with pytest.raises(ValidationError):
        validate_word(Word("v1", -1, "hi", 0.0, 0.4))


def test_word_sequence_ordering():
    words = [
        Word("v1", 0, "a", 0.0, 0.4),
        Word("v1", 1, "b", 0.4, 0.8),
        Word("v2", 0, "c", 0.0, 0.2),
        Word("v1", 2, "d", 0.8, 1.0),
    ]
    validate_word_sequence(words)  # interleaved videos are fine
    with pytest.raises(ValidationError):
        validate_word_sequence(
            [Word("v1", 0, "a", 0.0, 0.4), Word("v1", 0, "b", 0.5, 0.8)]
        )
    with pytest.raises(ValidationError):
        validate_word_sequence(
            [Word("v1", 0, "a", 0.5, 0.8), Word("v1", 1, "b", 0.0, 0.4)]
        )


def test_laughter_validation():
    validate_laughter(LaughterSegment("v1", 0.0, 1.0, "detector", 0.9))
    validate_laughter(LaughterSegment("v1", 0.0, 1.0, "asr_gap"))
    with pytest.raises(ValidationError):
        validate_laughter(LaughterSegment("v1", 1.0, 1.0, "manual"))
    with pytest.raises(ValidationError):
        validate_laughter(LaughterSegment("v1", 0.0, 1.0, "guess"))
    with pytest.raises(ValidationError):
        validate_laughter(LaughterSegment("v1", 0.0, 1.0, "detector", 1.5))


def test_manual_track_overlap_rejected():
    track = [
        LaughterSegment("v1", 0.0, 1.0, "manual"),
        LaughterSegment("v1", 0.5, 1.5, "manual"),
    ]
    with pytest.raises(ValidationError):
        validate_laughter_track(track)
    # detector segments may overlap freely
    validate_laughter_track(
        [
            LaughterSegment("v1", 0.0, 1.0, "detector", 0.5),
            LaughterSegment("v1", 0.5, 1.5, "detector", 0.5),
        ]
    )
    # touching manual segments are fine
    validate_laughter_track(
        [
            LaughterSegment("v1", 0.0, 1.0, "manual"),
            LaughterSegment("v1", 1.0, 1.5, "manual"),
        ]
    )


def test_labeled_sequence_validation():
    validate_labeled_sequence(LabeledSequence("v1", "en", ["a", "b"], [0, 1]))
    with pytest.raises(ValidationError):
        validate_labeled_sequence(LabeledSequence("v1", "en", ["a"], [0, 1]))
    with pytest.raises(ValidationError):
        validate_labeled_sequence(LabeledSequence("v1", "en", ["a"], [2]))
    with pytest.raises(ValidationError):
        validate_labeled_sequence(LabeledSequence("v1", "xx", ["a"], [0]))


def test_candidate_fields():
    cand = CandidateLaughter("v1", 0.5, 3.0, 0, 1, 0.4, 3.0)
    assert cand.next_word_idx == 1
    tail = CandidateLaughter("v1", 0.5, 3.0, 4, None, 0.4, None)
    assert tail.corrected_next_start_s is None
