"""Viseme table semantics and transcript parsing."""

import pytest

from bearface.visemes import (
    PhonemeSegment,
    UnknownPhonemeError,
    VisemeClass,
    VisemeTable,
    bundled_transcript,
    map_phoneme_to_viseme,
    parse_transcript,
    parse_viseme_table,
    read_transcript,
    write_transcript,
)


def test_default_table_shape(viseme_table):
    assert len(viseme_table.classes) == 20
    assert [c.id for c in viseme_table.classes] == list(range(20))


def test_labials_share_one_class(viseme_table):
    b = map_phoneme_to_viseme("b", viseme_table)
    p = map_phoneme_to_viseme("p", viseme_table)
    m = map_phoneme_to_viseme("m", viseme_table)
    assert b.id == p.id == m.id
    assert b.labial
    assert viseme_table.labial_ids() == {b.id}


def test_silence_marker_maps_to_silence_class(viseme_table):
    silence = map_phoneme_to_viseme("sil", viseme_table)
    assert silence.id in viseme_table.silence_ids()
    assert not silence.labial


def test_vowel_and_labial_differ(viseme_table):
    assert (
        map_phoneme_to_viseme("a", viseme_table).id
        != map_phoneme_to_viseme("b", viseme_table).id
    )


def test_unknown_phoneme_names_symbol(viseme_table):
    with pytest.raises(UnknownPhonemeError, match="xx"):
        viseme_table.lookup("xx")


def test_table_rejects_duplicate_ownership():
    classes = [VisemeClass(i, frozenset({f"q{i}"})) for i in range(20)]
    classes[1] = VisemeClass(1, frozenset({"b", "p", "m"}), labial=True)
    classes[2] = VisemeClass(2, frozenset({"q2", "b"}))
    with pytest.raises(ValueError, match="appears in classes"):
        VisemeTable(classes)


def test_table_requires_labial_bpm():
    classes = [VisemeClass(i, frozenset({f"q{i}"})) for i in range(20)]
    with pytest.raises(ValueError, match="labial"):
        VisemeTable(classes)


def test_table_requires_twenty_classes():
    classes = [VisemeClass(i, frozenset({f"q{i}"})) for i in range(19)]
    with pytest.raises(ValueError, match="exactly 20"):
        VisemeTable(classes)


def test_table_file_rejects_bad_magic():
    with pytest.raises(ValueError, match="must start"):
        parse_viseme_table("something-else 1\n0 0 sil\n")


def test_custom_table_file_round_trip(tmp_path, viseme_table):
    # The documented format survives a rewrite: id, labial flag, members.
    lines = ["bearface-visemes 1", "# custom copy"]
    for cls in viseme_table.classes:
        members = " ".join(sorted(cls.phonemes))
        lines.append(f"{cls.id} {int(cls.labial)} {members}  # inline note")
    path = tmp_path / "custom.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    from bearface.visemes import load_viseme_table

    loaded = load_viseme_table(path)
    for original, restored in zip(viseme_table.classes, loaded.classes):
        assert restored.phonemes == original.phonemes
        assert restored.labial == original.labial


def test_segment_validation():
    with pytest.raises(ValueError):
        PhonemeSegment("a", 1.0, 1.0)
    with pytest.raises(ValueError):
        PhonemeSegment("", 0.0, 1.0)
    segment = PhonemeSegment("a", 0.2, 0.6)
    assert segment.duration == pytest.approx(0.4)
    assert segment.midpoint == pytest.approx(0.4)


def test_transcript_parse_and_order():
    transcript = parse_transcript("0.0 0.5 m\n0.5 1.0 a\n")
    assert [s.phoneme for s in transcript] == ["m", "a"]
    with pytest.raises(ValueError, match="overlap"):
        parse_transcript("0.0 0.6 m\n0.5 1.0 a\n")
    with pytest.raises(ValueError, match="expected"):
        parse_transcript("0.0 0.5\n")


def test_transcript_round_trip(tmp_path):
    transcript = parse_transcript("0.0 0.5 m\n0.5 1.0 ɑ\n")
    path = tmp_path / "demo.align"
    write_transcript(transcript, path)
    assert read_transcript(path) == transcript


def test_bundled_demo_spans_one_second():
    transcript = bundled_transcript()
    assert transcript[0].start == 0.0
    assert transcript[-1].end == 1.0
