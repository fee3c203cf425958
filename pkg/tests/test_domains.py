import pytest

from knowflow.domains import (
    Domain,
    DomainTable,
    FunctionalClass,
    PeriodWindow,
    bundled_domains,
    default_windows,
    functional_class,
    load_windows,
    validate_windows,
)
from knowflow.errors import InvalidPairError, ParseError


@pytest.fixture(scope="module")
def t1():
    return bundled_domains()


def test_table_has_29_domains_and_406_pairs(t1):
    assert len(t1) == 29
    assert t1.n_pairs == 406
    assert len(list(t1.pairs())) == 406


def test_default_order_is_lexicographic(t1):
    assert list(t1.abbrevs) == sorted(t1.abbrevs)


def test_keep_order_preserves_file_order():
    t = bundled_domains(keep_order=True)
    assert t.abbrevs[:2] == ("SIS", "MIS")


@pytest.mark.parametrize(
    "a,b,expected",
    [
        ("IL", "3D", FunctionalClass.DIFFERENT_OPERAND),
        ("MIS", "OIS", FunctionalClass.SAME_FUNCTION),
        ("CAP", "ET", FunctionalClass.DIFFERENT_BOTH),
    ],
)
def test_functional_class_examples(t1, a, b, expected):
    assert functional_class(t1[a], t1[b]) is expected
    assert functional_class(t1[b], t1[a]) is expected


def test_functional_class_same_domain_rejected(t1):
    with pytest.raises(InvalidPairError):
        functional_class(t1["CT"], t1["CT"])


def test_functional_class_different_operation():
    a = Domain("A", "a", "energy", "storage")
    b = Domain("B", "b", "energy", "transformation")
    assert functional_class(a, b) is FunctionalClass.DIFFERENT_OPERATION


def test_csv_round_trip(t1):
    assert DomainTable.from_csv(t1.to_csv()) == t1


@pytest.mark.parametrize(
    "text,line",
    [
        ("abbrev,name,operand,operation\nA,a,energy,storage\nA,b,energy,storage\n", 3),
        ("abbrev,name,operand,operation\nA,a,plasma,storage\nB,b,energy,storage\n", 2),
        ("abbrev,name,operand,operation\n,a,energy,storage\nB,b,energy,storage\n", 2),
    ],
)
def test_bad_domain_rows_report_line(text, line):
    with pytest.raises(ParseError) as exc:
        DomainTable.from_csv(text)
    assert exc.value.line == line


def test_unknown_abbrev_lookup(t1):
    with pytest.raises(KeyError):
        t1.index("XYZ")


def test_default_windows():
    w = default_windows()
    assert [x.label for x in w] == [f"T{k}" for k in range(1, 9)]
    assert (w[0].start_year, w[-1].end_year) == (1976, 2013)
    assert 1985 in w[2] and 1983 not in w[2]


def test_overlapping_windows_rejected():
    with pytest.raises(ValueError):
        validate_windows([PeriodWindow("A", 1990, 1995), PeriodWindow("B", 1995, 1999)])


def test_load_windows_bad_file():
    with pytest.raises(ParseError):
        load_windows('{"windows": [{"label": "A"}]}\n')
