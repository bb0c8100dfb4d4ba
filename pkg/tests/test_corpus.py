import json
from datetime import timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_corpus, make_issue
from wontfix.corpus import (IssueClass, LabeledCorpus, TaxonomyAnnotation, assign_class,
                            days_between, format_timestamp, issue_from_json, issue_to_json,
                            load_corpus, load_taxonomy, normalize_wontfix_label, parse_timestamp,
                            read_issues, stratified_folds, stratified_split, write_corpus)
from wontfix.errors import DegenerateClass, DuplicateId, MissingField, OpenIssue, ParseError

LABEL_SPELLINGS = ["status:wontfix", "Resolution-Won't Fix", "won't fix", "resolved:wontfix",
                   "closed:wontfix", "wont-fix", "Won't Fix", "not-fixing", "Status-WontFix",
                   "WontFix", "status: will not fix", "Cannot fix", "wontfix", "won’t fix",
                   "  WONT_FIX  "]


@pytest.mark.parametrize("label", LABEL_SPELLINGS)
def test_wontfix_spellings_are_recognized(label):
    assert normalize_wontfix_label(label)


@pytest.mark.parametrize("label", ["bug", "fix", "won't do", "fixed", "enhancement", "",
                                   "will fix", "fix later"])
def test_other_labels_are_not_wontfix(label):
    assert not normalize_wontfix_label(label)


def test_assign_class():
    assert assign_class(make_issue(labels=("bug", "Won't Fix"))) is IssueClass.WONTFIX
    assert assign_class(make_issue(labels=("bug",))) is IssueClass.NON_WONTFIX
    assert assign_class(make_issue(labels=())) is IssueClass.NON_WONTFIX
    with pytest.raises(OpenIssue):
        assign_class(make_issue(state="open"))


def test_timestamps():
    dt = parse_timestamp("2019-03-01T12:00:00Z")
    assert dt.tzinfo is not None and dt.utcoffset().total_seconds() == 0
    assert format_timestamp(dt) == "2019-03-01T12:00:00Z"
    naive = parse_timestamp("2019-03-01T12:00:00")
    assert naive == dt and naive.tzinfo == timezone.utc
    assert days_between(parse_timestamp("2019-03-01T00:00:00Z"),
                        parse_timestamp("2019-03-02T12:00:00Z")) == 1.5


def test_json_round_trip():
    issue = make_issue(3, labels=("wontfix",), comments=[("bob", 1, "hi"), ("eve", 5, "yo")])
    ann = TaxonomyAnnotation(frozenset({"feature_request"}),
                             frozenset({"not_relevant_request", "not_a_bug"}))
    obj = issue_to_json(issue, ann)
    back, back_ann = issue_from_json(json.loads(json.dumps(obj)))
    assert back == issue
    assert back_ann == ann
    assert ann.closing_groups == {"feature_request_enhancement", "not_a_bug"}


def _valid():
    return issue_to_json(make_issue(1, labels=("bug",), comments=["bob"]))


@pytest.mark.parametrize("field", ["id", "repo", "url", "title", "state", "labels",
                                   "created_at", "author", "author_role"])
def test_missing_field(field):
    obj = _valid()
    del obj[field]
    with pytest.raises(MissingField):
        issue_from_json(obj, line=7)


@pytest.mark.parametrize("mutate", [
    lambda o: o.update(state="merged"),
    lambda o: o.update(author_role="boss"),
    lambda o: o.update(labels="wontfix"),
    lambda o: o.update(closed_at="2019-01-01T00:00:00Z"),
    lambda o: o.update(created_at="yesterday"),
    lambda o: o.update(repo="no-slash"),
    lambda o: o["comments"].insert(0, {"author": "x", "created_at": "2030-01-01T00:00:00Z",
                                       "body": ""}),
    lambda o: o.update(annotations={"opening": ["not_a_motivation"], "closing": ["not_a_bug"]}),
])
def test_schema_violations(mutate):
    obj = _valid()
    mutate(obj)
    with pytest.raises(ParseError):
        issue_from_json(obj, line=3)


def test_jsonl_io(tmp_path):
    corpus = make_corpus(3, 4)
    path = tmp_path / "c.jsonl"
    write_corpus(corpus, path)
    back = load_corpus(path)
    assert back.issues == corpus.issues
    assert back.counts() == (3, 4)


def test_duplicate_id_rejected(tmp_path):
    line = json.dumps(_valid())
    path = tmp_path / "dup.jsonl"
    path.write_text(line + "\n" + line + "\n")
    with pytest.raises(DuplicateId):
        load_corpus(path)


def test_bad_json_line_reports_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps(_valid()) + "\n{not json\n")
    with pytest.raises(ParseError, match="line 2"):
        load_corpus(path)


def test_open_issues_readable_but_not_classable(tmp_path):
    path = tmp_path / "open.jsonl"
    path.write_text(json.dumps(issue_to_json(make_issue(1, state="open"))) + "\n")
    assert len(read_issues(path)) == 1
    with pytest.raises(OpenIssue):
        load_corpus(path)


def test_taxonomy_sizes():
    tax = load_taxonomy()
    assert len(tax.opening_motivations) == 22
    assert len(tax.closing_motivations) == 26
    assert set(tax.closing_groups) == {"feature_request_enhancement", "change", "not_a_bug",
                                       "bug", "other"}


def test_swapped_corpus():
    c = make_corpus(2, 5)
    assert c.swapped().counts() == (5, 2)


def test_split_counts_and_disjointness():
    c = make_corpus(11, 20)
    train, test = stratified_split(c, 0.5, seed=3)
    assert train.counts() == (5, 10)
    assert test.counts() == (6, 10)
    assert not {i.id for i in train} & {i.id for i in test}


def test_split_needs_two_per_class():
    with pytest.raises(DegenerateClass):
        stratified_split(make_corpus(1, 5))


def test_split_is_seeded():
    c = make_corpus(10, 10)
    a = stratified_split(c, seed=1)[0]
    b = stratified_split(c, seed=1)[0]
    other = stratified_split(c, seed=2)[0]
    assert a.issues == b.issues
    assert a.issues != other.issues


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 40), st.integers(2, 60), st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_folds_partition_and_balance(n_w, n_n, k, seed):
    c = make_corpus(n_w, n_n)
    folds = stratified_folds(c, k, seed)
    flat = [i for f in folds for i in f]
    assert sorted(flat) == list(range(len(c)))
    labels = c.labels()
    for cls, total in zip((IssueClass.WONTFIX, IssueClass.NON_WONTFIX), (n_w, n_n)):
        per_fold = [sum(1 for i in f if labels[i] is cls) for f in folds]
        assert max(per_fold) - min(per_fold) <= 1
        assert sum(per_fold) == total


def test_corpus_rejects_unclassed_issue():
    issue = make_issue(1)
    with pytest.raises(ValueError):
        LabeledCorpus((issue,), {})
