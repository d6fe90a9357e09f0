import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from namegen import metrics as E
from namegen.errors import DataError, ValidationError

REPEAT = ["is", "busybox", "available", "busybox", "available", "busybox"]
GOLD = ["is", "busybox", "available"]

words = st.lists(st.sampled_from(["a", "b", "c", "d", "e"]), min_size=0, max_size=6)


def P(pred, gold, i=""):
    return E.Prediction(list(pred), list(gold), i)


class TestPairMetrics:
    def test_repetition_inflates_f1_only(self):
        assert E.precision_recall(REPEAT, GOLD, clipped=False) == (1.0, 1.0)
        assert E.subword_f1(REPEAT, GOLD) == 1.0
        assert E.precision_recall(REPEAT, GOLD, clipped=True) == (0.5, 1.0)
        assert abs(E.modified_f1(REPEAT, GOLD) - 2 / 3) < 1e-12

    def test_partial_overlap(self):
        assert E.subword_f1(["has", "morpheme"], ["contains", "morpheme"]) == 0.5
        assert E.modified_f1(["has", "morpheme"], ["contains", "morpheme"]) == 0.5

    def test_short_prediction(self):
        assert abs(E.modified_f1(["is", "available"], GOLD) - 0.8) < 1e-12

    def test_edge_cases(self):
        assert E.modified_f1(GOLD, GOLD) == E.subword_f1(GOLD, GOLD) == 1.0
        assert E.modified_f1(["x"], GOLD) == 0.0
        assert E.modified_f1([], GOLD) == E.subword_f1([], GOLD) == 0.0

    def test_empty_gold_rejected(self):
        with pytest.raises(ValidationError):
            E.Prediction(["a"], [])

    @settings(max_examples=200, deadline=None)
    @given(words, words.filter(bool))
    def test_properties(self, pred, gold):
        pc, rc = E.precision_recall(pred, gold, clipped=True)
        pu, ru = E.precision_recall(pred, gold, clipped=False)
        assert pc <= pu + 1e-12
        for x in (pc, rc, pu, ru, E.modified_f1(pred, gold), E.subword_f1(pred, gold)):
            assert 0.0 <= x <= 1.0
        for perm in itertools.islice(itertools.permutations(pred), 5):
            assert E.modified_f1(list(perm), gold) == E.modified_f1(pred, gold)


class TestCorpus:
    def test_accuracy(self):
        preds = [P(GOLD, GOLD), P(["is", "available"], GOLD), P(["a"], ["b"]), P(["b"], ["a"])]
        assert E.exact_accuracy(preds) == 0.25
        assert E.exact_accuracy([P(["has", "morpheme"], ["contains", "morpheme"])]) == 0.0
        with pytest.raises(DataError):
            E.exact_accuracy([])

    def test_micro_and_macro(self):
        preds = [P(["a", "b"], ["a", "b"]), P(["c"], ["d", "e", "f"])]
        rep = E.evaluate(preds)
        # micro: 2 of 3 predicted tokens right, 2 of 5 gold tokens found
        assert abs(rep.precision_clipped - 2 / 3) < 1e-12
        assert abs(rep.recall_clipped - 2 / 5) < 1e-12
        assert abs(rep.f1_star_star - 2 * (2 / 3) * (2 / 5) / (2 / 3 + 2 / 5)) < 1e-12
        assert abs(rep.macro_f1_star_star - 0.5) < 1e-12
        assert rep.accuracy == 0.5 and rep.n_examples == 2
        assert rep.counts["gold_tokens"] == 5

    def test_empty(self):
        with pytest.raises(DataError):
            E.evaluate([])

    def test_summary_table(self):
        rep = E.evaluate([P(GOLD, GOLD)])
        table = E.summary_table([("ours", rep)])
        assert table.splitlines()[0].split() == ["Model", "F1", "F1**", "Acc"]
        assert table.splitlines()[1].split() == ["ours", "100.00", "100.00", "100.00"]

    def test_predictions_file(self, tmp_path):
        preds = [P(["a"], ["a", "b"], "x:1"), P([], ["c"], "x:2")]
        E.write_predictions(tmp_path / "p.jsonl", preds)
        assert E.read_predictions(tmp_path / "p.jsonl") == preds
        (tmp_path / "e").write_text("")
        with pytest.raises(DataError):
            E.read_predictions(tmp_path / "e")
        (tmp_path / "b").write_text('{"pred": ["a"]}\n')
        with pytest.raises(DataError, match=":1"):
            E.read_predictions(tmp_path / "b")


class TestBuckets:
    def test_forty_subwords(self):
        vocab = [f"s{i:02d}" for i in range(40)]
        freq = {w: 100 - i for i, w in enumerate(vocab)}
        preds = [P([a, b], [a, b]) for a, b in zip(vocab[::2], vocab[1::2])]
        rep = E.bucketed_scores(preds, freq)
        assert len(rep.buckets) == 20 and not rep.underfilled
        assert all(len(b.subwords) == 2 for b in rep.buckets)
        assert all(b.f_star_star == 1.0 for b in rep.buckets)
        assert rep.buckets[0].subwords == ["s00", "s01"]

    def test_remainder_goes_first(self):
        vocab = [f"s{i:02d}" for i in range(43)]
        preds = [P([w], [w]) for w in vocab]
        sizes = [len(b.subwords) for b in E.bucketed_scores(preds, {}).buckets]
        assert sizes == [3, 3, 3] + [2] * 17

    def test_rare_never_predicted(self):
        common, rare = ["get", "set"], ["zorp", "quux"]
        freq = {"get": 50, "set": 40, "zorp": 1, "quux": 1}
        preds = [P(["get"], ["get", "zorp"]), P(["set"], ["set", "quux"])]
        rep = E.bucketed_scores(preds, freq, n_buckets=2)
        assert [b.subwords for b in rep.buckets] == [common, sorted(rare)]
        assert [b.f_star_star for b in rep.buckets] == [1.0, 0.0]

    def test_underfilled(self):
        rep = E.bucketed_scores([P(["a"], ["a", "b"])], {"a": 2, "b": 1})
        assert rep.underfilled and len(rep.buckets) == 2


class TestLowFrequency:
    def test_full_threshold_matches_corpus(self):
        preds = [P(["a", "b"], ["a", "c"]), P(["d"], ["d"])]
        freq = {"a": 1, "b": 1, "c": 1, "d": 1}
        full = E.evaluate(preds)
        sl = E.low_frequency_slice(preds, freq, 100.0)
        assert sl.f1_star_star == full.f1_star_star and sl.accuracy == full.accuracy

    def test_no_rare(self):
        assert E.low_frequency_slice([P(["a"], ["a"])], {"a": 10}, 1.0) is None

    def test_hand_computed(self):
        # "zz" and "yy" have relative frequency 1/1000 = 0.1%, below 0.5%
        freq = {"get": 600, "set": 398, "zz": 1, "yy": 1}
        preds = [P(["get", "zz"], ["get", "zz"]), P(["set", "zz"], ["set", "yy"]),
                 P(["get"], ["get"])]
        sl = E.low_frequency_slice(preds, freq, 0.5)
        # rare pred tokens: zz, zz; rare gold tokens: zz, yy; clipped overlap 1
        assert abs(sl.f1_star_star - 0.5) < 1e-12
        assert sl.accuracy == 0.5


class TestBootstrap:
    def systems(self, n=60, seed=0):
        rng = np.random.default_rng(seed)
        gold = [[f"w{rng.integers(5)}", f"w{rng.integers(5)}"] for _ in range(n)]
        good = [P(g, g, str(i)) for i, g in enumerate(gold)]
        bad = [P(["zz"], g, str(i)) for i, g in enumerate(gold)]
        return good, bad

    def test_identical(self):
        good, _ = self.systems()
        assert E.paired_bootstrap(good, good, "f1**", 2000) == 0.5

    def test_dominant(self):
        good, bad = self.systems()
        assert E.paired_bootstrap(good, bad, "f1**", 2000) == 0.0
        assert E.paired_bootstrap(bad, good, "f1**", 2000) == 1.0

    def test_deterministic_and_callable_agree(self):
        rng = np.random.default_rng(1)
        a = [P([f"w{rng.integers(4)}"], ["w0", "w1"], str(i)) for i in range(30)]
        b = [P([f"w{rng.integers(4)}"], ["w0", "w1"], str(i)) for i in range(30)]
        p1 = E.paired_bootstrap(a, b, "f1**", 500, seed=3)
        assert p1 == E.paired_bootstrap(a, b, "f1**", 500, seed=3)
        p2 = E.paired_bootstrap(a, b, lambda ps: E.corpus_metric(ps, "f1**"), 500, seed=3)
        assert abs(p1 - p2) < 1e-12
        assert 0.0 < p1 < 1.0

    def test_mismatched(self):
        good, _ = self.systems()
        with pytest.raises(DataError):
            E.paired_bootstrap(good, good[:-1])
        shifted = [P(p.predicted, p.gold, p.id + "x") for p in good]
        with pytest.raises(DataError):
            E.paired_bootstrap(good, shifted)

    def test_corpus_metric_consistent(self):
        good, bad = self.systems()
        mixed = good[:30] + bad[30:]
        for m, attr in (("f1", "f1"), ("f1**", "f1_star_star"), ("accuracy", "accuracy")):
            assert abs(E.corpus_metric(mixed, m) - getattr(E.evaluate(mixed), attr)) < 1e-12
