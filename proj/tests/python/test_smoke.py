import json
import math

import pytest

import gapprobe

EXAMPLE_SENTENCES = [
    "I know who the story about is likely to amuse soon.",
    "I know that the story about Mary is likely to amuse soon.",
    "I know who the story about is likely to amuse Anna soon.",
    "I know that the story about Mary is likely to amuse Anna soon.",
]


def test_generate_is_clean_and_deterministic():
    a = gapprobe.generate(10, 7)
    assert a == gapprobe.generate(10, 7)
    assert a.count("\n") == 41
    assert gapprobe.validate(a) == []


def test_example_lexicon_reproduces_item():
    csv_text = gapprobe.generate(1, 0, str(gapprobe.data_dir() / "lexicon" / "example.lex"))
    for s in EXAMPLE_SENTENCES:
        assert s in csv_text


def test_tokenizer_known_ids():
    tok = gapprobe.gpt2_tokenizer()
    assert tok.vocab_size == 50257
    assert tok.end_of_text == 50256
    assert tok.encode("Hello world") == [15496, 995]
    s = "café 中文 don't"
    assert tok.decode(tok.encode(s)) == s


def test_filter_keeps_refined_items():
    csv_text = gapprobe.generate(5, 1)
    kept, removed, report = gapprobe.filter(csv_text)
    assert report["items_in"] == 5 and report["items_kept"] == 5
    assert removed.count("\n") == 1


def test_uniform_scores_give_zero_deltas():
    scores, tokens = gapprobe.score(gapprobe.generate(4, 2), "uniform:50257")
    rec = gapprobe.analyze(scores, "u")
    assert rec["n_items"] == 4
    assert rec["mean_did"] == 0.0
    assert rec["acc_did"]["successes"] == 0
    first = json.loads(tokens.splitlines()[0])
    assert all(abs(b - math.log2(50257)) < 1e-9 for b in first["surprisal_bits"])


def test_statistics():
    stat, p = gapprobe.chi_square(10, 30, 15, 15)
    assert stat > 0 and 0 < p < 1
    lo, hi = gapprobe.wilson_ci(0, 10)
    assert lo == 0.0 and 0.27 < hi < 0.28
    t = gapprobe.t_test([1.0, 2.0, 3.0, 4.0])
    assert t["df"] == 3 and t["mean"] == 2.5


def test_errors_carry_kind():
    with pytest.raises(gapprobe.GapprobeError) as e:
        gapprobe.score(gapprobe.generate(1, 0), "nonsense")
    assert e.value.kind == "InvalidBackend"


def test_run_cli():
    code, out, err = gapprobe.run_cli(["generate", "--n", "1", "--seed", "0"])
    assert code == 0 and out.startswith("sentence_type,item_id,condition,full_sentence")
    code, _, err = gapprobe.run_cli(["bogus"])
    assert code == 1
