import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persona.emotion import (
    FILLER_VOCABULARY,
    LABELS,
    TOY_VOCABULARY,
    EmotionModel,
    classify_emotion,
    default_emotion_model,
    emotion_histogram,
    lexicon_hash,
    read_corpus,
    read_lexicon,
    tokenize,
    train_emotion_model,
)
from persona.errors import ValidationError

TOY_DOCS = [
    ("rage unfair news", "angry"),
    ("rage rage today", "angry"),
    ("lol joke today", "funny"),
    ("lol news", "funny"),
    ("wow news today", "surprised"),
    ("wow sudden", "surprised"),
    ("tears mother", "moving"),
    ("tears today news", "moving"),
]
TOY_LEXICON = {"rage", "lol", "wow", "tears"}

# Brute-force tally with boost 2, smoothing 1, |V| = 10; class totals 9/7/7/7.
TOY_PROBS = {
    "rage": (Fraction(7, 19), Fraction(1, 17), Fraction(1, 17), Fraction(1, 17)),
    "news": (Fraction(2, 19), Fraction(2, 17), Fraction(2, 17), Fraction(2, 17)),
    "lol": (Fraction(1, 19), Fraction(5, 17), Fraction(1, 17), Fraction(1, 17)),
}
# Exact Bayes arithmetic for "rage news today lol zebra" ("zebra" is out of vocabulary).
TOY_POSTERIOR = (
    Fraction(83521, 213842),
    Fraction(651605, 1496894),
    Fraction(130321, 1496894),
    Fraction(130321, 1496894),
)


@pytest.fixture(scope="module")
def toy_model():
    return train_emotion_model(TOY_DOCS, TOY_LEXICON, boost=2.0, smoothing=1.0)


def test_tokenize():
    assert tokenize("Wow!! That's SO funny, lol.") == ["wow", "that", "s", "so", "funny", "lol"]
    assert tokenize("") == []


def test_toy_probabilities(toy_model):
    assert len(toy_model.log_likelihood) == 10
    for tok, probs in TOY_PROBS.items():
        got = [math.exp(v) for v in toy_model.log_likelihood[tok]]
        assert got == pytest.approx([float(p) for p in probs], abs=1e-12)
    assert toy_model.priors == (0.25, 0.25, 0.25, 0.25)


def test_toy_posterior(toy_model):
    label, post = classify_emotion(toy_model, "rage news today lol zebra")
    assert label == "funny"
    assert post == pytest.approx([float(p) for p in TOY_POSTERIOR], abs=1e-12)


def test_empty_text_uses_priors_and_tie_order(toy_model):
    label, post = classify_emotion(toy_model, "")
    assert label == "angry"
    assert post == pytest.approx([0.25] * 4, abs=1e-15)


def test_funny_only_tokens(toy_model):
    assert classify_emotion(toy_model, "lol joke")[0] == "funny"


def test_boost_one_empty_lexicon_is_plain_nb():
    m1 = train_emotion_model(TOY_DOCS, set(), boost=1.0)
    m2 = train_emotion_model(TOY_DOCS, TOY_LEXICON, boost=1.0)
    m3 = train_emotion_model(TOY_DOCS, set(), boost=3.0)
    assert m1.log_likelihood == m2.log_likelihood == m3.log_likelihood
    # plain multinomial NB: count("rage" | angry) = 3, total 6, |V| = 10
    assert math.exp(m1.log_likelihood["rage"][0]) == pytest.approx(4 / 16)


def test_unbalanced_priors():
    m = train_emotion_model(TOY_DOCS + [("rage", "angry")] * 4, TOY_LEXICON)
    assert m.priors == pytest.approx((0.5, 1 / 6, 1 / 6, 1 / 6))
    assert math.fsum(m.priors) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("corpus", [[], [("x", "happy")]])
def test_training_errors(corpus):
    with pytest.raises(ValidationError):
        train_emotion_model(corpus)


@pytest.mark.parametrize("kw", [{"boost": 0.5}, {"smoothing": 0.0}])
def test_bad_hyperparameters(kw):
    with pytest.raises(ValueError):
        train_emotion_model(TOY_DOCS, **kw)


def test_order_invariance(toy_model):
    docs = TOY_DOCS[:]
    random.Random(3).shuffle(docs)
    assert train_emotion_model(docs, TOY_LEXICON).to_json() == toy_model.to_json()


@given(st.lists(st.text(alphabet="abc xyz", max_size=12), max_size=6))
def test_posterior_normalized(texts):
    model = default_emotion_model()
    for text in texts + [" ".join(TOY_VOCABULARY["moving"]) * 20]:
        _, post = classify_emotion(model, text)
        assert math.fsum(post) == pytest.approx(1.0, abs=1e-9)
        assert all(0 <= p <= 1 for p in post)


@settings(max_examples=60)
@given(
    st.lists(st.integers(1, 4), min_size=4, max_size=4),  # lexicon hits per doc, per class
    st.lists(st.integers(0, 5), min_size=4, max_size=4),  # filler tokens per doc
    st.integers(0, 3),
)
def test_boost_monotonicity(lex_hits, filler, true_class):
    # one emotion token per class plus shared neutral filler
    lex_tok = ["kw_" + lab for lab in LABELS]
    corpus = []
    for c, lab in enumerate(LABELS):
        for d in range(2):
            corpus.append(([lex_tok[c]] * lex_hits[c] + list(FILLER_VOCABULARY[: filler[c] + d]), lab))
    doc = [lex_tok[true_class]] * 3
    masses = []
    for boost in (1.0, 1.5, 2.0, 4.0, 8.0):
        model = train_emotion_model(corpus, set(lex_tok), boost=boost)
        masses.append(classify_emotion(model, doc)[1][true_class])
    assert all(b >= a - 1e-12 for a, b in zip(masses, masses[1:]))


def test_histogram(toy_model):
    assert emotion_histogram(toy_model, []) == {"angry": 0, "funny": 0, "surprised": 0, "moving": 0}
    texts = ["rage unfair"] * 6 + ["lol joke"] * 4
    assert emotion_histogram(toy_model, texts) == {"angry": 6, "funny": 4, "surprised": 0, "moving": 0}


def test_histogram_matches_independent_tally():
    rng = random.Random(11)
    model = default_emotion_model()
    batch = [" ".join(rng.choices(TOY_VOCABULARY[rng.choice(LABELS)] + FILLER_VOCABULARY, k=8)) for _ in range(30)]
    tally = dict.fromkeys(LABELS, 0)
    for text in batch:
        tally[classify_emotion(model, text)[0]] += 1
    hist = emotion_histogram(model, batch)
    assert hist == tally and sum(hist.values()) == 30


def test_default_model_recognizes_toy_vocabulary():
    model = default_emotion_model()
    rng = random.Random(5)
    correct = total = 0
    for lab in LABELS:
        for _ in range(50):
            words = rng.choices(TOY_VOCABULARY[lab], k=3) + rng.choices(FILLER_VOCABULARY, k=6)
            correct += classify_emotion(model, words)[0] == lab
            total += 1
    assert correct / total >= 0.9


def test_model_json_roundtrip(toy_model, tmp_path):
    obj = json.loads(json.dumps(toy_model.to_json()))
    assert obj["lexicon_sha256"] == lexicon_hash(TOY_LEXICON)
    back = EmotionModel.from_json(obj)
    assert classify_emotion(back, "wow news") == classify_emotion(toy_model, "wow news")
    obj["lexicon_sha256"] = "0" * 64
    with pytest.raises(ValidationError):
        EmotionModel.from_json(obj)


def test_corpus_and_lexicon_files(tmp_path):
    corpus = tmp_path / "c.jsonl"
    corpus.write_text("".join(json.dumps({"text": t, "label": lab}) + "\n" for t, lab in TOY_DOCS))
    lex = tmp_path / "lex.txt"
    lex.write_text("# emotion words\nRage\nlol\n\nwow\ntears\n")
    assert read_corpus(corpus) == TOY_DOCS
    assert read_lexicon(lex) == TOY_LEXICON
    corpus.write_text('{"text": "x", "label": "sad"}\n')
    with pytest.raises(ValidationError, match="line 1"):
        read_corpus(corpus)
