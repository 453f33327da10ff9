from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import DATA
from scpt.align_ref import (
    DEFAULT_BETA,
    PrefBatch,
    PrefRecord,
    TokenPolicy,
    dpo_loss,
    dpo_loss_and_grad,
    dpo_margin,
    enumerate_sequences,
    finite_difference,
    load_preferences,
    margins,
    relative_error,
    seq_logprob,
    sft_loss,
    sft_loss_and_grad,
    train,
    write_history,
)
from scpt.errors import DivergenceDetected

LN2 = math.log(2.0)


def random_policy(rng, alphabet="abc", order=2, scale=1.0):
    p = TokenPolicy(alphabet, order)
    p.logits = rng.normal(0.0, scale, p.logits.shape)
    return p


def random_word(rng, alphabet, lo=0, hi=4):
    return "".join(rng.choice(list(alphabet), size=int(rng.integers(lo, hi + 1))))


def random_records(rng, alphabet, n=5):
    out = []
    while len(out) < n:
        x, w, l = (random_word(rng, alphabet) for _ in range(3))
        if w != l:
            out.append(PrefRecord(x, w, l))
    return out


# --- sequence log-probabilities ---------------------------------------------------------

def test_uniform_three_tokens():
    p = TokenPolicy("abc")
    assert p.vocab_size == 4
    assert seq_logprob(p, "ab", "ca") == pytest.approx(3 * math.log(0.25), abs=1e-12)
    assert seq_logprob(p, "ab", "ca") == pytest.approx(-4.1589, abs=1e-4)


def test_saturated_policy_near_zero():
    p = TokenPolicy("abc")
    p.logits = 20.0 * (p.counts("", "ab") > 0)
    assert -1e-3 <= seq_logprob(p, "", "ab") <= 0.0


def test_rows_normalized():
    p = random_policy(np.random.default_rng(0), scale=5.0)
    assert np.allclose(p.probs().sum(axis=1), 1.0, atol=1e-12, rtol=0)


def test_enumeration_sums_to_one():
    # order 4: context = (x_t, y_{t-1}, y_{t-2}, y_{t-3}); once three real
    # output tokens have been emitted the policy is forced to stop, so all
    # mass lies on sequences of length <= 3
    rng = np.random.default_rng(1)
    p = random_policy(rng, "ab", order=4)
    base, pad = 3, 2
    for c in range(p.n_contexts):
        prev = [(c // base**k) % base for k in range(3)]
        if pad not in prev:
            p.logits[c] = -60.0
            p.logits[c, p.end] = 60.0
    for x in ("", "a", "ba", "abba"):
        total = math.fsum(math.exp(seq_logprob(p, x, y)) for y in enumerate_sequences("ab", 3))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_unknown_symbol():
    with pytest.raises(ValueError):
        TokenPolicy("ab").encode("abc")


# --- SFT ---------------------------------------------------------------------------------

def test_sft_uniform_examples():
    p = TokenPolicy("abc")
    assert sft_loss(p, [("ab", "ca")]) == pytest.approx(4.1589, abs=1e-4)
    assert sft_loss(p, [("ab", "")]) == pytest.approx(math.log(4), abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_sft_gradient_matches_fd(seed):
    rng = np.random.default_rng(seed)
    p = random_policy(rng)
    batch = [(r.x, r.y_w) for r in random_records(rng, "abc")]
    _, grad = sft_loss_and_grad(p, batch)
    fd = finite_difference(lambda L: sft_loss(TokenPolicy("abc", 2, L), batch), p.logits)
    assert relative_error(grad, fd) < 1e-6


# --- DPO ---------------------------------------------------------------------------------

def test_margin_uniform_equal_length_zero():
    assert dpo_margin(TokenPolicy("abc"), "a", "ab", "ba", mode="as-written") == 0.0


def test_margin_reference_equal_policy_zero():
    rng = np.random.default_rng(2)
    p = random_policy(rng)
    for r in random_records(rng, "abc", 10):
        assert dpo_margin(p, r.x, r.y_w, r.y_l, ref_policy=p.copy()) == pytest.approx(0.0, abs=1e-12)


def test_margin_requires_distinct_sequences():
    with pytest.raises(AssertionError):
        dpo_margin(TokenPolicy("ab"), "", "a", "a", mode="as-written")
    with pytest.raises(ValueError):
        PrefRecord("", "a", "a")


def test_zero_margin_loss_is_ln2():
    p = TokenPolicy("abc")
    batch = PrefBatch([PrefRecord("a", "ab", "ba"), PrefRecord("", "c", "a")])
    assert abs(dpo_loss(p, batch, mode="as-written") - LN2) <= 1e-12
    assert abs(dpo_loss(p, batch, ref_policy=p.copy()) - LN2) <= 1e-12


def test_closed_form_margin_two():
    p = TokenPolicy("ab", context_order=1)
    p.logits[p.end, 0] = 2.0  # context: x exhausted
    batch = PrefBatch([PrefRecord("", "a", "b")], beta=0.5)
    assert dpo_margin(p, "", "a", "b", mode="as-written") == pytest.approx(2.0, abs=1e-12)
    assert dpo_loss(p, batch, mode="as-written") == pytest.approx(-math.log(1 / (1 + math.exp(-1))), abs=1e-12)
    assert dpo_loss(p, batch, mode="as-written") == pytest.approx(0.3133, abs=1e-4)


@pytest.mark.parametrize("mode", ["as-written", "reference-normalized"])
@pytest.mark.parametrize("seed", range(8))
def test_dpo_gradient_matches_fd(seed, mode):
    rng = np.random.default_rng(100 + seed)
    p = random_policy(rng)
    ref = random_policy(rng)
    batch = PrefBatch(random_records(rng, "abc"), beta=float(rng.uniform(0.05, 2.0)))
    _, grad, _ = dpo_loss_and_grad(p, batch, mode, ref)
    fd = finite_difference(lambda L: dpo_loss(TokenPolicy("abc", 2, L), batch, mode, ref), p.logits)
    assert relative_error(grad, fd) < 1e-6


def test_dpo_shift_invariance():
    rng = np.random.default_rng(3)
    p = random_policy(rng)
    batch = PrefBatch(random_records(rng, "abc", 6))
    shifted = p.copy()
    shifted.logits += rng.normal(0, 10, (p.n_contexts, 1))
    for mode in ("as-written", "reference-normalized"):
        assert dpo_loss(shifted, batch, mode, p) == pytest.approx(dpo_loss(p, batch, mode, p), abs=1e-10)


def test_as_written_antisymmetry():
    rng = np.random.default_rng(4)
    p = random_policy(rng)
    for r in random_records(rng, "abc", 10):
        a = dpo_margin(p, r.x, r.y_w, r.y_l, mode="as-written")
        b = dpo_margin(p, r.x, r.y_l, r.y_w, mode="as-written")
        assert a == pytest.approx(-b, abs=1e-12)


def test_reference_mode_needs_reference():
    with pytest.raises(ValueError):
        dpo_loss(TokenPolicy("ab"), PrefBatch([PrefRecord("", "a", "b")]))


def test_beta_validation():
    assert DEFAULT_BETA == 0.5
    with pytest.raises(ValueError):
        PrefBatch([], beta=0.0)


# --- training -----------------------------------------------------------------------------

@pytest.fixture(scope="module")
def toy():
    train_recs = load_preferences(DATA / "toy_prefs.jsonl")
    held = load_preferences(DATA / "toy_prefs_heldout.jsonl")
    return train_recs, held


def test_toy_files(toy):
    train_recs, held = toy
    assert len(train_recs) == 50 and len(held) == 40


def test_zero_steps_unchanged():
    rng = np.random.default_rng(5)
    p = random_policy(rng)
    res = train(p, [], PrefBatch(random_records(rng, "abc")), 0, 0.1)
    assert np.array_equal(res.policy.logits, p.logits) and res.history == []


def test_margin_increases_and_rows_stay_normalized(toy):
    train_recs, _ = toy
    p = TokenPolicy("abcdefgh")
    batch = PrefBatch(train_recs, 0.5)
    res = train(p, [], batch, 20, 0.1)
    first, last = res.history[0], res.history[-1]
    assert first.mean_margin == pytest.approx(0.0, abs=1e-12)
    assert last.mean_margin > first.mean_margin
    assert np.allclose(res.policy.probs().sum(axis=1), 1.0, atol=1e-12, rtol=0)
    losses = [h.loss for h in res.history]
    assert losses == sorted(losses, reverse=True)


def test_training_deterministic(toy):
    train_recs, _ = toy
    batch = PrefBatch(train_recs)
    sft = [(r.x, r.y_w) for r in train_recs]
    a = train(TokenPolicy("abcdefgh"), sft, batch, 5, 0.1, sft_steps=5, seed=3, init_noise=0.1)
    b = train(TokenPolicy("abcdefgh"), sft, batch, 5, 0.1, sft_steps=5, seed=3, init_noise=0.1)
    assert np.array_equal(a.policy.logits, b.policy.logits)
    assert [h.stage for h in a.history] == ["sft"] * 5 + ["dpo"] * 6


def test_divergence_detected():
    p = TokenPolicy("ab")
    with pytest.raises(DivergenceDetected):
        with np.errstate(all="ignore"):
            train(p, [("a", "ab")], PrefBatch([PrefRecord("", "a", "b")]), 0, math.inf, sft_steps=3)


def test_heldout_margins_positive(toy):
    train_recs, held = toy
    res = train(TokenPolicy("abcdefgh"), [], PrefBatch(train_recs, 0.5), 200, 0.1)
    m = margins(res.policy, PrefBatch(held), ref_policy=res.reference)
    assert (m > 0).mean() >= 0.95


def test_history_file(tmp_path):
    rng = np.random.default_rng(6)
    res = train(random_policy(rng), [], PrefBatch(random_records(rng, "abc")), 3, 0.1)
    path = tmp_path / "h.tsv"
    write_history(res.history, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "step\tstage\tloss\tmean_margin" and len(lines) == 5


def test_bad_preference_file(tmp_path):
    path = tmp_path / "p.jsonl"
    path.write_text('{"x": "a", "y_w": "b"}\n')
    with pytest.raises(ValueError, match=":1:"):
        load_preferences(path)
