"""Reference SFT and DPO objectives on a tabular conditional n-gram policy.

The policy generates y one token at a time.  At step t its context is
(x_t, y_{t-n+1..t-1}): the source token aligned with position t (or a
padding symbol once x is exhausted) plus the previous n-1 output tokens
(padded with a begin symbol).  Each context owns a row of logits over the
alphabet plus an end token; generation of y always finishes with the end
token.

Log-probabilities are linear in per-record count matrices
N[c, v] = #(context c emits token v), so for a record

    log pi(y | x) = sum(N * log_softmax(L))
    d/dL log pi   = N - n[:, None] * softmax(L),   n = N.sum(axis=1)

which gives exact gradients for both losses with a few array operations.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from scpt.errors import DivergenceDetected

MarginMode = Literal["as-written", "reference-normalized"]
DEFAULT_BETA = 0.5


@dataclass
class TokenPolicy:
    alphabet: str
    context_order: int = 2
    logits: np.ndarray = field(default=None, repr=False)  # (n_contexts, len(alphabet) + 1)

    def __post_init__(self) -> None:
        if len(set(self.alphabet)) != len(self.alphabet) or not self.alphabet:
            raise ValueError("alphabet must be non-empty with distinct symbols")
        if self.context_order < 1:
            raise ValueError("context_order must be >= 1")
        shape = (self.n_contexts, self.vocab_size)
        if self.logits is None:
            self.logits = np.zeros(shape)
        else:
            self.logits = np.array(self.logits, dtype=float)
            if self.logits.shape != shape:
                raise ValueError(f"logits shape {self.logits.shape} != {shape}")
        if not np.all(np.isfinite(self.logits)):
            raise ValueError("logits must be finite")
        self._index = {ch: i for i, ch in enumerate(self.alphabet)}

    # token ids: 0..k-1 alphabet, k = end (outputs) / pad-or-begin (contexts)
    @property
    def vocab_size(self) -> int:
        return len(self.alphabet) + 1

    @property
    def end(self) -> int:
        return len(self.alphabet)

    @property
    def n_contexts(self) -> int:
        return (len(self.alphabet) + 1) ** self.context_order

    def copy(self) -> "TokenPolicy":
        return TokenPolicy(self.alphabet, self.context_order, self.logits.copy())

    def encode(self, s: str) -> list[int]:
        try:
            return [self._index[ch] for ch in s]
        except KeyError as exc:
            raise ValueError(f"symbol {exc.args[0]!r} not in alphabet {self.alphabet!r}") from None

    def context(self, x: Sequence[int], y: Sequence[int], t: int) -> int:
        base = len(self.alphabet) + 1
        pad = len(self.alphabet)
        idx = x[t] if t < len(x) else pad
        for j in range(1, self.context_order):
            prev = y[t - j] if t - j >= 0 else pad
            idx = idx * base + prev
        return idx

    def counts(self, x: str, y: str) -> np.ndarray:
        """N[c, v]: how often context c emits token v while generating y then end."""
        return _counts(self.alphabet, self.context_order, x, y)

    def log_probs(self) -> np.ndarray:
        z = self.logits - self.logits.max(axis=1, keepdims=True)
        return z - np.log(np.exp(z).sum(axis=1, keepdims=True))

    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs())

    def sample(self, x: str, rng: np.random.Generator, max_len: int = 32) -> str:
        xs, ys = self.encode(x), []
        p = self.probs()
        while len(ys) < max_len:
            tok = int(rng.choice(self.vocab_size, p=p[self.context(xs, ys, len(ys))]))
            if tok == self.end:
                break
            ys.append(tok)
        return "".join(self.alphabet[t] for t in ys)


@functools.lru_cache(maxsize=65536)
def _counts(alphabet: str, order: int, x: str, y: str) -> np.ndarray:
    shape = TokenPolicy(alphabet, order)
    xs, ys = shape.encode(x), shape.encode(y)
    out = np.zeros((shape.n_contexts, shape.vocab_size))
    for t, tok in enumerate(ys + [shape.end]):
        out[shape.context(xs, ys, t), tok] += 1.0
    out.flags.writeable = False
    return out


def seq_logprob(policy: TokenPolicy, x: str, y: str) -> float:
    return float(np.sum(policy.counts(x, y) * policy.log_probs()))


# --- batches ----------------------------------------------------------------

@dataclass(frozen=True)
class PrefRecord:
    x: str
    y_w: str
    y_l: str

    def __post_init__(self) -> None:
        if self.y_w == self.y_l:
            raise ValueError("preferred and rejected sequences must differ")


@dataclass
class PrefBatch:
    records: list[PrefRecord]
    beta: float = DEFAULT_BETA

    def __post_init__(self) -> None:
        if not self.beta > 0:
            raise ValueError("beta must be > 0")


def _stack(policy: TokenPolicy, pairs: Iterable[tuple[str, str]]) -> np.ndarray:
    mats = [policy.counts(x, y) for x, y in pairs]
    if not mats:
        raise ValueError("empty batch")
    return np.stack(mats)


def _logp_and_grad(policy: TokenPolicy, counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-record log-probabilities (B,) and their gradients (B, C, V)."""
    logp = policy.log_probs()
    p = np.exp(logp)
    values = np.einsum("bcv,cv->b", counts, logp)
    grads = counts - counts.sum(axis=2, keepdims=True) * p[None, :, :]
    return values, grads


# --- SFT ----------------------------------------------------------------------

def sft_loss(policy: TokenPolicy, batch: Sequence[tuple[str, str]]) -> float:
    return sft_loss_and_grad(policy, batch)[0]


def sft_loss_and_grad(policy: TokenPolicy, batch: Sequence[tuple[str, str]]) -> tuple[float, np.ndarray]:
    counts = _stack(policy, batch)
    values, grads = _logp_and_grad(policy, counts)
    return float(-values.mean()), -grads.mean(axis=0)


# --- DPO ----------------------------------------------------------------------

def _margins(policy: TokenPolicy, batch: PrefBatch, mode: MarginMode, ref: TokenPolicy | None):
    cw = _stack(policy, [(r.x, r.y_w) for r in batch.records])
    cl = _stack(policy, [(r.x, r.y_l) for r in batch.records])
    vw, gw = _logp_and_grad(policy, cw)
    vl, gl = _logp_and_grad(policy, cl)
    margin = vw - vl
    if mode == "reference-normalized":
        if ref is None:
            raise ValueError("reference-normalized margin needs a reference policy")
        rw, _ = _logp_and_grad(ref, cw)
        rl, _ = _logp_and_grad(ref, cl)
        margin = margin - (rw - rl)
    elif mode != "as-written":
        raise ValueError(f"unknown margin mode {mode!r}")
    return margin, gw - gl


def dpo_margin(policy: TokenPolicy, x: str, y_w: str, y_l: str, mode: MarginMode = "reference-normalized",
               ref_policy: TokenPolicy | None = None) -> float:
    assert y_w != y_l, "preferred and rejected sequences must differ"
    margin, _ = _margins(policy, PrefBatch([PrefRecord(x, y_w, y_l)]), mode, ref_policy)
    return float(margin[0])


def _log_sigmoid(z: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -z)


def dpo_loss_and_grad(policy: TokenPolicy, batch: PrefBatch, mode: MarginMode = "reference-normalized",
                      ref_policy: TokenPolicy | None = None) -> tuple[float, np.ndarray, np.ndarray]:
    """(mean -log sigmoid(beta * margin), gradient wrt logits, per-record margins)."""
    margin, dmargin = _margins(policy, batch, mode, ref_policy)
    z = batch.beta * margin
    loss = float(-_log_sigmoid(z).mean())
    weight = -batch.beta * np.exp(_log_sigmoid(-z))  # d/dm of -log sigmoid(beta m)
    grad = np.einsum("b,bcv->cv", weight, dmargin) / len(batch.records)
    return loss, grad, margin


def dpo_loss(policy: TokenPolicy, batch: PrefBatch, mode: MarginMode = "reference-normalized",
             ref_policy: TokenPolicy | None = None) -> float:
    return dpo_loss_and_grad(policy, batch, mode, ref_policy)[0]


# --- training -----------------------------------------------------------------

@dataclass
class HistoryRow:
    step: int
    stage: str
    loss: float
    mean_margin: float | None


@dataclass
class TrainResult:
    policy: TokenPolicy
    reference: TokenPolicy
    history: list[HistoryRow]


def train(policy: TokenPolicy, sft_batch: Sequence[tuple[str, str]], pref_batch: PrefBatch, steps: int,
          lr: float, beta: float | None = None, mode: MarginMode = "reference-normalized", seed: int = 0,
          sft_steps: int = 0, sft_lr: float | None = None, init_noise: float = 0.0) -> TrainResult:
    """Full-batch gradient descent: ``sft_steps`` of SFT, then ``steps`` of DPO.

    The SFT stage uses ``sft_lr`` (default ``lr``).
    The DPO reference is a frozen copy of the policy after the SFT stage.
    ``seed`` drives the optional Gaussian ``init_noise`` on the starting
    logits; with the default of no noise the run is fully deterministic and
    independent of the seed.  History rows log the loss before each update
    and one final row after the last one.
    """
    if steps < 0 or sft_steps < 0:
        raise ValueError("step counts must be >= 0")
    if beta is not None:
        pref_batch = PrefBatch(pref_batch.records, beta)
    current = policy.copy()
    if init_noise:
        current.logits += np.random.default_rng(seed).normal(0.0, init_noise, current.logits.shape)
    history: list[HistoryRow] = []

    for step in range(sft_steps):
        loss, grad = sft_loss_and_grad(current, sft_batch)
        _check(loss, step)
        history.append(HistoryRow(step, "sft", loss, None))
        current.logits -= (lr if sft_lr is None else sft_lr) * grad
        _check_logits(current, step)

    reference = current.copy()
    for step in range(steps):
        loss, grad, margin = dpo_loss_and_grad(current, pref_batch, mode, reference)
        _check(loss, step)
        history.append(HistoryRow(step, "dpo", loss, float(margin.mean())))
        current.logits -= lr * grad
        _check_logits(current, step)
    if steps:
        loss, _, margin = dpo_loss_and_grad(current, pref_batch, mode, reference)
        _check(loss, steps)
        history.append(HistoryRow(steps, "dpo", loss, float(margin.mean())))
    return TrainResult(current, reference, history)


def _check(loss: float, step: int) -> None:
    if not math.isfinite(loss):
        raise DivergenceDetected(f"loss became {loss} at step {step}")


def _check_logits(policy: TokenPolicy, step: int) -> None:
    if not np.all(np.isfinite(policy.logits)):
        raise DivergenceDetected(f"logits became non-finite after step {step}")


def mean_margin(policy: TokenPolicy, batch: PrefBatch, mode: MarginMode = "reference-normalized",
                ref_policy: TokenPolicy | None = None) -> float:
    margin, _ = _margins(policy, batch, mode, ref_policy)
    return float(margin.mean())


def margins(policy: TokenPolicy, batch: PrefBatch, mode: MarginMode = "reference-normalized",
            ref_policy: TokenPolicy | None = None) -> np.ndarray:
    return _margins(policy, batch, mode, ref_policy)[0]


def frontier(policy: TokenPolicy, records: Sequence[PrefRecord], lrs: Sequence[float], betas: Sequence[float],
             steps: int = 200, mode: MarginMode = "as-written", sft_steps: int = 500,
             sft_lr: float = 0.1) -> dict[tuple[float, float], float]:
    """Final mean training margin for every (lr, beta) after a shared SFT warm start."""
    sft_batch = [(r.x, r.y_w) for r in records]
    warm = train(policy, sft_batch, PrefBatch(list(records)), 0, sft_lr, sft_steps=sft_steps).policy
    out = {}
    for lr in lrs:
        for beta in betas:
            res = train(warm, [], PrefBatch(list(records), beta), steps, lr, mode=mode)
            out[(lr, beta)] = res.history[-1].mean_margin if res.history else mean_margin(
                res.policy, PrefBatch(list(records), beta), mode, res.reference)
    return out


# --- checking helpers -----------------------------------------------------------

def finite_difference(fn, logits: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central differences of a scalar function of the logits table."""
    grad = np.zeros_like(logits)
    work = logits.copy()
    for idx in itertools.product(*(range(s) for s in logits.shape)):
        old = work[idx]
        work[idx] = old + step
        up = fn(work)
        work[idx] = old - step
        down = fn(work)
        work[idx] = old
        grad[idx] = (up - down) / (2 * step)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    return 0.0 if scale == 0 else float(np.linalg.norm(a - b) / scale)


def enumerate_sequences(alphabet: str, max_len: int) -> Iterable[str]:
    for n in range(max_len + 1):
        for tup in itertools.product(alphabet, repeat=n):
            yield "".join(tup)


# --- toy data files -------------------------------------------------------------

def load_preferences(path: str | Path) -> list[PrefRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append(PrefRecord(rec["x"], rec["y_w"], rec["y_l"]))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: bad preference record ({exc})") from exc
    return out


def write_history(history: Sequence[HistoryRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step\tstage\tloss\tmean_margin\n")
        for h in history:
            mm = "" if h.mean_margin is None else repr(h.mean_margin)
            fh.write(f"{h.step}\t{h.stage}\t{h.loss!r}\t{mm}\n")
