"""Model references and the backends they resolve to.

A model reference is "<scheme>:<key>=<value>,...". Two schemes exist:

- "stub:" is a deterministic fake for wiring tests and dry runs. It
  tokenizes on alphanumeric runs, splits words of six or more characters in
  half the way subword tokenizers do, and hashes (seed, offsets, surface)
  into a keep/drop decision and a probability on the 1/16 grid. Same
  reference plus same text always gives the same predictions.
- "hf:" loads a Hugging Face token-classification checkpoint. Lazy: the
  transformers import happens only when such a reference is resolved.
"""

from __future__ import annotations

import hashlib
from typing import Protocol

from .tracks import TokenPrediction


class ModelError(RuntimeError):
    """A model reference cannot be resolved or its backend failed to load."""


class TokenModel(Protocol):
    def predict(self, text: str) -> list[TokenPrediction]: ...

    def predict_many(self, texts: list[str]) -> list[list[TokenPrediction]]: ...


def _parse_params(spec: str, allowed: dict[str, type]) -> dict:
    params = {}
    for part in filter(None, spec.split(",")):
        key, sep, value = part.partition("=")
        if not sep or key not in allowed:
            raise ModelError(
                f"bad model parameter {part!r}; expected "
                + ", ".join(f"{k}=<{t.__name__}>" for k, t in allowed.items())
            )
        try:
            params[key] = allowed[key](value)
        except ValueError:
            raise ModelError(f"bad model parameter {part!r}: not a {allowed[key].__name__}") from None
    return params


def _word_tokens(text: str) -> list[tuple[int, int]]:
    tokens = []
    start = None
    for i, ch in enumerate(text):
        if ch.isalnum():
            if start is None:
                start = i
        elif start is not None:
            tokens.append((start, i))
            start = None
    if start is not None:
        tokens.append((start, len(text)))
    # long words split in two, like a subword vocabulary would
    split = []
    for start, end in tokens:
        if end - start >= 6:
            mid = start + (end - start) // 2
            split.append((start, mid))
            split.append((mid, end))
        else:
            split.append((start, end))
    return split


class StubModel:
    """Deterministic pseudo-model: hash-driven token probabilities.

    rate is the fraction of tokens that receive a nonzero probability;
    probabilities land on the 1/16 grid so serialized files are byte-stable
    everywhere.
    """

    def __init__(self, seed: int = 0, rate: float = 0.5) -> None:
        if not 0.0 <= rate <= 1.0:
            raise ModelError(f"stub rate must be in [0, 1], got {rate}")
        self.seed = seed
        self.rate = rate

    def predict(self, text: str) -> list[TokenPrediction]:
        out = []
        for start, end in _word_tokens(text):
            digest = hashlib.sha256(
                f"{self.seed}|{start}|{end}|{text[start:end]}".encode()
            ).digest()
            keep = int.from_bytes(digest[:8], "big") / 2**64 < self.rate
            prob = (1 + digest[8] % 16) / 16 if keep else 0.0
            out.append(TokenPrediction(start, end, prob))
        return out

    def predict_many(self, texts: list[str]) -> list[list[TokenPrediction]]:
        return [self.predict(text) for text in texts]


def inside_probability(label_probs: dict[str, float]) -> float:
    """Probability that a token is inside a mention: one minus the outside
    label's mass. The outside label is 'O' under every BIO-style scheme."""
    outside = [name for name in label_probs if name.upper() == "O"]
    if not outside:
        raise ModelError(
            f"cannot identify the outside label among {sorted(label_probs)}"
        )
    return min(1.0, max(0.0, 1.0 - sum(label_probs[name] for name in outside)))


def tokens_from_offsets(
    offsets: list[tuple[int, int]], inside: list[float]
) -> list[TokenPrediction]:
    """Pair tokenizer offsets with inside probabilities, dropping the
    zero-width entries fast tokenizers emit for special tokens."""
    if len(offsets) != len(inside):
        raise ModelError(
            f"{len(offsets)} token offsets but {len(inside)} probabilities"
        )
    return [
        TokenPrediction(int(start), int(end), float(prob))
        for (start, end), prob in zip(offsets, inside)
        if end > start
    ]


class HFTokenClassifier:
    """Token-classification checkpoint behind the TokenModel interface."""

    def __init__(self, name: str, batch_size: int = 16) -> None:
        if batch_size < 1:
            raise ModelError(f"batch size must be >= 1, got {batch_size}")
        try:
            from transformers import AutoModelForTokenClassification, AutoTokenizer
        except ImportError:
            raise ModelError(
                "hf: references need the transformers package; install the [hf] extra"
            ) from None
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(name, use_fast=True)
            self._model = AutoModelForTokenClassification.from_pretrained(name)
        except Exception as exc:
            raise ModelError(f"could not load model {name!r}: {exc}") from exc
        self._model.eval()
        self.batch_size = batch_size

    def predict(self, text: str) -> list[TokenPrediction]:
        return self.predict_many([text])[0]

    def predict_many(self, texts: list[str]) -> list[list[TokenPrediction]]:
        import torch

        id2label = self._model.config.id2label
        out: list[list[TokenPrediction]] = []
        for lo in range(0, len(texts), self.batch_size):
            batch = texts[lo : lo + self.batch_size]
            encoded = self._tokenizer(
                batch,
                return_offsets_mapping=True,
                truncation=True,
                padding=True,
                return_tensors="pt",
            )
            offsets = encoded.pop("offset_mapping")
            with torch.no_grad():
                logits = self._model(**encoded).logits
            probs = torch.softmax(logits, dim=-1)
            for row in range(len(batch)):
                label_rows = [
                    {id2label[i]: float(p) for i, p in enumerate(token_probs)}
                    for token_probs in probs[row]
                ]
                inside = [inside_probability(lp) for lp in label_rows]
                pairs = [(int(s), int(e)) for s, e in offsets[row].tolist()]
                out.append(tokens_from_offsets(pairs, inside))
        return out


def load_model(reference: str, batch_size: int = 16) -> TokenModel:
    scheme, sep, spec = reference.partition(":")
    if not sep:
        raise ModelError(
            f"model reference {reference!r} has no scheme; use stub:... or hf:..."
        )
    if scheme == "stub":
        params = _parse_params(spec, {"seed": int, "rate": float})
        return StubModel(**params)
    if scheme == "hf":
        if not spec:
            raise ModelError("hf: reference needs a model name, like hf:some/checkpoint")
        return HFTokenClassifier(spec, batch_size=batch_size)
    raise ModelError(f"unknown model scheme {scheme!r}; known schemes: stub, hf")
