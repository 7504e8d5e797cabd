"""
Averaged-perceptron BIO tagger over comment tokens.
Weights and the update rule come from nltk's AveragedPerceptron; this module
supplies the citation feature templates, greedy decoding, seeded training and
a versioned JSON model format.
"""

import hashlib
import json
import logging
import random
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from nltk.tag.perceptron import AveragedPerceptron

from ..errors import DegenerateCorpus, EmptyCorpus, UnsupportedModelVersion
from ..models import AnnotatedComment, EntitySpan
from .bio import OUTSIDE, align_spans, all_labels, bio_to_spans
from .lexicons import Lexicons, default_lexicons
from .rules import is_initial, is_surname, is_year, rule_tag
from .tokens import Token, tokenize

logger = logging.getLogger(__name__)

MODEL_FORMAT = 'citescan-tagger'
MODEL_VERSION = 1
START = ('-START-', '-START2-')
END = ('-END-', '-END2-')


def word_shape(word: str) -> str:
    """Collapsed character classes, e.g. 'Vol.' -> 'Xx.'"""
    shape = re.sub('[A-Z]', 'X', word)
    shape = re.sub('[^\\W\\d_A-Z]', 'x', shape)  # lowercase letters, any script
    shape = re.sub('[0-9]', 'd', shape)
    return re.sub(r'(.)\1+', r'\1', shape)


def case_pattern(word: str) -> str:
    if word.isupper():
        return 'upper'
    if word.istitle():
        return 'title'
    if word.islower():
        return 'lower'
    if any(ch.isalpha() for ch in word):
        return 'mixed'
    return 'none'


def digit_pattern(word: str) -> str:
    if is_year(word):
        return 'year'
    if word.isdigit():
        return f'digits{min(len(word), 5)}'
    if re.fullmatch(r'\d+-{1,2}\d+', word):
        return 'range'
    if any(ch.isdigit() for ch in word):
        return 'has-digit'
    return 'no-digit'


def token_features(tokens: Sequence[Token], rule_labels: Sequence[str], lexicons: Lexicons) -> List[List[str]]:
    """Label-independent features of every token"""
    words = [tok.text for tok in tokens]
    lowered = [w.casefold() for w in words]
    padded = list(START) + lowered + list(END)
    shapes = [word_shape(w) for w in words]
    padded_shapes = list(START) + shapes + list(END)

    features = []
    for i, word in enumerate(words):
        low = lowered[i]
        p = i + 2
        feats = [
            'bias',
            f'w={low}',
            f'p3={low[:3]}',
            f'p4={low[:4]}',
            f's3={low[-3:]}',
            f's4={low[-4:]}',
            f'shape={shapes[i]}',
            f'case={case_pattern(word)}',
            f'digits={digit_pattern(word)}',
            f'rule={rule_labels[i]}',
            f'w-1={padded[p - 1]}',
            f'w-2={padded[p - 2]}',
            f'w+1={padded[p + 1]}',
            f'w+2={padded[p + 2]}',
            f'shape-1={padded_shapes[p - 1]}',
            f'shape+1={padded_shapes[p + 1]}',
            f'rule-1={rule_labels[i - 1] if i > 0 else "START"}',
            f'rule+1={rule_labels[i + 1] if i + 1 < len(words) else "END"}',
        ]
        if low in lexicons.venues:
            feats.append('lex=venue')
        if low in lexicons.months:
            feats.append('lex=month')
        if low in lexicons.publishers:
            feats.append('lex=publisher')
        if low in lexicons.places:
            feats.append('lex=place')
        if is_surname(word):
            feats.append('surname-like')
        if is_initial(word):
            feats.append('initial-like')
        features.append(feats)
    return features


def with_history(static: List[str], prev: str, prev2: str, word: str) -> Dict[str, int]:
    feats = dict.fromkeys(static, 1)
    feats[f'prev={prev}'] = 1
    feats[f'prev2={prev2}'] = 1
    feats[f'prev+prev2={prev}|{prev2}'] = 1
    feats[f'prev+w={prev}|{word.casefold()}'] = 1
    return feats


def _label_of(prediction) -> str:
    return prediction[0] if isinstance(prediction, tuple) else prediction


def rule_token_labels(tokens: Sequence[Token], rule_spans: Sequence[EntitySpan]) -> List[str]:
    labels = [OUTSIDE] * len(tokens)
    for span in rule_spans:
        first = True
        for i, tok in enumerate(tokens):
            if tok.start >= span.start and tok.end <= span.end:
                labels[i] = f'{"B" if first else "I"}-{span.etype.value}'
                first = False
    return labels


def corpus_hash(corpus: Sequence[AnnotatedComment]) -> str:
    canonical = [[c.text, [[s.start, s.end, s.etype.value] for s in sorted(c.gold, key=lambda s: s.start)]]
                 for c in corpus]
    return hashlib.sha256(json.dumps(canonical, ensure_ascii=False).encode('utf-8')).hexdigest()


class TaggerModel:
    """A trained tagger; treated as immutable once built"""

    def __init__(self, perceptron: AveragedPerceptron, labels: Sequence[str], metadata: Dict,
                 lexicons: Optional[Lexicons] = None):
        self.perceptron = perceptron
        self.perceptron.classes = set(labels)
        self.labels = sorted(labels)
        self.metadata = dict(metadata)
        self._lexicons = lexicons

    @property
    def lexicons(self) -> Lexicons:
        if self._lexicons is None:
            self._lexicons = default_lexicons()
        return self._lexicons

    def predict_labels(self, tokens: Sequence[Token], static: List[List[str]]) -> List[str]:
        prev, prev2 = START
        labels = []
        for token, feats in zip(tokens, static):
            label = _label_of(self.perceptron.predict(with_history(feats, prev, prev2, token.text)))
            labels.append(label)
            prev2, prev = prev, label
        return labels

    def tag(self, text: str, rule_spans: Optional[List[EntitySpan]] = None) -> List[EntitySpan]:
        tokens = tokenize(text)
        if not tokens:
            return []
        if rule_spans is None:
            rule_spans = rule_tag(text, self.lexicons)
        static = token_features(tokens, rule_token_labels(tokens, rule_spans), self.lexicons)
        return bio_to_spans(tokens, self.predict_labels(tokens, static), source='model')

    # Persistence
    def to_json(self) -> str:
        return json.dumps({
            'format': MODEL_FORMAT,
            'version': MODEL_VERSION,
            'labels': self.labels,
            'weights': self.perceptron.weights,
            'metadata': self.metadata,
        }, ensure_ascii=False, sort_keys=True)

    def save(self, path: Path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(self.to_json())
        logger.info(f"Saved tagger model to {path}")

    @classmethod
    def from_json(cls, data: str, lexicons: Optional[Lexicons] = None) -> 'TaggerModel':
        payload = json.loads(data)
        if payload.get('format') != MODEL_FORMAT or payload.get('version') != MODEL_VERSION:
            raise UnsupportedModelVersion(
                f"unsupported model format {payload.get('format')!r} version {payload.get('version')!r}")
        return cls(AveragedPerceptron(payload['weights']), payload['labels'], payload['metadata'], lexicons)

    @classmethod
    def load(cls, path: Path, lexicons: Optional[Lexicons] = None) -> 'TaggerModel':
        with open(path, 'r', encoding='utf-8') as f:
            model = cls.from_json(f.read(), lexicons)
        logger.info(f"Loaded tagger model from {path}")
        return model


def train(corpus: Sequence[AnnotatedComment], epochs: int = 5, seed: int = 42,
          lexicons: Optional[Lexicons] = None) -> TaggerModel:
    """Train a BIO tagger with seeded shuffling; deterministic for fixed inputs"""
    if not corpus:
        raise EmptyCorpus("cannot train on an empty corpus")
    lexicons = lexicons or default_lexicons()

    examples = []
    for comment in corpus:
        tokens = tokenize(comment.text)
        if not tokens:
            continue
        gold = align_spans(comment.text, tokens, comment.gold)
        rules = rule_token_labels(tokens, rule_tag(comment.text, lexicons))
        examples.append((tokens, gold, token_features(tokens, rules, lexicons)))

    if all(label == OUTSIDE for _, gold, _ in examples for label in gold):
        raise DegenerateCorpus("every token in the training corpus is labelled O")

    labels = all_labels()
    perceptron = AveragedPerceptron()
    perceptron.classes = set(labels)
    rng = random.Random(seed)

    for epoch in range(epochs):
        rng.shuffle(examples)
        correct = total = 0
        for tokens, gold, static in examples:
            prev, prev2 = START
            for token, truth, feats in zip(tokens, gold, static):
                features = with_history(feats, prev, prev2, token.text)
                guess = _label_of(perceptron.predict(features))
                perceptron.update(truth, guess, features)
                prev2, prev = prev, guess
                correct += guess == truth
                total += 1
        logger.info(f"Epoch {epoch + 1}/{epochs}: token accuracy {correct / max(total, 1):.3f}")

    perceptron.average_weights()
    metadata = {'epochs': epochs, 'seed': seed, 'corpus_sha256': corpus_hash(corpus), 'comments': len(corpus)}
    return TaggerModel(perceptron, labels, metadata, lexicons)


def tag(model: TaggerModel, text: str) -> List[EntitySpan]:
    return model.tag(text)
