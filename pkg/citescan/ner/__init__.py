from .bio import align_spans, all_labels, bio_to_spans
from .lexicons import Lexicons, default_lexicons, load_lexicons
from .perceptron import TaggerModel, tag, train
from .rules import rule_tag
from .spans import merge_spans, recognize, recognize_all
from .tokens import Token, tokenize

__all__ = [
    'Lexicons', 'TaggerModel', 'Token',
    'align_spans', 'all_labels', 'bio_to_spans', 'default_lexicons', 'load_lexicons',
    'merge_spans', 'recognize', 'recognize_all', 'rule_tag', 'tag', 'tokenize', 'train',
]
