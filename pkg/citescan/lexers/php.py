"""
PHP comment scanner.
Text outside <?php ... ?> is inline HTML and never yields comments.
Heredoc and nowdoc bodies are skipped like strings.
"""

import re

from .base import CommentScanner, Grammar

OPEN_TAGS = ('<?php', '<?=', '<?')
CLOSE_TAG = '?>'
HEREDOC = re.compile(r'<<<[ \t]*(["\']?)([A-Za-z_][A-Za-z0-9_]*)\1\r?\n')


class PhpScanner(CommentScanner):
    grammar = Grammar(
        line_markers=('//', '#'),
        block_delimiters=(('/*', '*/'),),
        quotes=('"', "'", '`'),
        multiline_quotes=frozenset({'"', "'", '`'}),
    )
    extra_triggers = (r'<\?', r'\?>', r'<<<')

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.in_php = False

    def step(self) -> bool:
        if not self.in_php:
            for tag in OPEN_TAGS:
                if self.content.startswith(tag, self.pos):
                    self.in_php = True
                    self.pos += len(tag)
                    return True
            return False

        if self.content.startswith(CLOSE_TAG, self.pos):
            self.in_php = False
            self.pos += len(CLOSE_TAG)
            return True
        return self.scan_heredoc() or super().step()

    def scan_heredoc(self) -> bool:
        match = HEREDOC.match(self.content, self.pos)
        if match is None:
            return False
        terminator = re.compile(r'[ \t]*' + re.escape(match.group(2)) + r'\b', re.MULTILINE)
        i = match.end()
        while i < self.length:
            line_end = self.content.find('\n', i)
            line_end = self.length if line_end == -1 else line_end
            closing = terminator.match(self.content, i, line_end)
            if closing:
                self.pos = closing.end()
                return True
            i = line_end + 1
        self.pos = self.length
        return True

    def line_comment_end(self, start: int) -> int:
        # ?> ends a line comment and leaves PHP mode
        end = super().line_comment_end(start)
        close = self.content.find(CLOSE_TAG, start, end)
        return end if close == -1 else close
