import json
import re
from dataclasses import dataclass

NAME = "name"
INT = "int"
FLOAT = "float"
STRING = "string"
PARAM = "param"
OP = "op"
EOF = "eof"

# Longest operators first.
OPERATORS = [
    "..",
    "==",
    "!=",
    "<=",
    ">=",
    "<-",
    "->",
    "<",
    ">",
    "=",
    "+",
    "-",
    "*",
    "/",
    "%",
    "(",
    ")",
    "[",
    "]",
    "{",
    "}",
    ",",
    ".",
]

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
PARAM_RE = re.compile(r"\$[A-Za-z_][A-Za-z0-9_']*")
# "1..4" must lex as INT ".." INT, so a fraction needs a digit after the dot.
NUMBER_RE = re.compile(r"[0-9]+(?:(\.[0-9]+)?([eE][+-]?[0-9]+)|(\.[0-9]+))?")
STRING_RE = re.compile(r'"(?:[^"\\\n]|\\.)*"')


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    length: int = 1
    offset: int = 0

    def __str__(self):
        return "line %d, column %d" % (self.line, self.column)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    message: str
    span: Span

    @property
    def is_error(self):
        return self.severity == "error"

    def __str__(self):
        return "%s at %s: %s" % (self.severity, self.span, self.message)


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    span: Span

    def is_op(self, *ops):
        return self.kind == OP and self.value in ops

    def is_word(self, *words):
        return self.kind == NAME and self.value in words

    def __str__(self):
        if self.kind == EOF:
            return "end of input"
        if self.kind == STRING:
            return json.dumps(self.value)
        return "'%s'" % (self.value,)


def tokenize(source):
    """
    Split `source` into tokens. Returns (tokens, diagnostics); the token list
    always ends with an EOF token. Unknown characters are reported and
    skipped so parsing can go on.
    """
    tokens = []
    diagnostics = []
    line = 1
    line_start = 0
    pos = 0
    length = len(source)

    def span_at(start, size):
        return Span(line, start - line_start + 1, max(size, 1), start)

    while pos < length:
        c = source[pos]
        if c == "\n":
            line += 1
            pos += 1
            line_start = pos
            continue
        if c.isspace():
            pos += 1
            continue
        if c == "#":
            end = source.find("\n", pos)
            pos = length if end == -1 else end
            continue
        if c == '"':
            match = STRING_RE.match(source, pos)
            if match is None:
                end = source.find("\n", pos)
                end = length if end == -1 else end
                diagnostics.append(Diagnostic("error", "unterminated string", span_at(pos, end - pos)))
                pos = end
                continue
            text = match.group(0)
            try:
                value = json.loads(text)
            except ValueError:
                diagnostics.append(Diagnostic("error", "invalid escape in string", span_at(pos, len(text))))
                value = ""
            tokens.append(Token(STRING, value, span_at(pos, len(text))))
            pos = match.end()
            continue
        if c.isdigit():
            match = NUMBER_RE.match(source, pos)
            text = match.group(0)
            if match.group(2) or match.group(3):
                tokens.append(Token(FLOAT, float(text), span_at(pos, len(text))))
            else:
                tokens.append(Token(INT, int(text), span_at(pos, len(text))))
            pos = match.end()
            continue
        if c == "$":
            match = PARAM_RE.match(source, pos)
            if match is None:
                diagnostics.append(Diagnostic("error", "'$' must be followed by a name", span_at(pos, 1)))
                pos += 1
                continue
            tokens.append(Token(PARAM, match.group(0)[1:], span_at(pos, len(match.group(0)))))
            pos = match.end()
            continue
        match = NAME_RE.match(source, pos)
        if match is not None:
            tokens.append(Token(NAME, match.group(0), span_at(pos, len(match.group(0)))))
            pos = match.end()
            continue
        for op in OPERATORS:
            if source.startswith(op, pos):
                tokens.append(Token(OP, op, span_at(pos, len(op))))
                pos += len(op)
                break
        else:
            diagnostics.append(Diagnostic("error", "unexpected character %r" % c, span_at(pos, 1)))
            pos += 1
    tokens.append(Token(EOF, None, span_at(pos, 0)))
    return tokens, diagnostics
