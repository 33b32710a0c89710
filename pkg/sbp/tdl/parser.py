"""
Recursive descent parser for TDL. The grammar is published in docs/tdl.rst.

Parsing never stops at the first problem: a broken statement is reported
and skipped up to the next statement boundary, so one pass yields every
syntax error of a source. A tree is only returned when there were none.
"""
from . import nodes as n
from .lexer import EOF, FLOAT, INT, NAME, OP, PARAM, STRING, Diagnostic, tokenize

STATEMENT_WORDS = ("wait", "let", "if", "switch", "select", "return", "emit", "await")
COMPARISON_OPS = ("==", "!=", "<", "<=", ">", ">=")
CLOSING = {"(": ")", "[": "]", "{": "}"}


class ParseError(Exception):
    def __init__(self, diagnostic):
        super(ParseError, self).__init__(str(diagnostic))
        self.diagnostic = diagnostic


class Parser(object):
    def __init__(self, source):
        self.tokens, self.diagnostics = tokenize(source)
        self.pos = 0
        self.open_brackets = []
        self.reported_eof = False

    # Token helpers

    @property
    def tok(self):
        return self.tokens[self.pos]

    def peek(self, offset=1):
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self):
        tok = self.tok
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.tok
        if tok.kind == EOF and self.open_brackets:
            opener = self.open_brackets[-1]
            return ParseError(
                Diagnostic("error", "'%s' is never closed" % opener.value, opener.span)
            )
        return ParseError(Diagnostic("error", message, tok.span))

    def expected(self, what):
        return self.error("expected %s, found %s" % (what, self.tok))

    def expect_op(self, op):
        if not self.tok.is_op(op):
            raise self.expected("'%s'" % op)
        tok = self.advance()
        if op in CLOSING:
            self.open_brackets.append(tok)
        elif self.open_brackets and CLOSING[self.open_brackets[-1].value] == op:
            self.open_brackets.pop()
        return tok

    def expect_word(self, word):
        if not self.tok.is_word(word):
            raise self.expected("'%s'" % word)
        return self.advance()

    def expect_name(self, what="a name"):
        if self.tok.kind != NAME:
            raise self.expected(what)
        return self.advance()

    def accept_op(self, op):
        if self.tok.is_op(op):
            return self.expect_op(op)
        return None

    # Recovery

    def synchronize(self, start, in_block):
        depth = 0
        while self.tok.kind != EOF:
            tok = self.tok
            if depth == 0 and self.pos > start:
                if tok.is_word(*STATEMENT_WORDS):
                    return
                if in_block and tok.is_op("}"):
                    return
            if tok.is_op("(", "[", "{"):
                depth += 1
            elif tok.is_op(")", "]", "}"):
                depth = max(depth - 1, 0)
            self.advance()

    def report(self, exc):
        diagnostic = exc.diagnostic
        if "never closed" in diagnostic.message:
            if self.reported_eof:
                return
            self.reported_eof = True
        self.diagnostics.append(diagnostic)

    # Statements

    def parse_program(self):
        body = self.statements(in_block=False)
        return n.Program(tuple(body))

    def statements(self, in_block):
        body = []
        while self.tok.kind != EOF and not (in_block and self.tok.is_op("}")):
            start = self.pos
            depth = len(self.open_brackets)
            try:
                body.append(self.statement())
            except ParseError as exc:
                self.report(exc)
                del self.open_brackets[depth:]
                self.synchronize(start, in_block)
        return body

    def block(self):
        self.expect_op("{")
        body = self.statements(in_block=True)
        self.expect_op("}")
        return tuple(body)

    def statement(self):
        tok = self.tok
        if tok.is_word("wait"):
            self.advance()
            self.expect_op("(")
            ticks = self.expression()
            self.expect_op(")")
            return n.Wait(ticks, span=tok.span)
        if tok.is_word("let"):
            self.advance()
            name = self.binder_name()
            self.expect_op("=")
            return n.Let(name, self.expression(), span=tok.span)
        if tok.is_word("if"):
            return self.if_statement()
        if tok.is_word("switch"):
            return self.switch_statement()
        if tok.is_word("select"):
            return self.select_statement()
        if tok.is_word("return"):
            self.advance()
            stop = False
            if self.tok.is_word("stop"):
                self.advance()
                stop = True
            return n.Return(self.updates(), stop, span=tok.span)
        if tok.is_word("emit"):
            self.advance()
            return n.Emit(self.updates(), span=tok.span)
        if tok.is_word("await"):
            self.advance()
            return n.Await(self.expression(), span=tok.span)
        raise self.expected("a statement")

    def binder_name(self):
        tok = self.expect_name("a binder name")
        if tok.value in n.KEYWORDS:
            raise self.error("'%s' is a reserved word" % tok.value, tok)
        return tok.value

    def if_statement(self):
        tok = self.expect_word("if")
        cond = self.expression()
        body = self.block()
        orelse = None
        if self.tok.is_word("else"):
            self.advance()
            if self.tok.is_word("if"):
                orelse = (self.if_statement(),)
            else:
                orelse = self.block()
        return n.If(cond, body, orelse, span=tok.span)

    def switch_statement(self):
        tok = self.expect_word("switch")
        subject = self.expression()
        self.expect_op("{")
        cases = []
        default = None
        while not self.tok.is_op("}"):
            if self.tok.is_word("case"):
                case_tok = self.advance()
                value = self.literal()
                cases.append(n.Case(value, self.block(), span=case_tok.span))
            elif self.tok.is_word("default") and default is None:
                self.advance()
                default = self.block()
            else:
                raise self.expected("'case', 'default' or '}'")
        self.expect_op("}")
        return n.Switch(subject, tuple(cases), default, span=tok.span)

    def select_statement(self):
        tok = self.expect_word("select")
        binder = self.binder_name()
        self.expect_word("in")
        source = self.expression()
        where = minimizing = None
        if self.tok.is_word("where"):
            self.advance()
            where = self.expression()
        if self.tok.is_word("minimizing"):
            self.advance()
            minimizing = self.expression()
        body = self.block()
        orelse = None
        if self.tok.is_word("else"):
            self.advance()
            orelse = self.block()
        return n.Select(binder, source, where, minimizing, body, orelse, span=tok.span)

    def literal(self):
        tok = self.tok
        negative = False
        if tok.is_op("-"):
            self.advance()
            negative = True
        tok = self.tok
        if tok.kind in (INT, FLOAT):
            self.advance()
            return n.Literal(-tok.value if negative else tok.value, span=tok.span)
        if negative:
            raise self.expected("a number")
        if tok.kind == STRING:
            self.advance()
            return n.Literal(tok.value, span=tok.span)
        if tok.is_word("true", "false"):
            self.advance()
            return n.Literal(tok.value == "true", span=tok.span)
        if tok.is_word("unit"):
            self.advance()
            return n.Literal(None, span=tok.span)
        raise self.expected("a literal")

    # Updates

    def updates(self):
        self.expect_op("{")
        items = []
        if not self.tok.is_op("}"):
            items.append(self.update())
            while self.accept_op(","):
                items.append(self.update())
        self.expect_op("}")
        return tuple(items)

    def update(self):
        tok = self.tok
        if tok.is_word("when"):
            self.advance()
            guard = self.guard()
            self.expect_word("do")
            return n.GuardedExpr(guard, self.core(), span=tok.span)
        if tok.is_word(*n.CORE_KINDS):
            return self.core()
        if tok.kind == NAME and tok.value not in n.KEYWORDS:
            self.advance()
            args = ()
            if self.tok.is_op("("):
                args = self.arguments()
            return n.MacroCall(tok.value, args, span=tok.span)
        raise self.expected("an update")

    def guard(self):
        tok = self.tok
        if tok.is_word("exists", "missing") and self.peek().is_op("("):
            self.advance()
            self.expect_op("(")
            path = self.expression()
            self.expect_op(")")
            if tok.value == "exists":
                return n.GuardExists(path, span=tok.span)
            return n.GuardMissing(path, span=tok.span)
        path = self.sum()
        if not self.tok.is_op(*COMPARISON_OPS):
            raise self.expected("a comparison")
        op = self.advance().value
        return n.GuardCompare(path, op, self.sum(), span=tok.span)

    def core(self):
        tok = self.expect_name("an update")
        kind = tok.value
        if kind not in n.CORE_KINDS:
            raise self.error("unknown update '%s'" % kind, tok)
        if kind in ("set_data", "set_transition"):
            target = self.expression()
            self.expect_op("=")
            return n.CoreExpr(kind, target, self.expression(), span=tok.span)
        if kind in ("start_process", "rebind_process"):
            target = self.expression()
            self.expect_op("<-")
            return n.CoreExpr(kind, target, self.expression(), span=tok.span)
        if kind == "add_world":
            target = self.expression()
            source = None
            if self.tok.is_word("from"):
                self.advance()
                source = self.expression()
            return n.CoreExpr(kind, target, source, span=tok.span)
        if kind == "copy_properties":
            source = self.expression()
            self.expect_op("->")
            destination = self.unary()
            if self.tok.is_op("*"):
                self.advance()
                return n.CoreExpr(kind, source, destination, None, span=tok.span)
            self.expect_word("only")
            self.expect_op("[")
            keys = []
            if not self.tok.is_op("]"):
                keys.append(self.expression())
                while self.accept_op(","):
                    keys.append(self.expression())
            self.expect_op("]")
            return n.CoreExpr(kind, source, destination, tuple(keys), span=tok.span)
        return n.CoreExpr(kind, self.expression(), span=tok.span)

    # Expressions

    def expression(self):
        return self.disjunction()

    def disjunction(self):
        left = self.conjunction()
        while self.tok.is_word("or"):
            tok = self.advance()
            left = n.Binary("or", left, self.conjunction(), span=tok.span)
        return left

    def conjunction(self):
        left = self.negation()
        while self.tok.is_word("and"):
            tok = self.advance()
            left = n.Binary("and", left, self.negation(), span=tok.span)
        return left

    def negation(self):
        if self.tok.is_word("not"):
            tok = self.advance()
            return n.Unary("not", self.negation(), span=tok.span)
        return self.comparison()

    def comparison(self):
        left = self.sum()
        if self.tok.is_op(*COMPARISON_OPS):
            tok = self.advance()
            left = n.Binary(tok.value, left, self.sum(), span=tok.span)
        return left

    def sum(self):
        left = self.term()
        while self.tok.is_op("+", "-"):
            tok = self.advance()
            left = n.Binary(tok.value, left, self.term(), span=tok.span)
        return left

    def term(self):
        left = self.unary()
        while self.tok.is_op("*", "/", "%"):
            tok = self.advance()
            left = n.Binary(tok.value, left, self.unary(), span=tok.span)
        return left

    def unary(self):
        if self.tok.is_op("-"):
            tok = self.advance()
            return n.Unary("-", self.unary(), span=tok.span)
        return self.postfix()

    def postfix(self):
        node = self.primary()
        while True:
            if self.tok.is_op("."):
                self.advance()
                if self.tok.kind == STRING:
                    name = self.advance()
                else:
                    name = self.expect_name("a property name")
                node = n.Attr(node, name.value, span=name.span)
            elif self.tok.is_op("["):
                tok = self.expect_op("[")
                key = self.expression()
                self.expect_op("]")
                node = n.Index(node, key, span=tok.span)
            else:
                return node

    def arguments(self):
        self.expect_op("(")
        args = []
        if not self.tok.is_op(")"):
            args.append(self.argument())
            while self.accept_op(","):
                args.append(self.argument())
        self.expect_op(")")
        return tuple(args)

    def argument(self):
        value = self.expression()
        if self.tok.is_op(".."):
            tok = self.advance()
            return n.Range(value, self.expression(), span=tok.span)
        return value

    def primary(self):
        tok = self.tok
        if tok.kind in (INT, FLOAT, STRING):
            self.advance()
            return n.Literal(tok.value, span=tok.span)
        if tok.kind == PARAM:
            self.advance()
            return n.Param(tok.value, span=tok.span)
        if tok.is_op("("):
            self.expect_op("(")
            first = self.expression()
            if self.accept_op(","):
                second = self.expression()
                self.expect_op(")")
                return n.CoordExpr(first, second, span=tok.span)
            self.expect_op(")")
            return first
        if tok.is_op("["):
            self.expect_op("[")
            items = []
            if not self.tok.is_op("]"):
                items.append(self.expression())
                while self.accept_op(","):
                    items.append(self.expression())
            self.expect_op("]")
            return n.ListExpr(tuple(items), span=tok.span)
        if tok.kind == NAME:
            word = tok.value
            if word in ("true", "false"):
                self.advance()
                return n.Literal(word == "true", span=tok.span)
            if word == "unit":
                self.advance()
                return n.Literal(None, span=tok.span)
            if word in ("me", "my"):
                self.advance()
                return n.Me(word, span=tok.span)
            if word == "myworld":
                self.advance()
                return n.MyWorld(span=tok.span)
            if word == "world":
                self.advance()
                self.expect_op("(")
                name = self.expression()
                self.expect_op(")")
                return n.WorldCall(name, span=tok.span)
            if word in n.KEYWORDS:
                raise self.error("unexpected '%s'" % word)
            self.advance()
            if self.tok.is_op("("):
                return n.Call(word, self.arguments(), span=tok.span)
            return n.Var(word, span=tok.span)
        raise self.expected("an expression")


def _finish(parser, node):
    if parser.tok.kind != EOF:
        try:
            raise parser.expected("end of input")
        except ParseError as exc:
            parser.report(exc)
    errors = [d for d in parser.diagnostics if d.is_error]
    return (None if errors else node), parser.diagnostics


def parse(source):
    """
    Parse a TDL program. Returns (program, diagnostics); program is None when
    any diagnostic is an error.
    """
    parser = Parser(source)
    program = parser.parse_program()
    errors = [d for d in parser.diagnostics if d.is_error]
    return (None if errors else program), parser.diagnostics


def parse_update_expression(source):
    """Parse a single update expression, as used in macro templates."""
    parser = Parser(source)
    try:
        node = parser.update()
    except ParseError as exc:
        parser.report(exc)
        return None, parser.diagnostics
    return _finish(parser, node)


def parse_expression(source):
    parser = Parser(source)
    try:
        node = parser.expression()
    except ParseError as exc:
        parser.report(exc)
        return None, parser.diagnostics
    return _finish(parser, node)
