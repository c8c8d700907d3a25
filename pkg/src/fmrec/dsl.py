"""Text format for feature models (``.fm`` files).

Grammar (`#` starts a comment running to end of line)::

    model      := "model" IDENT "{" item* "}" constraints?
    item       := relkw? "feature" IDENT ("{" (item | group)* "}")?
    relkw      := "mandatory" | "optional"          (default: optional)
    group      := ("alternative" | "or") "{" item+ "}"
    constraints:= "constraints" "{" cline* "}"
    cline      := ("requires" | "excludes") IDENT IDENT

:func:`parse_model` and :func:`serialize_model` are inverse up to
whitespace and comments.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ALTERNATIVE,
    EXCLUDES,
    MANDATORY,
    OPTIONAL,
    OR,
    REQUIRES,
    CrossTreeConstraint,
    Feature,
    FeatureModel,
    FeatureTree,
    Group,
    RelChild,
)

__all__ = ["ParseError", "parse_model", "serialize_model"]

_KEYWORDS = {
    "model",
    "feature",
    MANDATORY,
    OPTIONAL,
    ALTERNATIVE,
    OR,
    "constraints",
    REQUIRES,
    EXCLUDES,
}


class ParseError(ValueError):
    """Syntax or reference error in feature-model source, with location."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # keyword text, "ident", "{", "}", or "eof"
    text: str
    line: int
    col: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        col = 0
        n = len(line)
        while col < n:
            ch = line[col]
            if ch.isspace():
                col += 1
                continue
            if ch in "{}":
                tokens.append(_Token(ch, ch, lineno, col + 1))
                col += 1
                continue
            if ch.isalpha():
                end = col
                while end < n and (line[end].isalnum() or line[end] == "_"):
                    end += 1
                word = line[col:end]
                kind = word if word in _KEYWORDS else "ident"
                tokens.append(_Token(kind, word, lineno, col + 1))
                col = end
                continue
            raise ParseError(f"unexpected character {ch!r}", lineno, col + 1)
    last_line = source.count("\n") + 1
    tokens.append(_Token("eof", "", last_line, 1))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.names: set[str] = set()

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, kind: str | None = None) -> _Token:
        token = self.tokens[self.pos]
        if kind is not None and token.kind != kind:
            want = "identifier" if kind == "ident" else f"'{kind}'"
            raise ParseError(f"expected {want}, found {token.text or 'end of input'!r}", token.line, token.col)
        self.pos += 1
        return token

    def feature_name(self) -> Feature:
        token = self.peek()
        if token.kind in _KEYWORDS:
            raise ParseError(f"keyword {token.text!r} cannot be used as a feature name", token.line, token.col)
        token = self.take("ident")
        if token.text in self.names:
            raise ParseError(f"duplicate feature name {token.text!r}", token.line, token.col)
        self.names.add(token.text)
        return Feature.named(token.text)

    def model(self) -> FeatureModel:
        self.take("model")
        root_feature = self.feature_name()
        self.take("{")
        children = self.body()
        self.take("}")
        constraints: tuple[CrossTreeConstraint, ...] = ()
        if self.peek().kind == "constraints":
            constraints = self.constraints()
        end = self.take()
        if end.kind != "eof":
            raise ParseError(f"unexpected input {end.text!r} after model", end.line, end.col)
        return FeatureModel(FeatureTree(root_feature, children), constraints)

    def body(self) -> tuple:
        """Items and groups until the closing brace."""
        entries: list = []
        while True:
            token = self.peek()
            if token.kind in (MANDATORY, OPTIONAL, "feature"):
                entries.append(self.item(group_member=False))
            elif token.kind in (ALTERNATIVE, OR):
                entries.append(self.group())
            else:
                return tuple(entries)

    def item(self, group_member: bool):
        token = self.peek()
        kind = OPTIONAL
        if token.kind in (MANDATORY, OPTIONAL):
            if group_member:
                raise ParseError(
                    f"{token.text!r} is not allowed on group members (the group defines the relationship)",
                    token.line,
                    token.col,
                )
            kind = self.take().kind
        self.take("feature")
        feature = self.feature_name()
        children: tuple = ()
        if self.peek().kind == "{":
            self.take("{")
            children = self.body()
            self.take("}")
        node = FeatureTree(feature, children)
        return node if group_member else RelChild(kind, node)

    def group(self) -> Group:
        kw = self.take()
        self.take("{")
        members: list[FeatureTree] = []
        while self.peek().kind in (MANDATORY, OPTIONAL, "feature"):
            members.append(self.item(group_member=True))
        self.take("}")
        if len(members) < 2:
            raise ParseError(f"{kw.text} group needs at least 2 child features", kw.line, kw.col)
        return Group(kw.kind, tuple(members))

    def constraints(self) -> tuple[CrossTreeConstraint, ...]:
        self.take("constraints")
        self.take("{")
        out: list[CrossTreeConstraint] = []
        while self.peek().kind in (REQUIRES, EXCLUDES):
            kind = self.take().kind
            a = self.reference()
            b = self.reference()
            out.append(CrossTreeConstraint(kind, a, b))
        self.take("}")
        return tuple(out)

    def reference(self) -> str:
        token = self.take("ident")
        if token.text not in self.names:
            raise ParseError(f"unknown feature {token.text!r} in constraints block", token.line, token.col)
        return token.text


def parse_model(source: str) -> FeatureModel:
    """Parse ``.fm`` source into a feature model.

    Raises :class:`ParseError` with line/column on syntax errors, duplicate
    feature names, unknown features in the constraints block, and groups
    with fewer than two children.
    """
    return _Parser(source).model()


def serialize_model(model: FeatureModel) -> str:
    """Render a valid model as canonical ``.fm`` source.

    ``parse_model(serialize_model(m))`` is structurally equal to ``m``.
    The text format carries a single identifier per feature, used as both
    id and display name (exactly what the parser produces); a feature whose
    id and name differ serializes as its name.
    """
    model.require_valid()
    lines: list[str] = []
    root = model.root
    if not root.children:
        lines.append(f"model {root.feature.name} {{ }}")
    else:
        lines.append(f"model {root.feature.name} {{")
        for child in root.children:
            _write_child(child, lines, depth=1)
        lines.append("}")
    if model.cross_tree:
        lines.append("constraints {")
        for constraint in model.cross_tree:
            lines.append(f"  {constraint.kind} {constraint.a} {constraint.b}")
        lines.append("}")
    return "\n".join(lines) + "\n"


def _write_child(child, lines: list[str], depth: int) -> None:
    pad = "  " * depth
    if isinstance(child, RelChild):
        _write_feature(child.node, lines, depth, prefix=f"{child.kind} ")
    else:
        lines.append(f"{pad}{child.kind} {{")
        for member in child.members:
            _write_feature(member, lines, depth + 1, prefix="")
        lines.append(f"{pad}}}")


def _write_feature(node: FeatureTree, lines: list[str], depth: int, prefix: str) -> None:
    pad = "  " * depth
    if not node.children:
        lines.append(f"{pad}{prefix}feature {node.feature.name}")
        return
    lines.append(f"{pad}{prefix}feature {node.feature.name} {{")
    for child in node.children:
        _write_child(child, lines, depth + 1)
    lines.append(f"{pad}}}")
