"""Labeled ordered trees with a parenthetical-notation parser and serializer.

Every tree in this package is an immutable ``Tree``: a label plus an ordered
tuple of child trees. A node with no children is *terminal*; a node whose
children are all terminal is *preterminal*. Trees are safe to share across
threads after construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

DEFAULT_NODE_LIMIT = 100_000

_FORBIDDEN = set("()")


class TreeParseError(ValueError):
    """Malformed parenthetical input; ``offset`` is the character position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at character {offset})")
        self.offset = offset


def _check_label(text: str) -> None:
    if not text:
        raise ValueError("empty label")
    if any(c in _FORBIDDEN or c.isspace() for c in text):
        raise ValueError(f"label {text!r} contains whitespace or parentheses")


@dataclass(frozen=True)
class Tree:
    """An ordered labeled tree. Child order is significant."""

    label: str
    children: tuple["Tree", ...] = ()

    def __post_init__(self):
        _check_label(self.label)

    @property
    def is_terminal(self) -> bool:
        return not self.children

    @property
    def is_preterminal(self) -> bool:
        return bool(self.children) and all(c.is_terminal for c in self.children)

    def node_count(self) -> int:
        return sum(1 for _ in preorder(self))

    def __str__(self) -> str:
        return serialize_tree(self)


@dataclass(frozen=True)
class Production:
    """A non-terminal node's label with the ordered labels of all children."""

    parent: str
    child_labels: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.parent} -> {' '.join(self.child_labels)}"


def parse_tree(text: str, node_limit: int = DEFAULT_NODE_LIMIT) -> Tree:
    """Parse one parenthetical expression (or a bare label) into a Tree.

    Raises TreeParseError with a character offset for unbalanced parentheses,
    empty labels, empty input, or trailing garbage after the root expression.
    """
    n = len(text)
    i = 0

    def skip_ws(i: int) -> int:
        while i < n and text[i].isspace():
            i += 1
        return i

    def read_label(i: int) -> tuple[str, int]:
        start = i
        while i < n and not text[i].isspace() and text[i] not in _FORBIDDEN:
            i += 1
        if i == start:
            raise TreeParseError("expected label", start)
        return text[start:i], i

    i = skip_ws(i)
    if i >= n:
        raise TreeParseError("empty input", i)

    nodes_seen = 0

    def bump() -> None:
        nonlocal nodes_seen
        nodes_seen += 1
        if nodes_seen > node_limit:
            raise TreeParseError(f"tree exceeds {node_limit} nodes", i)

    if text[i] != "(":
        label, i = read_label(i)
        bump()
        i = skip_ws(i)
        if i < n:
            raise TreeParseError("trailing garbage after root expression", i)
        return Tree(label)

    # Iterative descent: stack of (label, children-so-far) frames.
    stack: list[tuple[str, list[Tree]]] = []
    root: Tree | None = None
    while i < n:
        i = skip_ws(i)
        if i >= n:
            break
        c = text[i]
        if c == "(":
            open_at = i
            i = skip_ws(i + 1)
            if i >= n or text[i] in _FORBIDDEN:
                raise TreeParseError("expected label after '('", open_at + 1)
            label, i = read_label(i)
            bump()
            stack.append((label, []))
        elif c == ")":
            if not stack:
                raise TreeParseError("unbalanced parentheses", i)
            label, kids = stack.pop()
            node = Tree(label, tuple(kids))
            i += 1
            if stack:
                stack[-1][1].append(node)
            else:
                root = node
                i = skip_ws(i)
                if i < n:
                    raise TreeParseError("trailing garbage after root expression", i)
                break
        else:
            if not stack:
                raise TreeParseError("trailing garbage after root expression", i)
            label, i = read_label(i)
            bump()
            stack[-1][1].append(Tree(label))
    if root is None:
        raise TreeParseError("unbalanced parentheses", n)
    return root


def serialize_tree(t: Tree) -> str:
    """Inverse of parse_tree: single spaces between siblings, no padding."""
    out: list[str] = []
    # Explicit stack so arbitrarily deep trees never hit the recursion limit.
    work: list[Tree | str] = [t]
    while work:
        item = work.pop()
        if isinstance(item, str):
            out.append(item)
        elif item.is_terminal:
            out.append(item.label)
        else:
            out.append(f"({item.label} ")
            work.append(")")
            for c in reversed(item.children):
                work.append(c)
                work.append(" ")
            work.pop()  # no space before the first child? no -- after label yes; drop trailing
    return "".join(out)


def preorder(t: Tree) -> Iterator[Tree]:
    """Depth-first preorder traversal, children in order."""
    work = [t]
    while work:
        node = work.pop()
        yield node
        work.extend(reversed(node.children))


def postorder(t: Tree) -> Iterator[Tree]:
    work: list[tuple[Tree, bool]] = [(t, False)]
    while work:
        node, expanded = work.pop()
        if expanded:
            yield node
        else:
            work.append((node, True))
            for c in reversed(node.children):
                work.append((c, False))


def production_of(node: Tree) -> Production:
    if node.is_terminal:
        raise ValueError("terminal nodes have no production")
    return Production(node.label, tuple(c.label for c in node.children))


def productions(t: Tree) -> list[tuple[Tree, Production]]:
    """(node, production) for every non-terminal node, in preorder."""
    return [(n, production_of(n)) for n in preorder(t) if not n.is_terminal]


def read_corpus(path) -> list[Tree]:
    """One tree per line; '#' lines are comments, blank lines skipped."""
    trees = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                trees.append(parse_tree(stripped))
            except TreeParseError as exc:
                raise TreeParseError(f"line {lineno}: {exc}", exc.offset) from exc
    return trees
