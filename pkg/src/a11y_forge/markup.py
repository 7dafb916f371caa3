"""Error-tolerant, span-preserving parser for JSX/TSX/HTML markup.

The parser extracts element/attribute structure without attempting full
JavaScript analysis: JSX expressions are scanned as balanced-brace tokens,
and any complete tags found inside them are parsed too. It never raises on
malformed input; broken regions become warnings and the parse recovers.

All offsets are Unicode code-point offsets into the document text. Lines
are 1-based, columns 0-based.
"""

from __future__ import annotations

import html as _htmllib
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional, Union


class Flavor(Enum):
    HTML = "html"
    JSX = "jsx"
    TSX = "tsx"


_EXT_FLAVORS = {
    ".html": Flavor.HTML,
    ".htm": Flavor.HTML,
    ".js": Flavor.JSX,
    ".jsx": Flavor.JSX,
    ".ts": Flavor.TSX,
    ".tsx": Flavor.TSX,
}

# WHATWG void elements: never have children, close implicitly.
VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

# Elements whose content is raw text in HTML (no nested markup).
_RAW_TEXT_ELEMENTS = frozenset(["script", "style"])

# Known native HTML element names; anything else in a JSX file is either a
# custom component (uppercase) or an unknown tag treated conservatively.
KNOWN_HTML_ELEMENTS = frozenset(
    """a abbr address area article aside audio b base bdi bdo blockquote body br
    button canvas caption cite code col colgroup data datalist dd del details
    dfn dialog div dl dt em embed fieldset figcaption figure footer form h1 h2
    h3 h4 h5 h6 head header hgroup hr html i iframe img input ins kbd label
    legend li link main map mark menu meta meter nav noscript object ol optgroup
    option output p param picture pre progress q rp rt ruby s samp script
    search section select slot small source span strong style sub summary sup
    table tbody td template textarea tfoot th thead time title tr track u ul
    var video wbr""".split()
)


class SpanOutOfBounds(ValueError):
    """A span does not lie within the document text."""


class DocumentEncodingError(ValueError):
    """File contents are not valid UTF-8."""


def flavor_for_path(path: str) -> Flavor:
    ext = Path(path).suffix.lower()
    try:
        return _EXT_FLAVORS[ext]
    except KeyError:
        raise ValueError(f"cannot infer markup flavor from extension {ext!r} ({path})")


@dataclass(frozen=True)
class SourceDocument:
    path: str
    flavor: Flavor
    text: str
    line_starts: tuple[int, ...]

    @staticmethod
    def from_text(text: str, path: str = "<memory>", flavor: Optional[Flavor] = None) -> "SourceDocument":
        if flavor is None:
            flavor = flavor_for_path(path)
        starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                starts.append(i + 1)
        return SourceDocument(path=path, flavor=flavor, text=text, line_starts=tuple(starts))

    @staticmethod
    def load(path: str, flavor: Optional[Flavor] = None) -> "SourceDocument":
        raw = Path(path).read_bytes()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentEncodingError(f"{path}: not valid UTF-8 ({exc})") from exc
        return SourceDocument.from_text(text, path=path, flavor=flavor)

    def offset_to_linecol(self, offset: int) -> tuple[int, int]:
        if offset < 0 or offset > len(self.text):
            raise SpanOutOfBounds(f"offset {offset} outside document of length {len(self.text)}")
        line_idx = bisect_right(self.line_starts, offset) - 1
        return line_idx + 1, offset - self.line_starts[line_idx]

    def linecol_to_offset(self, line: int, col: int) -> int:
        if line < 1 or line > len(self.line_starts):
            raise SpanOutOfBounds(f"line {line} outside document with {len(self.line_starts)} lines")
        offset = self.line_starts[line - 1] + col
        line_end = (
            self.line_starts[line] if line < len(self.line_starts) else len(self.text) + 1
        )
        if offset > len(self.text) or offset >= line_end + (0 if line < len(self.line_starts) else 1):
            raise SpanOutOfBounds(f"column {col} outside line {line}")
        return offset


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end


def make_span(doc: SourceDocument, start: int, end: int) -> Span:
    if start > end:
        raise SpanOutOfBounds(f"span start {start} after end {end}")
    sl, sc = doc.offset_to_linecol(start)
    el, ec = doc.offset_to_linecol(end)
    return Span(start, end, sl, sc, el, ec)


def slice_span(doc: SourceDocument, span: Span) -> str:
    if span.start < 0 or span.end > len(doc.text) or span.start > span.end:
        raise SpanOutOfBounds(f"span {span.start}..{span.end} outside document {doc.path}")
    return doc.text[span.start : span.end]


class AttrKind(Enum):
    STRING = "string"
    EXPRESSION = "expression"
    BARE_TRUE = "bare_true"


@dataclass(frozen=True)
class AttributeValue:
    kind: AttrKind
    raw: str
    literal: Optional[str] = None


@dataclass(frozen=True)
class Attribute:
    name: str
    value: AttributeValue
    span: Span

    @property
    def is_spread(self) -> bool:
        return self.name.startswith("{")


@dataclass
class TextNode:
    text: str
    span: Span


@dataclass
class ExpressionNode:
    raw: str
    span: Span
    elements: list["ElementNode"] = field(default_factory=list)


@dataclass
class ElementNode:
    tag: str
    attributes: list[Attribute]
    children: list[Union["ElementNode", TextNode, ExpressionNode]]
    span: Span
    open_tag_span: Span
    self_closing: bool

    def is_custom_component(self, flavor: Flavor) -> bool:
        if flavor is Flavor.HTML:
            return False
        return bool(self.tag) and self.tag[0].isupper()

    def is_known_html_element(self) -> bool:
        return self.tag.lower() in KNOWN_HTML_ELEMENTS

    @property
    def has_spread(self) -> bool:
        return any(a.is_spread for a in self.attributes)

    def find_attr(self, *names: str) -> Optional[Attribute]:
        wanted = {n.lower() for n in names}
        for attr in self.attributes:
            if not attr.is_spread and attr.name.lower() in wanted:
                return attr
        return None

    def has_attr(self, *names: str) -> bool:
        return self.find_attr(*names) is not None

    def attr_literal(self, *names: str) -> Optional[str]:
        """Literal string value of the first matching attribute, else None."""
        attr = self.find_attr(*names)
        if attr is None or attr.value.kind is not AttrKind.STRING:
            return None
        return attr.value.literal


@dataclass
class ParseWarning:
    message: str
    span: Span


@dataclass
class ElementTree:
    roots: list[ElementNode]
    warnings: list[ParseWarning]
    comment_spans: list[Span]


Node = Union[ElementNode, TextNode, ExpressionNode]

_NAME_START = re.compile(r"[A-Za-z]")
_TAG_NAME = re.compile(r"[A-Za-z][A-Za-z0-9.:_$\-]*")
_ATTR_NAME = re.compile(r"[A-Za-z_@:][A-Za-z0-9_.:\-]*")
_BARE_VALUE = re.compile(r"[^\s>]+")


class _Parser:
    def __init__(self, doc: SourceDocument):
        self.doc = doc
        self.text = doc.text
        self.n = len(doc.text)
        self.warnings: list[ParseWarning] = []
        self.comment_spans: list[Span] = []
        self.is_jsx = doc.flavor in (Flavor.JSX, Flavor.TSX)

    def warn(self, message: str, start: int, end: int) -> None:
        self.warnings.append(ParseWarning(message, make_span(self.doc, start, min(end, self.n))))

    # -- top level ---------------------------------------------------------

    def parse(self) -> ElementTree:
        roots: list[ElementNode] = []
        i = 0
        while i < self.n:
            i = self._find_markup(i)
            if i >= self.n:
                break
            if self.text.startswith("<!--", i):
                i = self._consume_html_comment(i)
            elif self.text.startswith("<!", i) or self.text.startswith("<?", i):
                i = self._skip_past(">", i)
            elif self.text.startswith("</", i):
                self.warn(f"stray closing tag", i, i + 2)
                i = self._skip_past(">", i)
            else:
                element, i, _pending = self._parse_element(i, [])
                if element is not None:
                    roots.append(element)
                else:
                    i += 1
        return ElementTree(roots=roots, warnings=self.warnings, comment_spans=self.comment_spans)

    def _find_markup(self, i: int) -> int:
        """Advance to the next plausible tag start; skips surrounding code/text."""
        while i < self.n:
            j = self.text.find("<", i)
            if j == -1:
                return self.n
            nxt = self.text[j + 1 : j + 2]
            if nxt and (_NAME_START.match(nxt) or nxt in "/!?"):
                return j
            i = j + 1
        return self.n

    def _skip_past(self, needle: str, i: int) -> int:
        j = self.text.find(needle, i)
        if j == -1:
            self.warn(f"unterminated markup, expected {needle!r}", i, self.n)
            return self.n
        return j + len(needle)

    def _consume_html_comment(self, i: int) -> int:
        j = self.text.find("-->", i + 4)
        if j == -1:
            self.warn("unterminated comment", i, self.n)
            end = self.n
        else:
            end = j + 3
        self.comment_spans.append(make_span(self.doc, i, end))
        return end

    # -- elements ----------------------------------------------------------

    def _parse_element(
        self, i: int, open_stack: list[str]
    ) -> tuple[Optional[ElementNode], int, Optional[str]]:
        """Parse an element starting at '<'.

        Returns (element, next_index, pending_close): pending_close is a tag
        name when a mismatched closing tag should be handled by an ancestor.
        """
        m = _TAG_NAME.match(self.text, i + 1)
        if not m:
            return None, i + 1, None
        tag = m.group(0)
        j = m.end()
        attributes, j, open_ok = self._parse_attributes(j)
        self_closing = False
        if self.text.startswith("/>", j):
            j += 2
            self_closing = True
        elif j < self.n and self.text[j] == ">":
            j += 1
        else:
            # Ran off the end of the input inside the open tag.
            self.warn(f"unterminated open tag <{tag}>", i, j)
            open_span = make_span(self.doc, i, j)
            node = ElementNode(tag, attributes, [], open_span, open_span, True)
            return node, j, None

        open_end = j
        open_span = make_span(self.doc, i, open_end)
        if not open_ok:
            self.warn(f"malformed attributes in <{tag}>", i, open_end)

        if self_closing or tag.lower() in VOID_ELEMENTS:
            node = ElementNode(tag, attributes, [], open_span, open_span, True)
            return node, open_end, None

        if self.doc.flavor is Flavor.HTML and tag.lower() in _RAW_TEXT_ELEMENTS:
            children, end, pending = self._parse_raw_text(tag, open_end)
        else:
            children, end, pending = self._parse_children(tag, open_end, open_stack + [tag])
        node = ElementNode(
            tag,
            attributes,
            children,
            make_span(self.doc, i, end),
            open_span,
            False,
        )
        return node, end, pending

    def _parse_raw_text(self, tag: str, i: int) -> tuple[list[Node], int, Optional[str]]:
        close = re.compile(rf"</\s*{re.escape(tag)}\s*>", re.IGNORECASE)
        m = close.search(self.text, i)
        if not m:
            self.warn(f"unclosed <{tag}>", i, self.n)
            children: list[Node] = []
            if i < self.n:
                children.append(TextNode(self.text[i:], make_span(self.doc, i, self.n)))
            return children, self.n, None
        children = []
        if m.start() > i:
            children.append(TextNode(self.text[i : m.start()], make_span(self.doc, i, m.start())))
        return children, m.end(), None

    def _parse_children(
        self, parent: str, i: int, open_stack: list[str]
    ) -> tuple[list[Node], int, Optional[str]]:
        children: list[Node] = []
        text_start = i

        def flush_text(upto: int) -> None:
            if upto > text_start:
                content = self.text[text_start:upto]
                if content:
                    children.append(TextNode(content, make_span(self.doc, text_start, upto)))

        while i < self.n:
            ch = self.text[i]
            if ch == "<":
                nxt = self.text[i + 1 : i + 2]
                if self.text.startswith("</", i):
                    m = _TAG_NAME.match(self.text, i + 2)
                    name = m.group(0) if m else ""
                    close_end = self._skip_past(">", i)
                    if name.lower() == parent.lower():
                        flush_text(i)
                        return children, close_end, None
                    if any(name.lower() == o.lower() for o in open_stack[:-1]):
                        # A close tag for an ancestor: this element was left
                        # unclosed; hand the close tag back up the stack.
                        self.warn(f"unclosed <{parent}>", i, i + 2 + len(name))
                        flush_text(i)
                        return children, i, name
                    self.warn(f"stray closing tag </{name}>", i, close_end)
                    flush_text(i)
                    i = text_start = close_end
                    continue
                if self.text.startswith("<!--", i):
                    flush_text(i)
                    i = text_start = self._consume_html_comment(i)
                    continue
                if nxt and _NAME_START.match(nxt):
                    flush_text(i)
                    child, i, pending = self._parse_element(i, open_stack)
                    if child is not None:
                        children.append(child)
                    text_start = i
                    if pending is not None:
                        if pending.lower() == parent.lower():
                            # The pending close tag is ours; consume it.
                            i = self._skip_past(">", i)
                            return children, i, None
                        return children, i, pending
                    continue
                if nxt in ("!", "?"):
                    flush_text(i)
                    i = text_start = self._skip_past(">", i)
                    continue
                i += 1
                continue
            if ch == "{" and self.is_jsx:
                flush_text(i)
                node, i = self._parse_expression(i)
                if node is not None:
                    children.append(node)
                text_start = i
                continue
            i += 1
        self.warn(f"unclosed <{parent}>", text_start, self.n)
        flush_text(self.n)
        return children, self.n, None

    # -- expressions -------------------------------------------------------

    def _parse_expression(self, i: int) -> tuple[Optional[ExpressionNode], int]:
        end = self._scan_balanced_braces(i)
        raw = self.text[i:end]
        span = make_span(self.doc, i, end)
        inner = raw[1:-1].strip() if raw.endswith("}") else raw[1:].strip()
        if inner.startswith("/*") and inner.endswith("*/"):
            # {/* comment */}: retained as a skipped span, not a child.
            self.comment_spans.append(span)
            return None, end
        node = ExpressionNode(raw=raw, span=span)
        node.elements = self._scan_expression_elements(i + 1, end - 1)
        return node, end

    def _scan_balanced_braces(self, i: int) -> int:
        """Return the offset just past the brace block opening at i."""
        depth = 0
        j = i
        while j < self.n:
            ch = self.text[j]
            if ch in "'\"":
                j = self._skip_js_string(j)
                continue
            if ch == "`":
                j = self._skip_template_literal(j)
                continue
            if ch == "/" and self.text.startswith("//", j):
                nl = self.text.find("\n", j)
                j = self.n if nl == -1 else nl + 1
                continue
            if ch == "/" and self.text.startswith("/*", j):
                close = self.text.find("*/", j + 2)
                j = self.n if close == -1 else close + 2
                continue
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return j + 1
            j += 1
        self.warn("unbalanced braces in expression", i, self.n)
        return self.n

    def _skip_js_string(self, i: int) -> int:
        quote = self.text[i]
        j = i + 1
        while j < self.n:
            if self.text[j] == "\\":
                j += 2
                continue
            if self.text[j] == quote or self.text[j] == "\n":
                return j + 1
            j += 1
        return self.n

    def _skip_template_literal(self, i: int) -> int:
        j = i + 1
        while j < self.n:
            if self.text[j] == "\\":
                j += 2
                continue
            if self.text[j] == "`":
                return j + 1
            j += 1
        return self.n

    def _scan_expression_elements(self, start: int, end: int) -> list[ElementNode]:
        """Find complete tags inside an expression body and parse them."""
        elements: list[ElementNode] = []
        j = start
        while j < min(end, self.n):
            ch = self.text[j]
            if ch in "'\"":
                j = self._skip_js_string(j)
                continue
            if ch == "`":
                j = self._skip_template_literal(j)
                continue
            if ch == "/" and self.text.startswith("//", j):
                nl = self.text.find("\n", j)
                j = end if nl == -1 or nl >= end else nl + 1
                continue
            if ch == "/" and self.text.startswith("/*", j):
                close = self.text.find("*/", j + 2)
                j = end if close == -1 or close >= end else close + 2
                continue
            if ch == "<":
                nxt = self.text[j + 1 : j + 2]
                if nxt and _NAME_START.match(nxt):
                    element, nj, _ = self._parse_element(j, [])
                    if element is not None and nj <= end:
                        elements.append(element)
                        j = nj
                        continue
            j += 1
        return elements

    # -- attributes --------------------------------------------------------

    def _parse_attributes(self, i: int) -> tuple[list[Attribute], int, bool]:
        attrs: list[Attribute] = []
        ok = True
        while i < self.n:
            while i < self.n and self.text[i].isspace():
                i += 1
            if i >= self.n:
                break
            ch = self.text[i]
            if ch == ">" or self.text.startswith("/>", i):
                break
            if ch == "/":
                # Lone slash not closing the tag; tolerate.
                i += 1
                continue
            if ch == "{" and self.is_jsx:
                end = self._scan_balanced_braces(i)
                raw = self.text[i:end]
                attrs.append(
                    Attribute(
                        name=raw,
                        value=AttributeValue(AttrKind.EXPRESSION, raw),
                        span=make_span(self.doc, i, end),
                    )
                )
                i = end
                continue
            m = _ATTR_NAME.match(self.text, i)
            if not m:
                ok = False
                i += 1
                continue
            name = m.group(0)
            name_start = i
            i = m.end()
            j = i
            while j < self.n and self.text[j].isspace():
                j += 1
            if j < self.n and self.text[j] == "=":
                j += 1
                while j < self.n and self.text[j].isspace():
                    j += 1
                value, j = self._parse_attr_value(j)
                attrs.append(Attribute(name, value, make_span(self.doc, name_start, j)))
                i = j
            else:
                attrs.append(
                    Attribute(
                        name,
                        AttributeValue(AttrKind.BARE_TRUE, ""),
                        make_span(self.doc, name_start, i),
                    )
                )
        return attrs, i, ok

    def _parse_attr_value(self, i: int) -> tuple[AttributeValue, int]:
        if i >= self.n:
            return AttributeValue(AttrKind.STRING, "", ""), i
        ch = self.text[i]
        if ch in "'\"":
            j = self.text.find(ch, i + 1)
            if j == -1:
                self.warn("unterminated attribute value", i, self.n)
                raw = self.text[i:]
                return AttributeValue(AttrKind.STRING, raw, _htmllib.unescape(raw[1:])), self.n
            raw = self.text[i : j + 1]
            return AttributeValue(AttrKind.STRING, raw, _htmllib.unescape(raw[1:-1])), j + 1
        if ch == "{" and self.is_jsx:
            end = self._scan_balanced_braces(i)
            return AttributeValue(AttrKind.EXPRESSION, self.text[i:end]), end
        m = _BARE_VALUE.match(self.text, i)
        if not m:
            return AttributeValue(AttrKind.STRING, "", ""), i
        raw = m.group(0)
        return AttributeValue(AttrKind.STRING, raw, _htmllib.unescape(raw)), m.end()


def parse_document(doc: SourceDocument) -> ElementTree:
    """Parse the whole document; total over all inputs, never raises."""
    return _Parser(doc).parse()


def iter_elements(
    tree: ElementTree,
) -> Iterator[tuple[ElementNode, tuple[ElementNode, ...]]]:
    """Yield every element with its ancestry, including expression-nested ones."""

    def walk(node: ElementNode, ancestry: tuple[ElementNode, ...]) -> Iterator:
        yield node, ancestry
        for child in node.children:
            if isinstance(child, ElementNode):
                yield from walk(child, ancestry + (node,))
            elif isinstance(child, ExpressionNode):
                for nested in child.elements:
                    yield from walk(nested, ancestry + (node,))

    for root in tree.roots:
        yield from walk(root, ())


def structurally_equal(a: ElementNode, b: ElementNode) -> bool:
    """Equality on tag, attribute names/kinds, and child shape."""
    if a.tag != b.tag or a.self_closing != b.self_closing:
        return False
    if [(x.name, x.value.kind) for x in a.attributes] != [
        (x.name, x.value.kind) for x in b.attributes
    ]:
        return False
    if len(a.children) != len(b.children):
        return False
    for ca, cb in zip(a.children, b.children):
        if type(ca) is not type(cb):
            return False
        if isinstance(ca, ElementNode):
            if not structurally_equal(ca, cb):
                return False
        elif isinstance(ca, TextNode):
            if ca.text != cb.text:
                return False
        elif isinstance(ca, ExpressionNode):
            if ca.raw != cb.raw:
                return False
            if len(ca.elements) != len(cb.elements):
                return False
            if not all(structurally_equal(x, y) for x, y in zip(ca.elements, cb.elements)):
                return False
    return True


def is_well_formed_fragment(text: str, flavor: Flavor) -> bool:
    """True when text parses to at least one element with no warnings."""
    doc = SourceDocument.from_text(text, path=f"<fragment>.{flavor.value}", flavor=flavor)
    tree = parse_document(doc)
    return bool(tree.roots) and not tree.warnings


def find_element_at(tree: ElementTree, offset: int) -> Optional[ElementNode]:
    """Smallest element whose span contains the offset."""
    best: Optional[ElementNode] = None
    for element, _ in iter_elements(tree):
        if element.span.start <= offset < max(element.span.end, element.span.start + 1):
            if best is None or (element.span.end - element.span.start) < (
                best.span.end - best.span.start
            ):
                best = element
    return best


def smallest_enclosing_element(
    tree: ElementTree, spans: list[Span]
) -> Optional[ElementNode]:
    """Smallest element whose span contains every given span."""
    if not spans:
        return None
    lo = min(s.start for s in spans)
    hi = max(s.end for s in spans)
    best: Optional[ElementNode] = None
    for element, _ in iter_elements(tree):
        if element.span.start <= lo and hi <= element.span.end:
            if best is None or (element.span.end - element.span.start) < (
                best.span.end - best.span.start
            ):
                best = element
    return best
