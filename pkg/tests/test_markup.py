"""Parser tests: spans, tolerance, round-trips, and fuzz totality."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from a11y_forge.markup import (
    AttrKind,
    ElementNode,
    Flavor,
    SourceDocument,
    SpanOutOfBounds,
    iter_elements,
    is_well_formed_fragment,
    make_span,
    parse_document,
    slice_span,
    smallest_enclosing_element,
    structurally_equal,
)


def doc_of(text, flavor=Flavor.JSX, path=None):
    if path is None:
        path = "test." + ("html" if flavor is Flavor.HTML else flavor.value)
    return SourceDocument.from_text(text, path=path, flavor=flavor)


def parse(text, flavor=Flavor.JSX):
    doc = doc_of(text, flavor)
    return doc, parse_document(doc)


def test_single_html_element():
    doc, tree = parse('<img src="a.png">', Flavor.HTML)
    assert len(tree.roots) == 1
    img = tree.roots[0]
    assert img.tag == "img"
    assert [a.name for a in img.attributes] == ["src"]
    assert img.attributes[0].value.kind is AttrKind.STRING
    assert img.attributes[0].value.literal == "a.png"
    assert img.self_closing  # void element


def test_jsx_expression_attribute():
    doc, tree = parse("<div onClick={handleMouseOver}>hello</div>")
    div = tree.roots[0]
    assert div.tag == "div"
    attr = div.attributes[0]
    assert attr.name == "onClick"
    assert attr.value.kind is AttrKind.EXPRESSION
    assert attr.value.raw == "{handleMouseOver}"
    assert attr.value.raw.startswith("{") and attr.value.raw.endswith("}")


def test_custom_component_classification():
    doc, tree = parse("<Button onClick={f}/>")
    el = tree.roots[0]
    assert el.tag == "Button"
    assert el.is_custom_component(Flavor.JSX)
    assert el.self_closing
    doc2, tree2 = parse("<button onClick={f}>x</button>")
    assert not tree2.roots[0].is_custom_component(Flavor.JSX)


def test_open_tag_span_slices_verbatim():
    text = '<div className="a">\n  <img src="x.png" alt="y"/>\n</div>\n'
    doc, tree = parse(text)
    for el, _ in iter_elements(tree):
        sliced = slice_span(doc, el.open_tag_span)
        assert sliced.startswith("<" + el.tag)
        assert sliced.endswith(">")
    div = tree.roots[0]
    assert slice_span(doc, div.open_tag_span) == '<div className="a">'
    assert slice_span(doc, div.span) == text.rstrip("\n")


def test_slice_identity_and_empty():
    text = "<p>x</p>"
    doc, tree = parse(text, Flavor.HTML)
    assert slice_span(doc, tree.roots[0].span) == "<p>x</p>"
    zero = make_span(doc, 3, 3)
    assert slice_span(doc, zero) == ""


def test_slice_out_of_bounds():
    doc = doc_of("<p>x</p>", Flavor.HTML)
    span = make_span(doc, 0, 8)
    bad = type(span)(start=2, end=99, start_line=1, start_col=2, end_line=1, end_col=99)
    with pytest.raises(SpanOutOfBounds):
        slice_span(doc, bad)


def test_attribute_order_and_duplicates_preserved():
    doc, tree = parse('<div a="1" b="2" a="3">x</div>')
    names = [a.name for a in tree.roots[0].attributes]
    assert names == ["a", "b", "a"]


def test_bare_attribute_is_bare_true():
    doc, tree = parse("<input disabled autoFocus />")
    el = tree.roots[0]
    kinds = {a.name: a.value.kind for a in el.attributes}
    assert kinds["disabled"] is AttrKind.BARE_TRUE
    assert kinds["autoFocus"] is AttrKind.BARE_TRUE
    assert all(a.value.raw == "" for a in el.attributes)


def test_spread_attribute():
    doc, tree = parse("<img {...props} src={s}/>")
    el = tree.roots[0]
    assert el.has_spread
    assert el.attributes[0].is_spread
    assert el.attributes[0].name == "{...props}"


def test_children_spans_contained():
    text = "<ul>\n  <li>one</li>\n  <li>{two}</li>\n</ul>"
    doc, tree = parse(text)
    for el, ancestry in iter_elements(tree):
        for parent in ancestry:
            assert parent.span.contains(el.span)


def test_elements_inside_expressions_are_found():
    text = "<ul>{items.map(item => (<li key={item}>{item}</li>))}</ul>"
    doc, tree = parse(text)
    tags = [el.tag for el, _ in iter_elements(tree)]
    assert tags == ["ul", "li"]
    li, ancestry = [pair for pair in iter_elements(tree) if pair[0].tag == "li"][0]
    assert [a.tag for a in ancestry] == ["ul"]


def test_top_level_fragment_extraction_from_js():
    text = (
        "import React from 'react';\n"
        "function App() {\n"
        "  return (\n"
        "    <div className=\"app\">hello</div>\n"
        "  );\n"
        "}\n"
        "export default App;\n"
    )
    doc, tree = parse(text)
    assert [r.tag for r in tree.roots] == ["div"]


def test_comments_never_produce_elements():
    text = "<div>{/* a comment with <b>markup</b> */}<!-- html <i>comment</i> -->text</div>"
    doc, tree = parse(text)
    tags = [el.tag for el, _ in iter_elements(tree)]
    assert tags == ["div"]
    assert len(tree.comment_spans) == 2


def test_void_elements_do_not_swallow_siblings():
    text = "<div><br><img src=\"a.png\"><p>after</p></div>"
    doc, tree = parse(text, Flavor.HTML)
    div = tree.roots[0]
    child_tags = [c.tag for c in div.children if isinstance(c, ElementNode)]
    assert child_tags == ["br", "img", "p"]


def test_unclosed_element_recovers_with_warning():
    text = "<div><span>x</div>"
    doc, tree = parse(text, Flavor.HTML)
    assert tree.roots[0].tag == "div"
    assert any("unclosed" in w.message for w in tree.warnings)
    inner = [c for c in tree.roots[0].children if isinstance(c, ElementNode)]
    assert inner[0].tag == "span"


def test_stray_close_tag_warns_and_continues():
    text = "</p><div>x</div>"
    doc, tree = parse(text, Flavor.HTML)
    assert [r.tag for r in tree.roots] == ["div"]
    assert any("stray" in w.message for w in tree.warnings)


def test_script_raw_text_in_html():
    text = "<script>if (a < b) { f('<div>'); }</script><p>x</p>"
    doc, tree = parse(text, Flavor.HTML)
    assert [r.tag for r in tree.roots] == ["script", "p"]


def test_plain_ts_no_markup_yields_empty_tree():
    text = "export function add(a: number, b: number): number {\n  return a + b;\n}\n"
    doc = doc_of(text, Flavor.TSX, path="util.ts")
    tree = parse_document(doc)
    assert tree.roots == []


def test_linecol_offset_bijection():
    text = "ab\ncdé\n\nx"
    doc = doc_of(text, Flavor.HTML, path="t.html")
    for offset in range(len(text) + 1):
        line, col = doc.offset_to_linecol(offset)
        assert doc.linecol_to_offset(line, col) == offset


def test_round_trip_reparse_structural_equality():
    text = (
        '<div className="tooltip-wrapper">\n'
        '  <div className="tooltip-trigger" onClick={showTooltip}>\n'
        "    {children}\n"
        "  </div>\n"
        "  {visible && (\n"
        '    <span className="tooltip-text">{text}</span>\n'
        "  )}\n"
        "</div>"
    )
    doc, tree = parse(text)
    for el, _ in iter_elements(tree):
        sub = SourceDocument.from_text(slice_span(doc, el.span), path="sub.jsx")
        subtree = parse_document(sub)
        assert len(subtree.roots) == 1
        assert structurally_equal(subtree.roots[0], el)


def test_smallest_enclosing_element():
    text = '<div><section><img src="a.png"></section><p>x</p></div>'
    doc, tree = parse(text, Flavor.HTML)
    img = [e for e, _ in iter_elements(tree) if e.tag == "img"][0]
    enclosing = smallest_enclosing_element(tree, [img.open_tag_span])
    assert enclosing.tag == "img"
    p = [e for e, _ in iter_elements(tree) if e.tag == "p"][0]
    both = smallest_enclosing_element(tree, [img.open_tag_span, p.span])
    assert both.tag == "div"


def test_well_formed_fragment():
    assert is_well_formed_fragment("<button onClick={f}>Go</button>", Flavor.JSX)
    assert not is_well_formed_fragment("just some prose", Flavor.JSX)
    assert not is_well_formed_fragment("<div><span></div>", Flavor.JSX)


def test_html_entities_decoded_in_attr_literals():
    doc, tree = parse('<a href="?a=1&amp;b=2">x</a>', Flavor.HTML)
    assert tree.roots[0].attributes[0].value.literal == "?a=1&b=2"


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=400))
def test_parsing_is_total(text):
    doc = SourceDocument.from_text(text, path="fuzz.jsx")
    tree = parse_document(doc)
    for el, ancestry in iter_elements(tree):
        assert 0 <= el.span.start <= el.span.end <= len(text)
        assert slice_span(doc, el.open_tag_span).startswith("<")


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="<>{}/=\"' abXy\n&;!-", max_size=200))
def test_parsing_is_total_markupish(text):
    for flavor, path in ((Flavor.JSX, "f.jsx"), (Flavor.HTML, "f.html")):
        doc = SourceDocument.from_text(text, path=path, flavor=flavor)
        tree = parse_document(doc)
        for el, _ in iter_elements(tree):
            assert doc.text[el.span.start : el.span.end] == slice_span(doc, el.span)


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=300))
def test_offset_linecol_bijection_property(text):
    doc = SourceDocument.from_text(text, path="t.html", flavor=Flavor.HTML)
    for offset in range(0, len(text) + 1, max(1, len(text) // 7 or 1)):
        line, col = doc.offset_to_linecol(offset)
        assert doc.linecol_to_offset(line, col) == offset


def test_non_utf8_file_rejected_at_load(tmp_path):
    from a11y_forge.markup import DocumentEncodingError

    path = tmp_path / "latin.html"
    path.write_bytes("<p>caf\xe9</p>".encode("latin-1"))
    with pytest.raises(DocumentEncodingError, match="latin.html"):
        SourceDocument.load(str(path))
